#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "cwt.hpp"
#include "error.hpp"

namespace wavescope {

struct HotspotRegion {
    std::size_t time_begin = 0;  ///< inclusive
    std::size_t time_end = 0;    ///< inclusive
    std::size_t scale_begin = 0; ///< inclusive grid row
    std::size_t scale_end = 0;   ///< inclusive grid row
    std::size_t peak_time = 0;
    std::size_t peak_scale = 0;
    double peak_power = 0.0;
    double quantile_rank = 0.0; ///< fraction of analysed cells with power <= peak
    std::size_t cells = 0;
};

struct HotspotReport {
    double quantile = 0.0;
    double threshold = 0.0;
    double max_scale = 0.0;
    std::size_t analysed_cells = 0;
    std::vector<HotspotRegion> regions; ///< sorted by peak power, largest first
};

struct RidgeRun {
    std::size_t begin = 0; ///< inclusive time index
    std::size_t end = 0;   ///< inclusive time index
    double median_scale_index = 0.0;
    double dispersion = 0.0; ///< interquartile range of the run's scale indices

    std::size_t length() const noexcept { return end - begin + 1; }
};

struct RidgeReport {
    static constexpr long no_ridge = -1;

    std::vector<long> argmax;    ///< per time index; no_ridge where no cell is inside the COI
    std::vector<RidgeRun> runs;  ///< in time order
    std::size_t min_run = 0;
    long tolerance = 1;          ///< allowed distance from the run median, in voices
};

inline constexpr double default_hotspot_quantile = 0.95;
inline constexpr double default_hotspot_max_frequency = 1.0 / 8.0;
inline constexpr std::size_t default_ridge_min_run = 16;

namespace detail {

/// Linear-interpolated quantile of a sorted sample.
inline double sorted_quantile(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median_of(std::vector<long> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return 0.5 * static_cast<double>(v[(m - 1) / 2] + v[m / 2]);
}

inline double iqr_of(std::vector<long> v)
{
    std::vector<double> d(v.begin(), v.end());
    std::sort(d.begin(), d.end());
    return sorted_quantile(d, 0.75) - sorted_quantile(d, 0.25);
}

} // namespace detail

/// Maximal 4-connected groups of in-COI cells at scales <= max_scale whose
/// power strictly exceeds the q-quantile of that same cell population.
inline HotspotReport detect_hotspots(const PowerSpectrum& p, double q, double max_scale)
{
    if (!(q > 0.0 && q < 1.0))
        throw DomainError("detect_hotspots: quantile must lie in (0, 1)");
    const std::size_t rows = p.values.rows();
    const std::size_t cols = p.values.cols();
    auto eligible = [&](std::size_t j, std::size_t k) { return p.grid[j] <= max_scale && p.in_coi(j, k); };

    std::vector<double> sample;
    for (std::size_t j = 0; j < rows; ++j)
        for (std::size_t k = 0; k < cols; ++k)
            if (eligible(j, k))
                sample.push_back(p.values(j, k));
    if (sample.empty())
        throw InputError("detect_hotspots: no cells inside the cone of influence at scales <= "
                         + format_shortest(max_scale));
    std::sort(sample.begin(), sample.end());

    HotspotReport report;
    report.quantile = q;
    report.threshold = detail::sorted_quantile(sample, q);
    report.max_scale = max_scale;
    report.analysed_cells = sample.size();

    Matrix<std::uint8_t> seen(rows, cols, 0);
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t j0 = 0; j0 < rows; ++j0) {
        for (std::size_t k0 = 0; k0 < cols; ++k0) {
            if (seen(j0, k0) || !eligible(j0, k0) || !(p.values(j0, k0) > report.threshold))
                continue;
            HotspotRegion region{k0, k0, j0, j0, k0, j0, p.values(j0, k0), 0.0, 0};
            stack.assign(1, {j0, k0});
            seen(j0, k0) = 1;
            while (!stack.empty()) {
                const auto [j, k] = stack.back();
                stack.pop_back();
                ++region.cells;
                region.time_begin = std::min(region.time_begin, k);
                region.time_end = std::max(region.time_end, k);
                region.scale_begin = std::min(region.scale_begin, j);
                region.scale_end = std::max(region.scale_end, j);
                const double v = p.values(j, k);
                if (v > region.peak_power || (v == region.peak_power && std::pair(k, j) < std::pair(region.peak_time, region.peak_scale))) {
                    region.peak_power = v;
                    region.peak_time = k;
                    region.peak_scale = j;
                }
                auto visit = [&](std::size_t jj, std::size_t kk) {
                    if (!seen(jj, kk) && eligible(jj, kk) && p.values(jj, kk) > report.threshold) {
                        seen(jj, kk) = 1;
                        stack.emplace_back(jj, kk);
                    }
                };
                if (j > 0) visit(j - 1, k);
                if (j + 1 < rows) visit(j + 1, k);
                if (k > 0) visit(j, k - 1);
                if (k + 1 < cols) visit(j, k + 1);
            }
            const auto upto = std::upper_bound(sample.begin(), sample.end(), region.peak_power);
            region.quantile_rank = static_cast<double>(upto - sample.begin()) / static_cast<double>(sample.size());
            report.regions.push_back(region);
        }
    }
    std::stable_sort(report.regions.begin(), report.regions.end(),
                     [](const HotspotRegion& a, const HotspotRegion& b) { return a.peak_power > b.peak_power; });
    return report;
}

/// Scale at which a frequency threshold (cycles per unit of dt) is met.
inline double hotspot_scale_ceiling(const MotherWavelet& w, double min_frequency, double dt)
{
    return frequency_to_scale(w, min_frequency, dt);
}

/// Ceiling for the high-frequency band of a concrete grid. When the frequency
/// threshold lies above everything the grid resolves (cmor1.5-1.0 at s0 = 2dt
/// tops out near 0.08 cycles per sample), the bottom octave stands in for it.
inline double hotspot_band_ceiling(const ScaleGrid& grid, const MotherWavelet& w, double min_frequency, double dt)
{
    const double wanted = hotspot_scale_ceiling(w, min_frequency, dt);
    if (grid.count() == 0 || wanted >= grid[0])
        return wanted;
    const auto top = std::min<std::size_t>(grid.count() - 1, static_cast<std::size_t>(std::max(grid.voices_per_octave(), 1)));
    return grid[top];
}

/// Per-time in-COI power argmax and the persistent runs it forms.
///
/// A run is grown sample by sample while every member stays within
/// `tolerance` voices of the median of the run; a run is reported when it
/// reaches `min_run` samples. Time indices without any in-COI cell break runs.
inline RidgeReport detect_ridges(const PowerSpectrum& p, std::size_t min_run, long tolerance = 1)
{
    if (min_run < 2)
        throw DomainError("detect_ridges: minimum run length must be >= 2");
    const std::size_t rows = p.values.rows();
    const std::size_t cols = p.values.cols();

    RidgeReport report;
    report.min_run = min_run;
    report.tolerance = tolerance;
    report.argmax.assign(cols, RidgeReport::no_ridge);
    for (std::size_t k = 0; k < cols; ++k) {
        double best = -1.0;
        for (std::size_t j = 0; j < rows; ++j) {
            if (!p.in_coi(j, k))
                continue;
            if (p.values(j, k) > best) {
                best = p.values(j, k);
                report.argmax[k] = static_cast<long>(j);
            }
        }
    }

    auto fits = [&](const std::vector<long>& members) {
        const double med = detail::median_of(members);
        return std::all_of(members.begin(), members.end(),
                           [&](long v) { return std::abs(static_cast<double>(v) - med) <= static_cast<double>(tolerance); });
    };

    std::size_t k = 0;
    while (k < cols) {
        if (report.argmax[k] == RidgeReport::no_ridge) {
            ++k;
            continue;
        }
        std::vector<long> members{report.argmax[k]};
        std::size_t end = k;
        while (end + 1 < cols && report.argmax[end + 1] != RidgeReport::no_ridge) {
            members.push_back(report.argmax[end + 1]);
            if (!fits(members)) {
                members.pop_back();
                break;
            }
            ++end;
        }
        if (members.size() >= min_run)
            report.runs.push_back({k, end, detail::median_of(members), detail::iqr_of(members)});
        k = end + 1;
    }
    return report;
}

} // namespace wavescope

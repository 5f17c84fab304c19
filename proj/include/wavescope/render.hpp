#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "font.hpp"
#include "ingest.hpp"
#include "matrix.hpp"
#include "matrix_io.hpp"
#include "png.hpp"

namespace wavescope {

/// BlueRed runs dark blue -> red -> pale yellow; both maps increase monotonically in luminance.
enum class ColorMap { BlueRed, Gray };

struct HeatmapSpec {
    MatrixAxes axes;
    std::optional<std::vector<double>> coi; ///< per-column max trusted scale; cells above it are hatched
    std::string title;
    std::string frequency_unit = "cycles/day";
};

struct RenderOptions {
    int plot_width = 720;
    int plot_height = 360;
    ColorMap color_map = ColorMap::BlueRed;
};

namespace detail {

inline std::array<std::uint8_t, 3> lerp_rgb(std::array<double, 3> a, std::array<double, 3> b, double t)
{
    std::array<std::uint8_t, 3> out{};
    for (int i = 0; i < 3; ++i)
        out[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(std::lround(a[static_cast<std::size_t>(i)] + t * (b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)])));
    return out;
}

inline std::array<std::uint8_t, 3> colormap(ColorMap cmap, double t)
{
    t = std::clamp(t, 0.0, 1.0);
    if (cmap == ColorMap::Gray) {
        const auto v = static_cast<std::uint8_t>(std::lround(255.0 * t));
        return {v, v, v};
    }
    static constexpr std::array<std::array<double, 3>, 6> stops{{{10, 20, 90},
                                                                 {40, 60, 200},
                                                                 {150, 50, 170},
                                                                 {235, 50, 40},
                                                                 {255, 150, 40},
                                                                 {255, 240, 170}}};
    const double pos = t * static_cast<double>(stops.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), stops.size() - 2);
    return lerp_rgb(stops[i], stops[i + 1], pos - static_cast<double>(i));
}

inline std::array<std::uint8_t, 3> blend(std::array<std::uint8_t, 3> c, std::array<std::uint8_t, 3> with, double a)
{
    return lerp_rgb({double(c[0]), double(c[1]), double(c[2])}, {double(with[0]), double(with[1]), double(with[2])}, a);
}

inline std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace detail

/// Rasterizes a (scale x time) matrix: time on x, smallest scale (highest
/// frequency) on the bottom row, frequency tick labels on the left, a
/// colour bar on the right. Cells outside the cone of influence are hatched.
inline Image render_heatmap_image(const Matrix<double>& values, const HeatmapSpec& spec, const RenderOptions& opts = {})
{
    if (values.empty())
        throw InputError("render_heatmap: empty matrix");
    for (double v : values.data())
        if (!std::isfinite(v))
            throw NumericalError("render_heatmap: matrix contains a non-finite value");
    const auto rows = values.rows();
    const auto cols = values.cols();
    if (spec.axes.frequencies.size() != rows || spec.axes.time_labels.size() != cols)
        throw InputError("render_heatmap: axes do not match the matrix");
    if (spec.coi && spec.coi->size() != cols)
        throw InputError("render_heatmap: cone of influence length does not match the matrix");
    if (spec.coi && spec.axes.scales.size() != rows)
        throw InputError("render_heatmap: a cone of influence needs one scale per row");

    const auto [lo_it, hi_it] = std::minmax_element(values.data().begin(), values.data().end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;

    constexpr int left = 64, right = 64, top = 22, bottom = 34;
    const int pw = std::max(opts.plot_width, 2);
    const int ph = std::max(opts.plot_height, 2);
    Image img(left + pw + right, top + ph + bottom);
    const std::array<std::uint8_t, 3> black{0, 0, 0};

    for (int y = 0; y < ph; ++y) {
        const auto j = std::min(rows - 1, static_cast<std::size_t>((ph - 1 - y) * static_cast<long>(rows) / ph));
        for (int x = 0; x < pw; ++x) {
            const auto k = std::min(cols - 1, static_cast<std::size_t>(x * static_cast<long>(cols) / pw));
            const double t = span > 0.0 ? (values(j, k) - lo) / span : 0.5;
            auto color = detail::colormap(opts.color_map, t);
            if (spec.coi && spec.axes.scales[j] > (*spec.coi)[k])
                color = (x + y) % 6 < 2 ? detail::blend(color, {255, 255, 255}, 0.6)
                                        : detail::blend(color, {128, 128, 128}, 0.35);
            img.set(left + x, top + y, color);
        }
    }

    // frame
    for (int x = -1; x <= pw; ++x) {
        img.set(left + x, top - 1, black);
        img.set(left + x, top + ph, black);
    }
    for (int y = -1; y <= ph; ++y) {
        img.set(left - 1, top + y, black);
        img.set(left + pw, top + y, black);
    }

    // frequency ticks; rows are log-spaced in frequency
    const int yticks = static_cast<int>(std::min<std::size_t>(rows, 6));
    for (int i = 0; i < yticks; ++i) {
        const std::size_t j = yticks == 1 ? 0 : static_cast<std::size_t>(i) * (rows - 1) / static_cast<std::size_t>(yticks - 1);
        const int y = top + ph - 1 - static_cast<int>((static_cast<double>(j) + 0.5) * ph / static_cast<double>(rows));
        for (int d = 1; d <= 4; ++d)
            img.set(left - 1 - d, y, black);
        const auto label = detail::tick_label(spec.axes.frequencies[j]);
        detail::draw_text(img, left - 7 - detail::text_width(label), y - 3, label);
    }

    // time ticks
    const int xticks = static_cast<int>(std::min<std::size_t>(cols, 5));
    for (int i = 0; i < xticks; ++i) {
        const std::size_t k = xticks == 1 ? 0 : static_cast<std::size_t>(i) * (cols - 1) / static_cast<std::size_t>(xticks - 1);
        const int x = left + static_cast<int>((static_cast<double>(k) + 0.5) * pw / static_cast<double>(cols));
        for (int d = 1; d <= 4; ++d)
            img.set(x, top + ph + d, black);
        const auto& label = spec.axes.time_labels[k];
        const int w = detail::text_width(label);
        detail::draw_text(img, std::clamp(x - w / 2, 0, std::max(0, left + pw + 6 - w)), top + ph + 7, label);
    }
    detail::draw_text(img, left + pw / 2 - detail::text_width("time") / 2, top + ph + 20, "time");
    detail::draw_text(img, 2, 4, spec.frequency_unit);
    detail::draw_text(img, left + pw / 2 - detail::text_width(spec.title) / 2, 8, spec.title);

    // colour bar
    const int bx = left + pw + 10;
    for (int y = 0; y < ph; ++y) {
        const auto c = detail::colormap(opts.color_map, static_cast<double>(ph - 1 - y) / (ph - 1));
        for (int x = 0; x < 12; ++x)
            img.set(bx + x, top + y, c);
    }
    detail::draw_text(img, bx, top - 10, detail::tick_label(*hi_it));
    detail::draw_text(img, bx, top + ph + 4, detail::tick_label(lo));
    return img;
}

/// Renders and writes a PNG. Identical input and options give identical bytes.
/// Non-finite entries are rejected before anything touches the filesystem.
inline void render_heatmap(const Matrix<double>& values, const HeatmapSpec& spec, const std::filesystem::path& out,
                           const RenderOptions& opts = {})
{
    const auto bytes = encode_png(render_heatmap_image(values, spec, opts));
    write_file_atomic(out, bytes);
}

} // namespace wavescope

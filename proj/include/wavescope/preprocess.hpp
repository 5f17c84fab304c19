#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "error.hpp"
#include "series.hpp"

namespace wavescope {

/// returns[i] = ln(prices[i+1] / prices[i]), dated at the later close.
///
/// Consecutive entries are consecutive *available* closes; calendar gaps
/// are not adjusted for.
inline ReturnSeries log_returns(const PriceSeries& p)
{
    if (p.size() < 2)
        throw InputError("log_returns: '" + p.symbol() + "' needs at least 2 prices, got "
                         + std::to_string(p.size()));
    ReturnSeries out{p.symbol(), {}, {}};
    out.timestamps.reserve(p.size() - 1);
    out.returns.reserve(p.size() - 1);
    const auto& px = p.prices();
    for (std::size_t i = 1; i < px.size(); ++i) {
        out.timestamps.push_back(p.timestamps()[i]);
        out.returns.push_back(std::log(px[i] / px[i - 1]));
    }
    return out;
}

/// Restricts both series to their common dates (inner join), order preserved.
inline std::pair<PriceSeries, PriceSeries> align(const PriceSeries& a, const PriceSeries& b)
{
    std::vector<Date> ta, tb;
    std::vector<double> pa, pb;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const Date da = a.timestamps()[i];
        const Date db = b.timestamps()[j];
        if (da < db) {
            ++i;
        } else if (db < da) {
            ++j;
        } else {
            ta.push_back(da);
            tb.push_back(db);
            pa.push_back(a.prices()[i++]);
            pb.push_back(b.prices()[j++]);
        }
    }
    if (ta.empty())
        throw InputError("align: '" + a.symbol() + "' and '" + b.symbol() + "' share no dates");
    return {PriceSeries(a.symbol(), std::move(ta), std::move(pa)), PriceSeries(b.symbol(), std::move(tb), std::move(pb))};
}

} // namespace wavescope

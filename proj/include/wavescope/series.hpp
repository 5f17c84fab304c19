#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "date.hpp"
#include "error.hpp"
#include "text.hpp"

namespace wavescope {

/// Daily closes for one instrument: strictly increasing dates, positive prices.
class PriceSeries {
public:
    PriceSeries() = default;

    PriceSeries(std::string symbol, std::vector<Date> timestamps, std::vector<double> prices)
        : symbol_(std::move(symbol)), timestamps_(std::move(timestamps)), prices_(std::move(prices))
    {
        if (timestamps_.size() != prices_.size())
            throw InputError("price series '" + symbol_ + "': " + std::to_string(timestamps_.size())
                             + " timestamps but " + std::to_string(prices_.size()) + " prices");
        for (std::size_t i = 0; i < prices_.size(); ++i) {
            if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i]))
                throw InputError("price series '" + symbol_ + "': non-positive price " + format_shortest(prices_[i])
                                 + " on " + timestamps_[i].iso());
            if (i > 0 && !(timestamps_[i - 1] < timestamps_[i]))
                throw InputError("price series '" + symbol_ + "': timestamps not strictly increasing at "
                                 + timestamps_[i].iso());
        }
    }

    const std::string& symbol() const noexcept { return symbol_; }
    const std::vector<Date>& timestamps() const noexcept { return timestamps_; }
    const std::vector<double>& prices() const noexcept { return prices_; }
    std::size_t size() const noexcept { return prices_.size(); }
    bool empty() const noexcept { return prices_.empty(); }

    bool operator==(const PriceSeries&) const = default;

private:
    std::string symbol_;
    std::vector<Date> timestamps_;
    std::vector<double> prices_;
};

/// Log returns; timestamps[i] is the date of the later close in each pair.
struct ReturnSeries {
    std::string symbol;
    std::vector<Date> timestamps;
    std::vector<double> returns;

    std::size_t size() const noexcept { return returns.size(); }
};

} // namespace wavescope

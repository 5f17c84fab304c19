#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <wavescope/wavescope.hpp>

namespace wavescope::testing {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sigma = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> x(n);
    for (auto& v : x)
        v = dist(rng);
    return x;
}

inline std::vector<double> cosine(std::size_t n, double cycles_per_sample, double phase = 0.0, double amplitude = 1.0)
{
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = amplitude * std::cos(2.0 * std::numbers::pi * cycles_per_sample * static_cast<double>(k) + phase);
    return x;
}

/// Largest |a - b| / |b| over in-COI cells.
inline double max_relative_deviation_in_coi(const WaveletSpectrum& a, const WaveletSpectrum& b)
{
    double worst = 0.0;
    for (std::size_t j = 0; j < b.grid.count(); ++j)
        for (std::size_t k = 0; k < b.length(); ++k)
            if (b.in_coi(j, k)) {
                const double denom = std::abs(b.coefficients(j, k));
                const double diff = std::abs(a.coefficients(j, k) - b.coefficients(j, k));
                worst = std::max(worst, denom > 0.0 ? diff / denom : diff);
            }
    return worst;
}

inline double mean_in_coi(const Matrix<double>& m, const std::vector<double>& coi, const ScaleGrid& grid)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < m.rows(); ++j)
        for (std::size_t k = 0; k < m.cols(); ++k)
            if (grid[j] <= coi[k]) {
                sum += m(j, k);
                ++count;
            }
    return count ? sum / static_cast<double>(count) : 0.0;
}

/// Row index maximizing the in-COI time average of power.
inline std::size_t time_averaged_argmax(const PowerSpectrum& p)
{
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t j = 0; j < p.grid.count(); ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < p.length(); ++k)
            if (p.in_coi(j, k)) {
                sum += p.values(j, k);
                ++count;
            }
        if (count > 0 && sum / static_cast<double>(count) > best_value) {
            best_value = sum / static_cast<double>(count);
            best = j;
        }
    }
    return best;
}

/// Scripted stand-in for a histoday-style endpoint.
///
/// Serves `limit` rows ending at the toTs day (inclusive). Records every
/// request and flags any that ask for more than `page_cap` rows.
class MockHistoryServer : public HttpTransport {
public:
    std::map<Date, double> data;                          ///< served for any fsym not in by_symbol
    std::map<std::string, std::map<Date, double>> by_symbol;
    std::set<Date> withheld;       ///< dates never served
    std::size_t page_cap = max_page_rows;
    int fail_first = 0;            ///< number of initial calls answered with HTTP 503

    struct Seen {
        std::string fsym;
        std::size_t limit = 0;
        std::int64_t to_ts = 0;
        bool has_api_key = false;
    };

    void fill(Date from, Date to, double start = 100.0, double growth = 1.001)
    {
        double p = start;
        for (Date d = from; !(to < d); d = d + 1) {
            data[d] = p;
            p *= growth;
        }
    }

    HttpResponse get(const HttpRequest& req) override
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        if (calls_ <= fail_first)
            return {503, "unavailable"};
        Seen s;
        s.fsym = req.param("fsym") ? *req.param("fsym") : "";
        s.limit = std::stoul(*req.param("limit"));
        s.to_ts = std::stoll(*req.param("toTs"));
        for (const auto& [k, v] : req.headers)
            if (k == "authorization")
                s.has_api_key = true;
        seen_.push_back(s);
        if (s.limit > page_cap) {
            cap_violated_ = true;
            return {400, R"({"Response":"Error","Message":"limit too large"})"};
        }
        const Date last = Date::from_epoch_seconds(s.to_ts);
        const auto own = by_symbol.find(s.fsym);
        const auto& table = own != by_symbol.end() ? own->second : data;
        nlohmann::json rows = nlohmann::json::array();
        for (Date d = last - static_cast<std::int64_t>(s.limit) + 1; !(last < d); d = d + 1) {
            auto it = table.find(d);
            if (it == table.end() || withheld.count(d))
                continue;
            rows.push_back({{"time", d.epoch_seconds()}, {"close", it->second}, {"open", it->second}});
        }
        nlohmann::json doc{{"Response", "Success"}, {"Data", {{"Data", rows}}}};
        return {200, doc.dump()};
    }

    std::vector<Seen> requests() const
    {
        std::lock_guard lock(mutex_);
        return seen_;
    }
    int calls() const
    {
        std::lock_guard lock(mutex_);
        return calls_;
    }
    bool cap_violated() const
    {
        std::lock_guard lock(mutex_);
        return cap_violated_;
    }

private:
    mutable std::mutex mutex_;
    std::vector<Seen> seen_;
    int calls_ = 0;
    bool cap_violated_ = false;
};

/// Geometric random walk of daily closes, one per date.
inline std::map<Date, double> random_walk_closes(const std::vector<Date>& dates, std::uint64_t seed, double start,
                                                 double vol)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, vol);
    std::map<Date, double> out;
    double p = start;
    for (Date d : dates) {
        out[d] = p;
        p *= std::exp(step(rng));
    }
    return out;
}

inline std::vector<Date> every_day(Date from, Date to)
{
    std::vector<Date> out;
    for (Date d = from; !(to < d); d = d + 1)
        out.push_back(d);
    return out;
}

/// Monday to Friday only; 1970-01-01 was a Thursday.
inline std::vector<Date> weekdays(Date from, Date to)
{
    std::vector<Date> out;
    for (Date d = from; !(to < d); d = d + 1)
        if (const auto dow = (d.epoch_days() + 3) % 7; dow < 5)
            out.push_back(d);
    return out;
}

/// FRED download layout: DATE,<series>, ascending, "." on the first of each month as a holiday.
inline void write_fred_csv(const std::filesystem::path& path, const std::string& series,
                           const std::map<Date, double>& closes)
{
    std::ofstream out(path, std::ios::binary);
    out << "DATE," << series << "\n";
    for (const auto& [d, p] : closes) {
        const auto ymd = std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{d.epoch_days()}}};
        out << d.iso() << "," << (static_cast<unsigned>(ymd.day()) == 1 ? std::string(".") : format_shortest(p)) << "\n";
    }
}

/// investing.com layout: newest first, US dates, quoted thousands-separated prices.
inline void write_investing_csv(const std::filesystem::path& path, const std::map<Date, double>& closes)
{
    std::ofstream out(path, std::ios::binary);
    out << "\"Date\",\"Price\",\"Open\",\"High\",\"Low\",\"Vol.\",\"Change %\"\n";
    for (auto it = closes.rbegin(); it != closes.rend(); ++it) {
        const auto ymd = std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{it->first.epoch_days()}}};
        char date[16];
        std::snprintf(date, sizeof date, "%02u/%02u/%04d", static_cast<unsigned>(ymd.month()),
                      static_cast<unsigned>(ymd.day()), static_cast<int>(ymd.year()));
        const double p = std::round(it->second * 100.0) / 100.0;
        const auto whole = static_cast<long long>(p);
        const auto cents = static_cast<int>(std::llround((p - static_cast<double>(whole)) * 100.0));
        std::string digits = std::to_string(whole);
        for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3)
            digits.insert(static_cast<std::size_t>(i), ",");
        char price[64];
        std::snprintf(price, sizeof price, "%s.%02d", digits.c_str(), cents);
        out << '"' << date << "\",\"" << price << "\",\"" << price << "\",\"" << price << "\",\"" << price
            << "\",\"\",\"0.00%\"\n";
    }
}

/// Seven instruments of the study window: three from the history API, four from CSV
/// exports written into `dir`. Returns the config JSON (without output/cache dirs).
inline nlohmann::json seven_instrument_config(const std::filesystem::path& dir, MockHistoryServer& server, Date from,
                                              Date to)
{
    const auto days = every_day(from - 10, to + 10);
    const auto week = weekdays(from - 10, to + 10);
    server.by_symbol["BTC"] = random_walk_closes(days, 1, 2500.0, 0.04);
    server.by_symbol["ETH"] = random_walk_closes(days, 2, 250.0, 0.05);
    server.by_symbol["XRP"] = random_walk_closes(days, 3, 0.25, 0.06);
    write_fred_csv(dir / "SP500.csv", "SP500", random_walk_closes(week, 4, 2450.0, 0.012));
    write_investing_csv(dir / "XAU_USD.csv", random_walk_closes(week, 5, 1215.0, 0.008));
    write_fred_csv(dir / "DEXJPUS.csv", "DEXJPUS", random_walk_closes(week, 6, 113.0, 0.005));
    write_fred_csv(dir / "DEXUSEU.csv", "DEXUSEU", random_walk_closes(week, 7, 1.14, 0.005));

    nlohmann::json instruments = nlohmann::json::array();
    for (const char* base : {"BTC", "ETH", "XRP"})
        instruments.push_back({{"source", "cryptocompare"}, {"base", base}, {"quote", "USD"}});
    instruments.push_back({{"source", "csv"}, {"name", "S&P500"}, {"path", (dir / "SP500.csv").string()},
                           {"schema", {{"preset", "fred"}, {"price_column", "SP500"}}}});
    instruments.push_back({{"source", "csv"}, {"name", "GOLD/USD"}, {"path", (dir / "XAU_USD.csv").string()},
                           {"schema", "investing"}});
    instruments.push_back({{"source", "csv"}, {"name", "JPY/USD"}, {"path", (dir / "DEXJPUS.csv").string()},
                           {"schema", {{"preset", "fred"}, {"price_column", "DEXJPUS"}}}});
    instruments.push_back({{"source", "csv"}, {"name", "USD/EUR"}, {"path", (dir / "DEXUSEU.csv").string()},
                           {"schema", {{"preset", "fred"}, {"price_column", "DEXUSEU"}}}});
    return {{"window", {{"from", from.iso()}, {"to", to.iso()}}},
            {"endpoint", "mock://histoday"},
            {"wavelets", {"morl", "cmor1.5-1.0"}},
            {"instruments", instruments}};
}

inline RetryPolicy no_sleep_retry()
{
    RetryPolicy r;
    r.sleep = [](std::chrono::milliseconds) {};
    return r;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("wavescope-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace wavescope::testing

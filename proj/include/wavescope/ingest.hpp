#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "date.hpp"
#include "error.hpp"
#include "log.hpp"
#include "series.hpp"
#include "text.hpp"

namespace wavescope {

// ---------------------------------------------------------------------------
// CSV sources
// ---------------------------------------------------------------------------

enum class DecimalStyle { Plain, ThousandsSeparated };
enum class RowOrder { Ascending, Descending };

struct CsvSchema {
    std::string date_column = "DATE";
    std::string price_column = "close";
    std::string date_format = "%Y-%m-%d";
    DecimalStyle decimal_style = DecimalStyle::Plain;
    RowOrder order = RowOrder::Ascending;

    /// FRED series download: ISO dates, "." for missing observations.
    static CsvSchema fred(std::string series_id, std::string date_column = "DATE")
    {
        return {std::move(date_column), std::move(series_id), "%Y-%m-%d", DecimalStyle::Plain, RowOrder::Ascending};
    }

    /// investing.com historical-data export: newest first, "1,234.56" prices.
    static CsvSchema investing()
    {
        return {"Date", "Price", "%m/%d/%Y", DecimalStyle::ThousandsSeparated, RowOrder::Descending};
    }

    /// The cache file layout written by cache_put().
    static CsvSchema cache() { return {"date", "close", "%Y-%m-%d", DecimalStyle::Plain, RowOrder::Ascending}; }
};

struct CsvLoadResult {
    PriceSeries series;
    std::size_t dropped_rows = 0; ///< rows with a missing-price placeholder
};

namespace detail {
inline bool is_missing_price(std::string_view s)
{
    return s.empty() || s == "." || s == "-" || s == "NA" || s == "N/A" || s == "null";
}
} // namespace detail

/// Parses CSV text under `schema`. Row numbers in errors are 1-based file lines.
inline CsvLoadResult parse_price_csv(std::istream& in, const CsvSchema& schema, const std::string& symbol,
                                     const std::string& origin = "<csv>")
{
    if (schema.date_column == schema.price_column)
        throw ParseError(origin + ": date and price columns must differ");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty())
        throw ParseError(origin + ": empty file");
    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name)
                return i;
        throw ParseError(origin + ": row " + std::to_string(line_no) + ": unknown column '" + name + "'");
    };
    const std::size_t date_idx = column(schema.date_column);
    const std::size_t price_idx = column(schema.price_column);

    std::vector<Date> dates;
    std::vector<double> prices;
    std::size_t dropped = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() <= std::max(date_idx, price_idx))
            throw ParseError(origin + ": row " + std::to_string(line_no) + ": expected at least "
                             + std::to_string(std::max(date_idx, price_idx) + 1) + " fields");
        const auto date_text = trim(fields[date_idx]);
        auto date = Date::parse(date_text, schema.date_format);
        if (!date)
            throw ParseError(origin + ": row " + std::to_string(line_no) + ": cannot parse date '"
                             + std::string(date_text) + "' with format '" + schema.date_format + "'");
        std::string price_text(trim(fields[price_idx]));
        if (detail::is_missing_price(price_text)) {
            ++dropped;
            continue;
        }
        if (schema.decimal_style == DecimalStyle::ThousandsSeparated)
            std::erase(price_text, ',');
        const auto price = parse_double(price_text);
        if (!price || !std::isfinite(*price))
            throw ParseError(origin + ": row " + std::to_string(line_no) + ": cannot parse price '"
                             + std::string(trim(fields[price_idx])) + "'");
        if (*price <= 0.0)
            throw ParseError(origin + ": row " + std::to_string(line_no) + ": non-positive price "
                             + format_shortest(*price));
        dates.push_back(*date);
        prices.push_back(*price);
    }
    if (schema.order == RowOrder::Descending) {
        std::reverse(dates.begin(), dates.end());
        std::reverse(prices.begin(), prices.end());
    }
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i]))
            throw ParseError(origin + ": dates are not strictly "
                             + std::string(schema.order == RowOrder::Ascending ? "ascending" : "descending")
                             + " near " + dates[i].iso());
    if (dropped > 0)
        log_info(origin + ": dropped " + std::to_string(dropped) + " row(s) with missing price");
    return {PriceSeries(symbol, std::move(dates), std::move(prices)), dropped};
}

inline CsvLoadResult load_csv_detailed(const std::filesystem::path& path, const CsvSchema& schema,
                                       std::string symbol = {})
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    if (symbol.empty())
        symbol = path.stem().string();
    return parse_price_csv(in, schema, symbol, path.string());
}

inline PriceSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::string symbol = {})
{
    return load_csv_detailed(path, schema, std::move(symbol)).series;
}

// ---------------------------------------------------------------------------
// HTTP history API
// ---------------------------------------------------------------------------

struct HttpRequest {
    std::string url;
    std::vector<std::pair<std::string, std::string>> query;
    std::vector<std::pair<std::string, std::string>> headers;

    const std::string* param(std::string_view key) const
    {
        for (const auto& [k, v] : query)
            if (k == key)
                return &v;
        return nullptr;
    }
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Outgoing GET requests. Implementations throw TransportError on connection failure.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const HttpRequest& request) = 0;
};

inline constexpr const char* default_history_endpoint = "https://min-api.cryptocompare.com/data/v2/histoday";
inline constexpr std::size_t max_page_rows = 2000;
inline constexpr const char* api_key_env = "WAVESCOPE_API_KEY";

struct FetchSpec {
    std::string base_symbol;
    std::string quote_symbol = "USD";
    Date from_date;
    Date to_date;
    std::string endpoint = default_history_endpoint;
    std::string api_key; ///< sent as a header; never part of cache keys

    std::string pair() const { return base_symbol + "/" + quote_symbol; }

    /// API key from WAVESCOPE_API_KEY, or empty.
    static std::string api_key_from_env()
    {
        const char* v = std::getenv(api_key_env);
        return v ? std::string(v) : std::string();
    }
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_delay{500};
    std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
    };
};

namespace detail {

struct HistoryRow {
    Date date;
    double close = 0.0;
};

inline HttpResponse get_with_retry(HttpTransport& transport, const HttpRequest& req, const RetryPolicy& retry)
{
    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, retry.attempts); ++attempt) {
        if (attempt > 0 && retry.sleep)
            retry.sleep(retry.base_delay * (1 << (attempt - 1)));
        HttpResponse resp;
        try {
            resp = transport.get(req);
        } catch (const TransportError& e) {
            resp.status = 0;
            last_error = e.what();
        }
        if (resp.status == 200)
            return resp;
        if (resp.status != 0)
            last_error = "HTTP status " + std::to_string(resp.status);
        // A malformed request stays malformed; only rate limits are worth another try.
        if (resp.status >= 400 && resp.status < 500 && resp.status != 429)
            throw TransportError("request to " + req.url + " rejected with " + last_error + ": "
                                 + resp.body.substr(0, 200));
        log_warning("request to " + req.url + " failed (attempt " + std::to_string(attempt + 1) + "): " + last_error);
    }
    throw TransportError("giving up on " + req.url + " after " + std::to_string(std::max(1, retry.attempts))
                         + " attempts: " + last_error);
}

/// Accepts {"Data": {"Data": [...]}}, {"Data": [...]} or a bare array of {time, close}.
inline std::vector<HistoryRow> parse_history_page(const std::string& body)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("history response is not JSON: ") + e.what());
    }
    if (doc.is_object() && doc.value("Response", std::string()) == "Error")
        throw TransportError("history API error: " + doc.value("Message", std::string("(no message)")));
    const nlohmann::json* rows = &doc;
    if (doc.is_object() && doc.contains("Data")) {
        rows = &doc["Data"];
        if (rows->is_object() && rows->contains("Data"))
            rows = &(*rows)["Data"];
    }
    if (!rows->is_array())
        throw TransportError("history response has no row array");
    std::vector<HistoryRow> out;
    out.reserve(rows->size());
    for (const auto& r : *rows) {
        if (!r.is_object() || !r.contains("time") || !r.contains("close") || !r["time"].is_number()
            || !r["close"].is_number())
            throw TransportError("history row lacks numeric time/close: " + r.dump());
        out.push_back({Date::from_epoch_seconds(r["time"].get<std::int64_t>()), r["close"].get<double>()});
    }
    return out;
}

} // namespace detail

/// Pulls the daily-close window [from_date, to_date] page by page.
///
/// Pages ask for at most 2000 rows and walk backward from to_date using the
/// toTs cursor. Overlapping rows are deduplicated with the later-fetched page
/// winning. Any calendar day between the first and last served rows that no
/// page covers raises IntegrityError. Zero or negative closes (pre-listing
/// placeholders) are dropped and counted in the log.
inline PriceSeries fetch_daily_history(const FetchSpec& spec, HttpTransport& transport, const RetryPolicy& retry = {})
{
    if (spec.to_date < spec.from_date)
        throw DomainError("fetch: window " + spec.from_date.iso() + ".." + spec.to_date.iso() + " is empty");

    std::map<Date, double> rows;
    Date cursor = spec.to_date;
    while (!(cursor < spec.from_date)) {
        const auto wanted = static_cast<std::size_t>(cursor - spec.from_date + 1);
        const std::size_t limit = std::min(max_page_rows, wanted);
        HttpRequest req{spec.endpoint,
                        {{"fsym", spec.base_symbol},
                         {"tsym", spec.quote_symbol},
                         {"limit", std::to_string(limit)},
                         {"toTs", std::to_string(cursor.epoch_seconds())}},
                        {}};
        if (!spec.api_key.empty())
            req.headers.emplace_back("authorization", "Apikey " + spec.api_key);
        const auto page = detail::parse_history_page(detail::get_with_retry(transport, req, retry).body);

        std::optional<Date> earliest;
        for (const auto& r : page) {
            if (r.date < spec.from_date || spec.to_date < r.date)
                continue;
            rows[r.date] = r.close;
            if (!earliest || r.date < *earliest)
                earliest = r.date;
        }
        // Stop when the API has nothing older or the page made no progress.
        if (!earliest || cursor < *earliest)
            break;
        cursor = *earliest - 1;
    }
    if (rows.empty())
        throw InputError("fetch: no rows for " + spec.pair() + " in " + spec.from_date.iso() + ".." + spec.to_date.iso());

    std::vector<std::string> missing;
    for (auto it = rows.begin(), next = std::next(it); next != rows.end(); ++it, ++next)
        for (Date d = it->first + 1; d < next->first; d = d + 1)
            missing.push_back(d.iso());
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing)
            list += (list.empty() ? "" : ", ") + m;
        throw IntegrityError(missing, "fetch: pages for " + spec.pair() + " leave " + std::to_string(missing.size())
                                          + " missing date(s): " + list);
    }

    std::vector<Date> dates;
    std::vector<double> closes;
    std::size_t dropped = 0;
    for (const auto& [d, c] : rows) {
        if (!(c > 0.0)) {
            ++dropped;
            continue;
        }
        dates.push_back(d);
        closes.push_back(c);
    }
    if (dropped > 0)
        log_info("fetch " + spec.pair() + ": dropped " + std::to_string(dropped) + " row(s) with non-positive close");
    if (dates.empty())
        throw InputError("fetch: every row for " + spec.pair() + " has a non-positive close");
    return PriceSeries(spec.pair(), std::move(dates), std::move(closes));
}

// ---------------------------------------------------------------------------
// Local cache
// ---------------------------------------------------------------------------

struct CacheKey {
    std::string base_symbol;
    std::string quote_symbol;
    Date from_date;
    Date to_date;
    std::string source = "cryptocompare";

    std::string filename() const
    {
        std::string name = base_symbol + "-" + quote_symbol + "_" + from_date.iso() + "_" + to_date.iso() + "_" + source;
        for (auto& c : name)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
                c = '_';
        return name + ".csv";
    }

    std::string pair() const { return base_symbol + "/" + quote_symbol; }
};

/// Canonical cache text: header "date,close", ISO dates, shortest round-trip closes.
inline std::string series_to_csv(const PriceSeries& s)
{
    std::string out = "date,close\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out += s.timestamps()[i].iso() + "," + format_shortest(s.prices()[i]) + "\n";
    return out;
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path(), ec);
    const auto tag = std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(tag);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IoError("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move cache file into place at '" + path.string() + "'");
    }
}

inline std::filesystem::path cache_put(const PriceSeries& series, const std::filesystem::path& dir, const CacheKey& key)
{
    const auto path = dir / key.filename();
    write_file_atomic(path, series_to_csv(series));
    return path;
}

/// Returns the cached series, or nullopt on a miss. Unreadable or malformed
/// files (including a missing final newline) count as misses and log a warning.
inline std::optional<PriceSeries> cache_get(const CacheKey& key, const std::filesystem::path& dir)
{
    const auto path = dir / key.filename();
    std::error_code ec;
    if (!std::filesystem::exists(path, ec))
        return std::nullopt;
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        if (text.empty() || text.back() != '\n')
            throw ParseError("truncated (no final newline)");
        std::istringstream body(text);
        auto result = parse_price_csv(body, CsvSchema::cache(), key.pair(), path.string());
        if (result.dropped_rows > 0 || result.series.empty())
            throw ParseError("incomplete rows");
        return std::move(result.series);
    } catch (const Error& e) {
        log_warning("ignoring corrupt cache file '" + path.string() + "': " + e.what());
        return std::nullopt;
    }
}

} // namespace wavescope

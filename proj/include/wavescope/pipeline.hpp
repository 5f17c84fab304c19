#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cwt.hpp"
#include "detect.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "ingest.hpp"
#include "matrix_io.hpp"
#include "parallel.hpp"
#include "preprocess.hpp"
#include "render.hpp"
#include "spectra.hpp"
#include "wavelet.hpp"

namespace wavescope {

enum class InstrumentSource { HistoryApi, Csv };

struct InstrumentConfig {
    std::string name; ///< display name and pair reference, e.g. "BTC/USD"
    InstrumentSource source = InstrumentSource::HistoryApi;
    std::string base;  ///< history API only
    std::string quote = "USD";
    std::filesystem::path path; ///< CSV only
    CsvSchema schema;
};

/// Declarative description of a batch run, read from a JSON file.
struct PipelineConfig {
    std::filesystem::path output_dir = "wavescope-out";
    std::filesystem::path cache_dir = "wavescope-cache";
    Date from_date{2017, 7, 10};
    Date to_date{2022, 12, 31};
    std::string endpoint = default_history_endpoint;
    std::vector<std::string> wavelets{"morl"};
    double dt = 1.0;
    std::optional<double> s0; ///< defaults to 2 dt
    int voices = 12;
    double hotspot_quantile = default_hotspot_quantile;
    double hotspot_max_frequency = default_hotspot_max_frequency;
    std::size_t ridge_min_run = default_ridge_min_run;
    unsigned workers = 0;
    std::vector<InstrumentConfig> instruments;
    std::vector<std::pair<std::string, std::string>> pairs;
    nlohmann::json source; ///< the parsed document, hashed into the manifest
};

namespace detail {

inline CsvSchema parse_schema(const nlohmann::json& j)
{
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "investing")
            return CsvSchema::investing();
        if (name == "cache")
            return CsvSchema::cache();
        throw ParseError("config: unknown CSV schema preset '" + name + "'");
    }
    if (!j.is_object())
        throw ParseError("config: 'schema' must be a preset name or an object");
    CsvSchema s;
    if (j.contains("preset")) {
        const auto preset = j.at("preset").get<std::string>();
        if (preset == "fred")
            s = CsvSchema::fred(j.value("price_column", std::string("SP500")), j.value("date_column", std::string("DATE")));
        else if (preset == "investing")
            s = CsvSchema::investing();
        else if (preset == "cache")
            s = CsvSchema::cache();
        else
            throw ParseError("config: unknown CSV schema preset '" + preset + "'");
    }
    s.date_column = j.value("date_column", s.date_column);
    s.price_column = j.value("price_column", s.price_column);
    s.date_format = j.value("date_format", s.date_format);
    if (j.contains("decimal_style")) {
        const auto v = j.at("decimal_style").get<std::string>();
        if (v == "plain")
            s.decimal_style = DecimalStyle::Plain;
        else if (v == "thousands")
            s.decimal_style = DecimalStyle::ThousandsSeparated;
        else
            throw ParseError("config: decimal_style must be 'plain' or 'thousands'");
    }
    if (j.contains("order")) {
        const auto v = j.at("order").get<std::string>();
        if (v == "ascending")
            s.order = RowOrder::Ascending;
        else if (v == "descending")
            s.order = RowOrder::Descending;
        else
            throw ParseError("config: order must be 'ascending' or 'descending'");
    }
    return s;
}

inline Date parse_config_date(const nlohmann::json& j, const char* what)
{
    const auto text = j.get<std::string>();
    auto d = Date::parse_iso(text);
    if (!d)
        throw ParseError(std::string("config: cannot parse ") + what + " date '" + text + "'");
    return *d;
}

} // namespace detail

/// Builds a config from JSON. Relative paths resolve against `base_dir`.
inline PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {})
{
    PipelineConfig cfg;
    cfg.source = j;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    try {
        if (!j.is_object())
            throw ParseError("config: top level must be an object");
        if (j.contains("output_dir"))
            cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
        if (j.contains("cache_dir"))
            cfg.cache_dir = resolve(j.at("cache_dir").get<std::string>());
        if (j.contains("window")) {
            const auto& w = j.at("window");
            cfg.from_date = detail::parse_config_date(w.at("from"), "window.from");
            cfg.to_date = detail::parse_config_date(w.at("to"), "window.to");
        }
        cfg.endpoint = j.value("endpoint", cfg.endpoint);
        if (j.contains("wavelets"))
            cfg.wavelets = j.at("wavelets").get<std::vector<std::string>>();
        for (const auto& name : cfg.wavelets)
            (void)parse_wavelet_name(name);
        cfg.dt = j.value("dt", cfg.dt);
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            if (g.contains("s0"))
                cfg.s0 = g.at("s0").get<double>();
            cfg.voices = g.value("voices", cfg.voices);
        }
        if (j.contains("hotspots")) {
            cfg.hotspot_quantile = j.at("hotspots").value("quantile", cfg.hotspot_quantile);
            cfg.hotspot_max_frequency = j.at("hotspots").value("max_freq", cfg.hotspot_max_frequency);
        }
        if (j.contains("ridges"))
            cfg.ridge_min_run = j.at("ridges").value("min_run", cfg.ridge_min_run);
        cfg.workers = j.value("workers", cfg.workers);
        for (const auto& item : j.value("instruments", nlohmann::json::array())) {
            InstrumentConfig ic;
            const auto source = item.value("source", std::string("cryptocompare"));
            if (source == "cryptocompare" || source == "api") {
                ic.source = InstrumentSource::HistoryApi;
                ic.base = item.at("base").get<std::string>();
                ic.quote = item.value("quote", ic.quote);
                ic.name = item.value("name", ic.base + "/" + ic.quote);
            } else if (source == "csv") {
                ic.source = InstrumentSource::Csv;
                ic.path = resolve(item.at("path").get<std::string>());
                ic.schema = detail::parse_schema(item.at("schema"));
                ic.name = item.value("name", ic.path.stem().string());
            } else {
                throw ParseError("config: unknown instrument source '" + source + "'");
            }
            for (const auto& other : cfg.instruments)
                if (other.name == ic.name)
                    throw ParseError("config: duplicate instrument name '" + ic.name + "'");
            cfg.instruments.push_back(std::move(ic));
        }
        for (const auto& pair : j.value("pairs", nlohmann::json::array())) {
            const auto names = pair.get<std::vector<std::string>>();
            if (names.size() != 2)
                throw ParseError("config: each pair must name exactly two instruments");
            cfg.pairs.emplace_back(names[0], names[1]);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (cfg.to_date < cfg.from_date)
        throw ParseError("config: window.to precedes window.from");
    return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return parse_pipeline_config(j, path.parent_path());
}

struct ArtifactRecord {
    std::string path; ///< relative to the output directory
    std::string kind; ///< heatmap | matrix | hotspots | ridges | phase
    std::string subject;
    std::string wavelet;
    std::string sha256;
    std::vector<std::string> input_hashes;
};

struct FailureRecord {
    std::string subject;
    std::string stage;
    std::string message;
    ErrorKind kind = ErrorKind::Data;
};

struct PipelineResult {
    std::filesystem::path manifest;
    std::vector<ArtifactRecord> artifacts;
    std::vector<FailureRecord> failures;
};

/// Filesystem-safe token for artifact names: "BTC/USD" -> "BTC-USD".
inline std::string slug(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
            out += c;
        else if (c == '/' || c == ' ')
            out += '-';
        else if (c == '&')
            out += "and";
    }
    return out.empty() ? "unnamed" : out;
}

inline nlohmann::json to_json(const HotspotReport& r)
{
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& g : r.regions)
        regions.push_back({{"time_begin", g.time_begin},
                           {"time_end", g.time_end},
                           {"scale_begin", g.scale_begin},
                           {"scale_end", g.scale_end},
                           {"peak_time", g.peak_time},
                           {"peak_scale", g.peak_scale},
                           {"peak_power", g.peak_power},
                           {"quantile_rank", g.quantile_rank},
                           {"cells", g.cells}});
    return {{"quantile", r.quantile},
            {"threshold", r.threshold},
            {"max_scale", r.max_scale},
            {"analysed_cells", r.analysed_cells},
            {"regions", regions}};
}

inline nlohmann::json to_json(const RidgeReport& r)
{
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : r.runs)
        runs.push_back({{"begin", run.begin},
                        {"end", run.end},
                        {"median_scale_index", run.median_scale_index},
                        {"dispersion", run.dispersion}});
    return {{"min_run", r.min_run}, {"tolerance", r.tolerance}, {"argmax", r.argmax}, {"runs", runs}};
}

namespace detail {

struct SeriesSlot {
    std::optional<PriceSeries> series;
    std::optional<FailureRecord> failure;
};

struct TaskOutput {
    std::vector<ArtifactRecord> artifacts;
    std::optional<FailureRecord> failure;
};

inline FailureRecord failure_from(const std::string& subject, const std::string& stage, const std::exception& e)
{
    if (const auto* err = dynamic_cast<const Error*>(&e))
        return {subject, stage, err->what(), err->kind()};
    return {subject, stage, e.what(), ErrorKind::Numerical};
}

inline PriceSeries acquire_series(const InstrumentConfig& ic, const PipelineConfig& cfg, HttpTransport& transport,
                                  const RetryPolicy& retry)
{
    if (ic.source == InstrumentSource::Csv) {
        const auto full = load_csv(ic.path, ic.schema, ic.name);
        std::vector<Date> dates;
        std::vector<double> prices;
        for (std::size_t i = 0; i < full.size(); ++i) {
            const Date d = full.timestamps()[i];
            if (!(d < cfg.from_date) && !(cfg.to_date < d)) {
                dates.push_back(d);
                prices.push_back(full.prices()[i]);
            }
        }
        return PriceSeries(ic.name, std::move(dates), std::move(prices));
    }
    const CacheKey key{ic.base, ic.quote, cfg.from_date, cfg.to_date, "cryptocompare"};
    if (auto cached = cache_get(key, cfg.cache_dir))
        return PriceSeries(ic.name, cached->timestamps(), cached->prices());
    FetchSpec spec{ic.base, ic.quote, cfg.from_date, cfg.to_date, cfg.endpoint, FetchSpec::api_key_from_env()};
    auto series = fetch_daily_history(spec, transport, retry);
    cache_put(series, cfg.cache_dir, key);
    return PriceSeries(ic.name, series.timestamps(), series.prices());
}

class ArtifactWriter {
public:
    ArtifactWriter(const std::filesystem::path& root, std::string subject, std::string wavelet,
                   std::vector<std::string> inputs)
        : root_(root), subject_(std::move(subject)), wavelet_(std::move(wavelet)), inputs_(std::move(inputs))
    {}

    void write(const std::string& name, const std::string& kind, const std::string& bytes)
    {
        write_file_atomic(root_ / name, bytes);
        records_.push_back({name, kind, subject_, wavelet_, sha256_hex(bytes), inputs_});
    }

    std::vector<ArtifactRecord>& records() { return records_; }

private:
    std::filesystem::path root_;
    std::string subject_;
    std::string wavelet_;
    std::vector<std::string> inputs_;
    std::vector<ArtifactRecord> records_;
};

inline ScaleGrid pipeline_grid(const PipelineConfig& cfg, std::size_t n)
{
    return build_scale_grid(n, cfg.dt, cfg.s0.value_or(2.0 * cfg.dt), cfg.voices);
}

inline TaskOutput analyse_instrument(const InstrumentConfig& ic, const PriceSeries& series, const PipelineConfig& cfg)
{
    TaskOutput out;
    std::string stage = "preprocess";
    try {
        const auto returns = log_returns(series);
        const std::string input_hash = sha256_hex(series_to_csv(series));
        for (const auto& wname : cfg.wavelets) {
            const auto w = parse_wavelet_name(wname);
            const auto label = to_string(w);
            ArtifactWriter writer(cfg.output_dir, ic.name, label, {input_hash});
            const std::string base = slug(ic.name) + "_" + slug(label);

            stage = "cwt " + label;
            const auto grid = pipeline_grid(cfg, returns.size());
            const auto pw = power(cwt(returns.returns, w, grid, cfg.dt, {1}));
            const auto axes = spectrum_axes(grid, w, cfg.dt, pw.length(), returns.timestamps);

            stage = "export " + label;
            writer.write(base + "_power.csv", "matrix", matrix_to_csv(pw.values, axes));
            stage = "render " + label;
            writer.write(base + "_power.png", "heatmap",
                         encode_png(render_heatmap_image(pw.values, {axes, pw.coi, ic.name + " (" + label + ")"})));
            stage = "hotspots " + label;
            const auto hot = detect_hotspots(pw, cfg.hotspot_quantile,
                                             hotspot_band_ceiling(pw.grid, w, cfg.hotspot_max_frequency, cfg.dt));
            writer.write(base + "_hotspots.json", "hotspots", to_json(hot).dump(2) + "\n");
            stage = "ridges " + label;
            writer.write(base + "_ridges.json", "ridges", to_json(detect_ridges(pw, cfg.ridge_min_run)).dump(2) + "\n");
            std::move(writer.records().begin(), writer.records().end(), std::back_inserter(out.artifacts));
        }
    } catch (const std::exception& e) {
        out.failure = failure_from(ic.name, stage, e);
    }
    return out;
}

inline TaskOutput analyse_pair(const std::string& a_name, const PriceSeries& a, const std::string& b_name,
                               const PriceSeries& b, const PipelineConfig& cfg)
{
    TaskOutput out;
    const std::string subject = a_name + " vs " + b_name;
    std::string stage = "align";
    try {
        const auto [xa, xb] = align(a, b);
        const auto ra = log_returns(xa);
        const auto rb = log_returns(xb);
        const std::vector<std::string> inputs{sha256_hex(series_to_csv(a)), sha256_hex(series_to_csv(b))};
        for (const auto& wname : cfg.wavelets) {
            const auto w = parse_wavelet_name(wname);
            const auto label = to_string(w);
            ArtifactWriter writer(cfg.output_dir, subject, label, inputs);
            const std::string base = slug(a_name) + "__" + slug(b_name) + "_" + slug(label);

            stage = "coherence " + label;
            const auto grid = pipeline_grid(cfg, ra.size());
            const auto map = coherence(cwt(ra.returns, w, grid, cfg.dt, {1}), cwt(rb.returns, w, grid, cfg.dt, {1}));
            const auto axes = spectrum_axes(grid, w, cfg.dt, ra.size(), ra.timestamps);

            stage = "export " + label;
            writer.write(base + "_coherence.csv", "matrix", matrix_to_csv(map.r2, axes));
            writer.write(base + "_phase.csv", "phase", matrix_to_csv(map.phase, axes));
            stage = "render " + label;
            writer.write(base + "_coherence.png", "heatmap",
                         encode_png(render_heatmap_image(map.r2, {axes, map.coi, subject + " R2 (" + label + ")"})));
            std::move(writer.records().begin(), writer.records().end(), std::back_inserter(out.artifacts));
        }
    } catch (const std::exception& e) {
        out.failure = failure_from(subject, stage, e);
    }
    return out;
}

inline const char* kind_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Data: return "data";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Io: return "io";
    }
    return "data";
}

} // namespace detail

/// fetch-or-cache -> log returns -> CWT -> power -> PNG/CSV/reports per
/// instrument and wavelet; align -> coherence -> PNG/CSV per pair; then a
/// manifest. A failing instrument or pair is recorded and skipped.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, HttpTransport& transport, const RetryPolicy& retry = {})
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + cfg.output_dir.string() + "'");

    const auto& instruments = cfg.instruments;
    std::vector<detail::SeriesSlot> slots(instruments.size());
    parallel_for(instruments.size(), cfg.workers, [&](std::size_t i) {
        try {
            slots[i].series = detail::acquire_series(instruments[i], cfg, transport, retry);
        } catch (const std::exception& e) {
            slots[i].failure = detail::failure_from(instruments[i].name, "acquire", e);
        }
    });

    std::vector<detail::TaskOutput> instrument_out(instruments.size());
    parallel_for(instruments.size(), cfg.workers, [&](std::size_t i) {
        if (slots[i].series)
            instrument_out[i] = detail::analyse_instrument(instruments[i], *slots[i].series, cfg);
    });

    auto find = [&](const std::string& name) -> const detail::SeriesSlot* {
        for (std::size_t i = 0; i < instruments.size(); ++i)
            if (instruments[i].name == name)
                return &slots[i];
        return nullptr;
    };
    std::vector<detail::TaskOutput> pair_out(cfg.pairs.size());
    parallel_for(cfg.pairs.size(), cfg.workers, [&](std::size_t p) {
        const auto& [a, b] = cfg.pairs[p];
        const auto* sa = find(a);
        const auto* sb = find(b);
        if (!sa || !sb) {
            pair_out[p].failure = FailureRecord{a + " vs " + b, "config",
                                                "pair names an unknown instrument", ErrorKind::Usage};
        } else if (!sa->series || !sb->series) {
            pair_out[p].failure = FailureRecord{a + " vs " + b, "acquire",
                                                "an input instrument failed to load", ErrorKind::Data};
        } else {
            pair_out[p] = detail::analyse_pair(a, *sa->series, b, *sb->series, cfg);
        }
    });

    PipelineResult result;
    for (std::size_t i = 0; i < instruments.size(); ++i) {
        if (slots[i].failure)
            result.failures.push_back(*slots[i].failure);
        auto& o = instrument_out[i];
        std::move(o.artifacts.begin(), o.artifacts.end(), std::back_inserter(result.artifacts));
        if (o.failure)
            result.failures.push_back(*o.failure);
    }
    for (auto& o : pair_out) {
        std::move(o.artifacts.begin(), o.artifacts.end(), std::back_inserter(result.artifacts));
        if (o.failure)
            result.failures.push_back(*o.failure);
    }

    nlohmann::json artifacts = nlohmann::json::array();
    for (const auto& a : result.artifacts)
        artifacts.push_back({{"path", a.path},
                             {"kind", a.kind},
                             {"subject", a.subject},
                             {"wavelet", a.wavelet},
                             {"sha256", a.sha256},
                             {"inputs", a.input_hashes}});
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : result.failures)
        failures.push_back({{"subject", f.subject}, {"stage", f.stage}, {"kind", detail::kind_name(f.kind)}, {"error", f.message}});
    const nlohmann::json manifest{{"config_sha256", sha256_hex(cfg.source.dump())},
                                  {"window", {{"from", cfg.from_date.iso()}, {"to", cfg.to_date.iso()}}},
                                  {"wavelets", cfg.wavelets},
                                  {"artifacts", artifacts},
                                  {"failures", failures}};
    result.manifest = cfg.output_dir / "manifest.json";
    write_file_atomic(result.manifest, manifest.dump(2) + "\n");
    return result;
}

} // namespace wavescope

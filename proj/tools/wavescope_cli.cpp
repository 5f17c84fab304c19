#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <wavescope/http_transport.hpp>
#include <wavescope/wavescope.hpp>

namespace fs = std::filesystem;
using namespace wavescope;

namespace {

const CLI::Validator wavelet_name(
    [](std::string& name) {
        try {
            (void)parse_wavelet_name(name);
            return std::string();
        } catch (const Error& e) {
            return std::string(e.what());
        }
    },
    "WAVELET");

struct GridFlags {
    std::string wavelet = "morl";
    double dt = 1.0;
    std::optional<double> s0;
    int voices = 12;

    void attach(CLI::App* app)
    {
        app->add_option("--wavelet", wavelet, "mother wavelet: morl or cmor<delta>-<omega>")
            ->check(wavelet_name)
            ->capture_default_str();
        app->add_option("--dt", dt, "sampling interval in days")->capture_default_str();
        app->add_option("--s0", s0, "smallest scale (default 2*dt)");
        app->add_option("--voices", voices, "voices per octave")->capture_default_str();
    }

    ScaleGrid grid(std::size_t n) const { return build_scale_grid(n, dt, s0.value_or(2.0 * dt), voices); }
};

CsvSchema schema_from_flag(const std::string& flag)
{
    if (flag == "cache")
        return CsvSchema::cache();
    if (flag == "investing")
        return CsvSchema::investing();
    if (flag.starts_with("fred:"))
        return CsvSchema::fred(flag.substr(5));
    throw DomainError("unknown --schema '" + flag + "' (use cache, investing or fred:<SERIES>)");
}

void emit(const std::string& text, const std::string& out)
{
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_file_atomic(out, text);
}

PowerSpectrum load_power(const std::string& path, const std::string& wavelet, double dt)
{
    return power_from_import(import_matrix(path), parse_wavelet_name(wavelet), dt);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"wavescope: wavelet power, coherence and hotspot analysis of daily price series"};
    app.require_subcommand(1);

    // fetch
    std::string base, quote = "USD", from_text = "2017-07-10", to_text = "2022-12-31";
    std::string endpoint = default_history_endpoint, cache_dir = "wavescope-cache";
    auto* fetch = app.add_subcommand("fetch", "download daily closes into the cache (API key from WAVESCOPE_API_KEY)");
    fetch->add_option("--base", base, "base symbol, e.g. BTC")->required();
    fetch->add_option("--quote", quote, "quote symbol")->capture_default_str();
    fetch->add_option("--from", from_text, "first day, YYYY-MM-DD")->capture_default_str();
    fetch->add_option("--to", to_text, "last day, YYYY-MM-DD")->capture_default_str();
    fetch->add_option("--endpoint", endpoint, "histoday endpoint URL")->capture_default_str();
    fetch->add_option("--cache-dir", cache_dir, "cache directory")->capture_default_str();

    // cwt
    GridFlags cwt_flags;
    std::string input, schema = "cache", out, complex_mode;
    auto* cwt_cmd = app.add_subcommand("cwt", "log returns of a price CSV -> wavelet power matrix CSV");
    cwt_cmd->add_option("--input", input, "price CSV")->required();
    cwt_cmd->add_option("--schema", schema, "cache | investing | fred:<SERIES>")->capture_default_str();
    cwt_cmd->add_option("--out", out, "power CSV (stdout if omitted)");
    cwt_cmd->add_option("--coefficients", complex_mode, "also write coefficients next to --out: parts | modulus")
        ->check(CLI::IsMember({"parts", "modulus"}));
    cwt_flags.attach(cwt_cmd);

    // coherence
    GridFlags coh_flags;
    std::string other, other_schema;
    auto* coh = app.add_subcommand("coherence", "wavelet coherence of two price CSVs on their common dates");
    coh->add_option("--input", input, "first price CSV")->required();
    coh->add_option("--with", other, "second price CSV")->required();
    coh->add_option("--schema", schema, "schema of --input")->capture_default_str();
    coh->add_option("--with-schema", other_schema, "schema of --with (defaults to --schema)");
    coh->add_option("--out", out, "R^2 CSV; phase goes to <stem>_phase.csv")->required();
    coh_flags.attach(coh);

    // hotspots
    std::string matrix, wavelet = "morl";
    double dt = 1.0, quantile = default_hotspot_quantile, max_freq = default_hotspot_max_frequency;
    auto* hot = app.add_subcommand("hotspots", "high-power regions of an exported power matrix");
    hot->add_option("--matrix", matrix, "power CSV written by cwt")->required();
    hot->add_option("--wavelet", wavelet, "wavelet the matrix was computed with")->check(wavelet_name)->capture_default_str();
    hot->add_option("--dt", dt, "sampling interval")->capture_default_str();
    hot->add_option("--quantile", quantile, "threshold quantile in (0,1)")->capture_default_str();
    hot->add_option("--max-freq", max_freq, "lowest frequency counted as high-frequency, cycles/day")->capture_default_str();
    hot->add_option("--out", out, "report JSON (stdout if omitted)");

    // ridges
    std::size_t min_run = default_ridge_min_run;
    auto* rid = app.add_subcommand("ridges", "persistent dominant scales of an exported power matrix");
    rid->add_option("--matrix", matrix, "power CSV written by cwt")->required();
    rid->add_option("--wavelet", wavelet, "wavelet the matrix was computed with")->check(wavelet_name)->capture_default_str();
    rid->add_option("--dt", dt, "sampling interval")->capture_default_str();
    rid->add_option("--min-run", min_run, "minimum run length in samples")->capture_default_str();
    rid->add_option("--out", out, "report JSON (stdout if omitted)");

    // render
    std::string title;
    bool gray = false, no_coi = false;
    auto* ren = app.add_subcommand("render", "PNG heatmap of an exported matrix");
    ren->add_option("--matrix", matrix, "matrix CSV")->required();
    ren->add_option("--wavelet", wavelet, "wavelet, for the cone of influence")->check(wavelet_name)->capture_default_str();
    ren->add_option("--dt", dt, "sampling interval")->capture_default_str();
    ren->add_option("--out", out, "PNG path")->required();
    ren->add_option("--title", title, "figure title");
    ren->add_flag("--gray", gray, "grayscale colour map");
    ren->add_flag("--no-coi", no_coi, "do not hatch the cone of influence");

    // run
    std::string config, out_override, cache_override;
    auto* run = app.add_subcommand("run", "batch pipeline from a JSON config");
    run->add_option("--config", config, "pipeline config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_override, "override output_dir");
    run->add_option("--cache-dir", cache_override, "override cache_dir");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code(ErrorKind::Usage);
    }

    try {
        if (*fetch) {
            const auto from = Date::parse_iso(from_text);
            const auto to = Date::parse_iso(to_text);
            if (!from || !to)
                throw DomainError("--from/--to must be YYYY-MM-DD");
            const CacheKey key{base, quote, *from, *to};
            if (auto cached = cache_get(key, cache_dir)) {
                std::cout << (fs::path(cache_dir) / key.filename()).string() << " (cached, " << cached->size() << " days)\n";
                return 0;
            }
            HttplibTransport transport;
            const FetchSpec spec{base, quote, *from, *to, endpoint, FetchSpec::api_key_from_env()};
            const auto series = fetch_daily_history(spec, transport);
            std::cout << cache_put(series, cache_dir, key).string() << " (" << series.size() << " days)\n";
        } else if (*cwt_cmd) {
            const auto prices = load_csv(input, schema_from_flag(schema));
            const auto returns = log_returns(prices);
            const auto w = parse_wavelet_name(cwt_flags.wavelet);
            const auto grid = cwt_flags.grid(returns.size());
            const auto spec = cwt(returns.returns, w, grid, cwt_flags.dt);
            const auto axes = spectrum_axes(grid, w, cwt_flags.dt, spec.length(), returns.timestamps);
            emit(matrix_to_csv(power(spec).values, axes), out);
            if (!complex_mode.empty()) {
                if (out.empty())
                    throw DomainError("--coefficients needs --out");
                fs::path coef = out;
                coef.replace_filename(coef.stem().string() + "_coefficients" + coef.extension().string());
                export_matrix(spec.coefficients, axes, coef,
                              complex_mode == "parts" ? ComplexExport::Parts : ComplexExport::Modulus);
            }
        } else if (*coh) {
            const auto a = load_csv(input, schema_from_flag(schema));
            const auto b = load_csv(other, schema_from_flag(other_schema.empty() ? schema : other_schema));
            const auto [xa, xb] = align(a, b);
            const auto ra = log_returns(xa);
            const auto rb = log_returns(xb);
            const auto w = parse_wavelet_name(coh_flags.wavelet);
            const auto grid = coh_flags.grid(ra.size());
            const auto map = coherence(cwt(ra.returns, w, grid, coh_flags.dt), cwt(rb.returns, w, grid, coh_flags.dt));
            const auto axes = spectrum_axes(grid, w, coh_flags.dt, ra.size(), ra.timestamps);
            fs::path phase = out;
            phase.replace_filename(phase.stem().string() + "_phase" + phase.extension().string());
            export_matrix(map.r2, axes, out);
            export_matrix(map.phase, axes, phase);
            if (map.flagged_count > 0)
                log_warning(std::to_string(map.flagged_count) + " cell(s) had negligible power and were set to 0");
        } else if (*hot) {
            const auto p = load_power(matrix, wavelet, dt);
            const auto report = detect_hotspots(p, quantile, hotspot_band_ceiling(p.grid, p.wavelet, max_freq, dt));
            emit(to_json(report).dump(2) + "\n", out);
        } else if (*rid) {
            emit(to_json(detect_ridges(load_power(matrix, wavelet, dt), min_run)).dump(2) + "\n", out);
        } else if (*ren) {
            const auto im = import_matrix(matrix);
            const auto w = parse_wavelet_name(wavelet);
            HeatmapSpec spec{im.axes, std::nullopt, title.empty() ? fs::path(matrix).stem().string() : title};
            if (!no_coi)
                spec.coi = cone_of_influence(im.values.cols(), dt, w);
            RenderOptions opts;
            opts.color_map = gray ? ColorMap::Gray : ColorMap::BlueRed;
            render_heatmap(im.values, spec, out, opts);
        } else if (*run) {
            auto cfg = load_pipeline_config(config);
            if (!out_override.empty())
                cfg.output_dir = out_override;
            if (!cache_override.empty())
                cfg.cache_dir = cache_override;
            HttplibTransport transport;
            const auto result = run_pipeline(cfg, transport);
            std::cout << result.artifacts.size() << " artifact(s), " << result.failures.size() << " failure(s); manifest "
                      << result.manifest.string() << "\n";
            for (const auto& f : result.failures)
                std::cerr << "failed: " << f.subject << " [" << f.stage << "]: " << f.message << "\n";
            if (!result.failures.empty())
                return exit_code(result.failures.front().kind);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(ErrorKind::Io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(ErrorKind::Data);
    }
    return 0;
}

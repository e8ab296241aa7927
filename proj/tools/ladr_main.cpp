// Command-line front end: single decodes, strategy benchmarks, the margin and
// locality verifiers, and trace rendering.

#include "ladr/errors.hpp"
#include "ladr/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitVerifyFailed = 4;

void print_summary_line(const ladr::SummaryRow& row) {
    std::cout << row.strategy << " seed=" << row.seed << " nfe=" << row.nfe
              << " rescued=" << row.rescued_total;
    if (row.token_accuracy) std::cout << " accuracy=" << *row.token_accuracy;
    std::cout << " wall_ms=" << row.wall_ms << "\n";
}

int cmd_decode(const std::string& config_path, bool demo, const std::string& trace_out,
               const std::string& render_out) {
    ladr::ExperimentConfig cfg =
        demo ? ladr::demo_config() : ladr::load_experiment_config(config_path);
    const auto denoiser = ladr::make_denoiser(cfg.denoiser, cfg.decode);
    const ladr::DecodeResult result = ladr::decode(*denoiser, cfg.decode);

    ladr::SummaryRow row;
    row.strategy = ladr::strategy_name(cfg.decode.strategy);
    row.seed = cfg.decode.seed;
    row.nfe = result.nfe;
    for (const auto& rec : result.trace) row.rescued_total += rec.rescued;
    row.wall_ms = result.wall_ms;
    if (cfg.denoiser.kind == "planted") {
        const auto* planted = dynamic_cast<const ladr::PlantedOracleDenoiser*>(denoiser.get());
        long long hits = 0;
        for (std::size_t i = 0; i < result.tokens.values.size(); ++i) {
            if (result.tokens.values[i] == planted->target().values[i]) ++hits;
        }
        row.token_accuracy =
            static_cast<double>(hits) / static_cast<double>(result.tokens.values.size());
    }
    print_summary_line(row);

    if (!trace_out.empty()) {
        std::ofstream out(trace_out, std::ios::binary);
        if (!out) throw ladr::io_error("cannot write trace " + trace_out);
        ladr::write_trace(out, cfg, result.trace);
    }
    if (!render_out.empty()) {
        ladr::render_grid(result.tokens, cfg.decode.height, cfg.decode.width, render_out);
    }
    return kExitOk;
}

int cmd_bench(const std::string& config_path) {
    const ladr::ExperimentConfig cfg = ladr::load_experiment_config(config_path);
    const ladr::ExperimentOutput output = ladr::run_experiment(cfg);
    for (const auto& row : output.rows) print_summary_line(row);
    std::cout << "summary: " << output.csv_path << "\n";
    return kExitOk;
}

int cmd_verify_margin(int k_min, int k_max, double tau_step, double grid_step,
                      const std::string& domain, const std::string& out_path) {
    const ladr::SimplexDomain dom = domain == "full" ? ladr::SimplexDomain::full
                                                     : ladr::SimplexDomain::top_two_mass;
    const auto rows = ladr::run_margin_sweep(k_min, k_max, tau_step, grid_step, dom);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ladr::io_error("cannot write report " + out_path);
    ladr::write_margin_sweep_csv(out, rows);

    bool ok = true;
    for (const auto& row : rows) {
        if (row.bruteforce > row.bound + grid_step || row.gap > grid_step) ok = false;
    }
    std::cout << rows.size() << " cells, " << (ok ? "all within" : "violations beyond")
              << " one grid step of the bound\n";
    return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_verify_mi(double beta, int vocab, int size, long long samples, int d_far,
                  std::uint64_t seed, const std::string& out_path) {
    ladr::MiParams params;
    params.beta = beta;
    params.vocab = vocab;
    params.height = size;
    params.width = size;
    params.n_samples = samples;
    params.d_far = d_far;
    params.seed = seed;
    const ladr::MiReport report = ladr::mi_locality_check(params);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ladr::io_error("cannot write report " + out_path);
    ladr::write_mi_report_csv(out, params, report);

    std::cout << "i_near=" << report.i_near << " i_far=" << report.i_far
              << " bootstrap_std=" << report.bootstrap_std
              << (report.sparse_support ? " (sparse joint support)" : "") << "\n";
    if (beta > 0.0) {
        const bool dominant = report.i_near - report.i_far > 3.0 * report.bootstrap_std;
        std::cout << (dominant ? "near context dominates" : "no significant dominance") << "\n";
        return dominant ? kExitOk : kExitVerifyFailed;
    }
    return kExitOk;
}

int cmd_render(const std::string& trace_path, const std::string& out_path) {
    const ladr::TraceRerun rerun = ladr::rerun_from_trace(trace_path);
    ladr::render_grid(rerun.result.tokens, rerun.config.decode.height,
                      rerun.config.decode.width, out_path);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Locality-aware rescue decoding engine and benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    bool demo = false;
    std::string trace_out;
    std::string render_out;
    auto* decode_cmd = app.add_subcommand("decode", "run one decode");
    decode_cmd->add_option("--config", config_path, "JSON config path");
    decode_cmd->add_flag("--demo", demo, "use the built-in demo config");
    decode_cmd->add_option("--trace-out", trace_out, "write the JSONL trace here");
    decode_cmd->add_option("--render-out", render_out, "write a PPM of the result here");

    std::string bench_config;
    auto* bench_cmd = app.add_subcommand("bench", "run a strategy x repeat experiment grid");
    bench_cmd->add_option("--config", bench_config, "JSON config path")->required();

    int k_min = 2, k_max = 4;
    double tau_step = 0.05, grid_step = 0.01;
    std::string domain = "top2";
    std::string margin_out = "margin_sweep.csv";
    auto* margin_cmd = app.add_subcommand("verify-margin", "margin bound vs brute force");
    margin_cmd->add_option("--kmin", k_min, "smallest class count");
    margin_cmd->add_option("--kmax", k_max, "largest class count");
    margin_cmd->add_option("--tau-step", tau_step, "threshold grid step");
    margin_cmd->add_option("--grid-step", grid_step, "simplex grid step");
    margin_cmd->add_option("--domain", domain, "top2 (bound-tight split) or full simplex");
    margin_cmd->add_option("--out", margin_out, "CSV output path");

    double beta = 1.2;
    int mi_vocab = 3, mi_size = 16, d_far = 6;
    long long mi_samples = 50000;
    std::uint64_t mi_seed = 1;
    std::string mi_out = "mi_report.csv";
    auto* mi_cmd = app.add_subcommand("verify-mi", "near vs far mutual information on a Potts field");
    mi_cmd->add_option("--beta", beta, "coupling strength");
    mi_cmd->add_option("--k", mi_vocab, "token alphabet size");
    mi_cmd->add_option("--size", mi_size, "grid side length");
    mi_cmd->add_option("--samples", mi_samples, "number of Gibbs grids");
    mi_cmd->add_option("--dfar", d_far, "Chebyshev distance of the far token");
    mi_cmd->add_option("--seed", mi_seed, "corpus seed");
    mi_cmd->add_option("--out", mi_out, "CSV output path");

    std::string render_trace;
    std::string render_path = "render.ppm";
    auto* render_cmd = app.add_subcommand("render", "re-run a trace and render its tokens");
    render_cmd->add_option("--trace", render_trace, "JSONL trace path")->required();
    render_cmd->add_option("--out", render_path, "PPM output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (decode_cmd->parsed()) {
            if (!demo && config_path.empty()) {
                std::cerr << "decode needs --config or --demo\n";
                return kExitConfig;
            }
            return cmd_decode(config_path, demo, trace_out, render_out);
        }
        if (bench_cmd->parsed()) return cmd_bench(bench_config);
        if (margin_cmd->parsed()) {
            return cmd_verify_margin(k_min, k_max, tau_step, grid_step, domain, margin_out);
        }
        if (mi_cmd->parsed()) {
            return cmd_verify_mi(beta, mi_vocab, mi_size, mi_samples, d_far, mi_seed, mi_out);
        }
        if (render_cmd->parsed()) return cmd_render(render_trace, render_path);
    } catch (const ladr::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ladr::io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}

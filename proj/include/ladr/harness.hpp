#pragma once

#include "ladr/decoder.hpp"
#include "ladr/verify.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ladr {

// Which backend a run talks to, with its parameters. `planted` draws its
// ground-truth grid from target_seed; `replay` streams a recorded posterior
// file.
struct DenoiserSpec {
    std::string kind = "planted"; // planted | potts | replay
    double base = 0.3;
    double gain = 0.08;
    std::uint64_t target_seed = 1001;
    double beta = 1.0;
    std::string replay_path;
};

struct ExperimentConfig {
    DecodeConfig decode;
    DenoiserSpec denoiser;
    std::vector<Strategy> strategies{Strategy::standard, Strategy::ladr};
    int repeats = 1;
    std::uint64_t base_seed = 1;
    std::string out_dir = "ladr_out";
    std::string csv_path; // defaults to <out_dir>/summary.csv when empty
};

// The zero-configuration run: 32x32 grid, 16 tokens, cosine with T=64,
// planted oracle (base 0.3, gain 0.08), default policy, greedy sampling.
ExperimentConfig demo_config();

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

// JSON round-trip for configs. Missing keys fall back to demo defaults, so a
// config file only states what it overrides.
ExperimentConfig experiment_config_from_json_text(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json_text(const ExperimentConfig& cfg);

std::unique_ptr<Denoiser> make_denoiser(const DenoiserSpec& spec, const DecodeConfig& decode);

// One summary line per run.
struct SummaryRow {
    std::string strategy;
    std::uint64_t seed = 0;
    int height = 0;
    int width = 0;
    int vocab = 0;
    int scheduled_steps = 0;
    long long nfe = 0;
    long long steps = 0;
    std::optional<double> token_accuracy; // planted backend only
    long long rescued_total = 0;
    double wall_ms = 0.0;
};

struct ExperimentOutput {
    std::vector<SummaryRow> rows;         // sorted by (strategy, seed)
    std::vector<std::string> trace_paths; // same order as rows
    std::string csv_path;
};

// Runs every (strategy x repeat) cell with seed = base_seed + repeat, writes
// one JSONL trace per run plus the summary CSV. Identical config reruns are
// byte-identical except for the wall_ms column. Output paths are validated
// before any decode starts.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// Trace file: line 1 is {"format_version":1,"config":{...}}, then one
// StepRecord object per line.
void write_trace(std::ostream& out, const ExperimentConfig& cfg,
                 std::span<const StepRecord> trace);

// Re-executes the run recorded in a trace header (decoding is a pure
// function of the config, so the header is sufficient) and returns its
// result together with the parsed config.
struct TraceRerun {
    ExperimentConfig config;
    DecodeResult result;
};
TraceRerun rerun_from_trace(const std::string& path);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

// One pixel per token, binary PPM (P6). Tokens index a fixed 16-colour
// palette, cycling modulo its size for larger vocabularies. Rejects
// sequences that still contain masked values.
void render_grid(const TokenSequence& tokens, int height, int width,
                 const std::string& out_path);

void write_margin_sweep_csv(std::ostream& out, std::span<const MarginSweepRow> rows);
void write_mi_report_csv(std::ostream& out, const MiParams& params, const MiReport& report);

} // namespace ladr

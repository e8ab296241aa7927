#include "ladr/harness.hpp"

#include "ladr/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>

namespace ladr {

namespace {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip decimal form; keeps CSV and JSON output reproducible.
std::string number_to_string(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

const std::array<std::array<unsigned char, 3>, 16> kPalette{{
    {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},
    {148, 103, 189}, {140, 86, 75},   {227, 119, 194}, {127, 127, 127},
    {188, 189, 34},  {23, 190, 207},  {174, 199, 232}, {255, 187, 120},
    {152, 223, 138}, {255, 152, 150}, {197, 176, 213}, {196, 156, 148},
}};

std::string sampling_name(SamplingMode m) {
    return m == SamplingMode::greedy ? "greedy" : "categorical";
}

SamplingMode sampling_from_name(const std::string& name) {
    if (name == "greedy") return SamplingMode::greedy;
    if (name == "categorical") return SamplingMode::categorical;
    throw config_error("unknown sampling mode: " + name);
}

std::string schedule_name(ScheduleKind k) {
    return k == ScheduleKind::cosine ? "cosine" : "linear";
}

ScheduleKind schedule_from_name(const std::string& name) {
    if (name == "cosine") return ScheduleKind::cosine;
    if (name == "linear") return ScheduleKind::linear;
    throw config_error("unknown schedule kind: " + name);
}

ordered_json phases_to_json(const PhasePolicy& policy) {
    ordered_json arr = ordered_json::array();
    for (const Phase& p : policy.phases()) {
        ordered_json obj;
        obj["t_lo"] = p.t_lo;
        obj["t_hi"] = p.t_hi;
        obj["alpha"] = p.alpha;
        if (p.tau) obj["tau"] = *p.tau;
        else obj["tau"] = nullptr;
        arr.push_back(obj);
    }
    return arr;
}

PhasePolicy phases_from_json(const ordered_json& arr) {
    if (!arr.is_array()) throw config_error("config: phases must be an array");
    std::vector<Phase> phases;
    for (const auto& obj : arr) {
        Phase p;
        p.t_lo = obj.at("t_lo").get<double>();
        p.t_hi = obj.at("t_hi").get<double>();
        p.alpha = obj.at("alpha").get<double>();
        if (obj.contains("tau") && !obj.at("tau").is_null()) {
            p.tau = obj.at("tau").get<double>();
        }
        phases.push_back(p);
    }
    return PhasePolicy(std::move(phases));
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["H"] = cfg.decode.height;
    j["W"] = cfg.decode.width;
    j["K"] = cfg.decode.vocab;
    j["mask_id"] = cfg.decode.mask_id;
    j["schedule"] = schedule_name(cfg.decode.schedule.kind());
    j["T"] = cfg.decode.schedule.steps();
    j["kernel"] = cfg.decode.kernel.size();
    j["strategy"] = strategy_name(cfg.decode.strategy);
    j["sampling"] = sampling_name(cfg.decode.sampling);
    j["temperature"] = cfg.decode.temperature;
    j["seed"] = cfg.decode.seed;
    j["phases"] = phases_to_json(cfg.decode.policy);

    ordered_json d;
    d["kind"] = cfg.denoiser.kind;
    if (cfg.denoiser.kind == "planted") {
        d["base"] = cfg.denoiser.base;
        d["gain"] = cfg.denoiser.gain;
        d["target_seed"] = cfg.denoiser.target_seed;
    } else if (cfg.denoiser.kind == "potts") {
        d["beta"] = cfg.denoiser.beta;
    } else if (cfg.denoiser.kind == "replay") {
        d["path"] = cfg.denoiser.replay_path;
    }
    j["denoiser"] = d;

    ordered_json strategies = ordered_json::array();
    for (Strategy s : cfg.strategies) strategies.push_back(strategy_name(s));
    j["strategies"] = strategies;
    j["repeats"] = cfg.repeats;
    j["base_seed"] = cfg.base_seed;
    j["out_dir"] = cfg.out_dir;
    j["csv"] = cfg.csv_path;
    return j;
}

ExperimentConfig config_from_json(const ordered_json& j) {
    const ExperimentConfig defaults = demo_config();
    ExperimentConfig cfg = defaults;

    cfg.decode.height = j.value("H", defaults.decode.height);
    cfg.decode.width = j.value("W", defaults.decode.width);
    cfg.decode.vocab = j.value("K", defaults.decode.vocab);
    cfg.decode.mask_id = j.value("mask_id", defaults.decode.mask_id);
    cfg.decode.schedule = Schedule(
        schedule_from_name(j.value("schedule", schedule_name(defaults.decode.schedule.kind()))),
        j.value("T", defaults.decode.schedule.steps()));
    cfg.decode.kernel = Kernel(j.value("kernel", defaults.decode.kernel.size()));
    cfg.decode.strategy = strategy_from_name(
        j.value("strategy", strategy_name(defaults.decode.strategy)));
    cfg.decode.sampling = sampling_from_name(
        j.value("sampling", sampling_name(defaults.decode.sampling)));
    cfg.decode.temperature = j.value("temperature", defaults.decode.temperature);
    cfg.decode.seed = j.value("seed", defaults.decode.seed);
    if (j.contains("phases")) cfg.decode.policy = phases_from_json(j.at("phases"));

    if (j.contains("denoiser")) {
        const auto& d = j.at("denoiser");
        cfg.denoiser.kind = d.value("kind", defaults.denoiser.kind);
        cfg.denoiser.base = d.value("base", defaults.denoiser.base);
        cfg.denoiser.gain = d.value("gain", defaults.denoiser.gain);
        cfg.denoiser.target_seed = d.value("target_seed", defaults.denoiser.target_seed);
        cfg.denoiser.beta = d.value("beta", defaults.denoiser.beta);
        cfg.denoiser.replay_path = d.value("path", defaults.denoiser.replay_path);
    }

    if (j.contains("strategies")) {
        cfg.strategies.clear();
        for (const auto& name : j.at("strategies")) {
            cfg.strategies.push_back(strategy_from_name(name.get<std::string>()));
        }
    }
    cfg.repeats = j.value("repeats", defaults.repeats);
    cfg.base_seed = j.value("base_seed", defaults.base_seed);
    cfg.out_dir = j.value("out_dir", defaults.out_dir);
    cfg.csv_path = j.value("csv", defaults.csv_path);

    cfg.decode.validate();
    if (cfg.repeats < 1) throw config_error("config: repeats must be >= 1");
    if (cfg.strategies.empty()) throw config_error("config: strategies must be non-empty");
    if (cfg.denoiser.kind != "planted" && cfg.denoiser.kind != "potts" &&
        cfg.denoiser.kind != "replay") {
        throw config_error("config: unknown denoiser kind " + cfg.denoiser.kind);
    }
    return cfg;
}

ordered_json step_record_to_json(const StepRecord& rec) {
    ordered_json j;
    j["step"] = rec.step;
    j["rho_before"] = rec.rho_before;
    j["t_eff"] = rec.t_eff;
    j["t_next"] = rec.t_next;
    j["n_mask_target"] = rec.n_mask_target;
    j["standard_unmasked"] = rec.standard_unmasked;
    j["frontier_size"] = rec.frontier_size;
    j["rescued"] = rec.rescued;
    j["rho_after"] = rec.rho_after;
    j["forward_passes_so_far"] = rec.forward_passes_so_far;
    return j;
}

} // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
    case Strategy::standard: return "standard";
    case Strategy::ladr: return "ladr";
    case Strategy::random_masked: return "random_masked";
    case Strategy::non_neighbor_first: return "non_neighbor_first";
    case Strategy::top1_confidence: return "top1_confidence";
    case Strategy::random_neighbor: return "random_neighbor";
    }
    throw config_error("strategy_name: unknown strategy");
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "standard") return Strategy::standard;
    if (name == "ladr") return Strategy::ladr;
    if (name == "random_masked") return Strategy::random_masked;
    if (name == "non_neighbor_first") return Strategy::non_neighbor_first;
    if (name == "top1_confidence") return Strategy::top1_confidence;
    if (name == "random_neighbor") return Strategy::random_neighbor;
    throw config_error("unknown strategy: " + name);
}

ExperimentConfig demo_config() {
    ExperimentConfig cfg;
    cfg.decode = DecodeConfig{};
    cfg.denoiser = DenoiserSpec{};
    cfg.strategies = {Strategy::standard, Strategy::ladr};
    cfg.repeats = 1;
    cfg.base_seed = 1;
    cfg.out_dir = "ladr_out";
    cfg.csv_path.clear();
    return cfg;
}

ExperimentConfig experiment_config_from_json_text(const std::string& text) {
    const ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw config_error("config: not a JSON object");
    try {
        return config_from_json(j);
    } catch (const ordered_json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return experiment_config_from_json_text(buffer.str());
}

std::string experiment_config_to_json_text(const ExperimentConfig& cfg) {
    return config_to_json(cfg).dump();
}

std::unique_ptr<Denoiser> make_denoiser(const DenoiserSpec& spec, const DecodeConfig& decode) {
    if (spec.kind == "planted") {
        rng_engine rng(spec.target_seed);
        TokenSequence target;
        target.vocab = decode.vocab;
        target.mask_id = decode.mask_id;
        target.values.resize(static_cast<std::size_t>(decode.positions()));
        for (auto& v : target.values) {
            v = static_cast<std::int32_t>(
                bounded_uniform(rng, static_cast<std::uint64_t>(decode.vocab)));
        }
        return std::make_unique<PlantedOracleDenoiser>(std::move(target), decode.height,
                                                       decode.width, spec.base, spec.gain);
    }
    if (spec.kind == "potts") {
        return std::make_unique<PottsDenoiser>(decode.height, decode.width, decode.vocab,
                                               spec.beta);
    }
    if (spec.kind == "replay") {
        return std::make_unique<ReplayDenoiser>(spec.replay_path);
    }
    throw config_error("make_denoiser: unknown kind " + spec.kind);
}

void write_trace(std::ostream& out, const ExperimentConfig& cfg,
                 std::span<const StepRecord> trace) {
    ordered_json header;
    header["format_version"] = 1;
    header["config"] = config_to_json(cfg);
    out << header.dump() << "\n";
    for (const StepRecord& rec : trace) {
        out << step_record_to_json(rec).dump() << "\n";
    }
}

TraceRerun rerun_from_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open trace file " + path);
    std::string line;
    if (!std::getline(in, line)) throw format_error("trace file has no header: " + path);
    const ordered_json header = ordered_json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format_version", 0) != 1 ||
        !header.contains("config")) {
        throw format_error("trace header is not a version-1 config record: " + path);
    }
    TraceRerun rerun{config_from_json(header.at("config")), {}};
    const auto denoiser = make_denoiser(rerun.config.denoiser, rerun.config.decode);
    rerun.result = decode(*denoiser, rerun.config.decode);
    return rerun;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    cfg.decode.validate();
    if (cfg.repeats < 1) throw config_error("run_experiment: repeats must be >= 1");

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + cfg.out_dir);
    const std::string csv_path =
        cfg.csv_path.empty() ? (fs::path(cfg.out_dir) / "summary.csv").string() : cfg.csv_path;
    {
        std::ofstream probe(csv_path, std::ios::app);
        if (!probe) throw io_error("summary path is not writable: " + csv_path);
    }

    ExperimentOutput output;
    output.csv_path = csv_path;

    std::vector<Strategy> strategies = cfg.strategies;
    std::sort(strategies.begin(), strategies.end(), [](Strategy a, Strategy b) {
        return strategy_name(a) < strategy_name(b);
    });

    for (Strategy strategy : strategies) {
        for (int repeat = 0; repeat < cfg.repeats; ++repeat) {
            ExperimentConfig run_cfg = cfg;
            run_cfg.decode.strategy = strategy;
            run_cfg.decode.seed = cfg.base_seed + static_cast<std::uint64_t>(repeat);

            const auto denoiser = make_denoiser(run_cfg.denoiser, run_cfg.decode);
            const DecodeResult result = decode(*denoiser, run_cfg.decode);

            SummaryRow row;
            row.strategy = strategy_name(strategy);
            row.seed = run_cfg.decode.seed;
            row.height = run_cfg.decode.height;
            row.width = run_cfg.decode.width;
            row.vocab = run_cfg.decode.vocab;
            row.scheduled_steps = run_cfg.decode.schedule.steps();
            row.nfe = result.nfe;
            row.steps = static_cast<long long>(result.trace.size());
            for (const StepRecord& rec : result.trace) row.rescued_total += rec.rescued;
            row.wall_ms = result.wall_ms;
            if (run_cfg.denoiser.kind == "planted") {
                const auto* planted = dynamic_cast<const PlantedOracleDenoiser*>(denoiser.get());
                long long hits = 0;
                for (std::size_t i = 0; i < result.tokens.values.size(); ++i) {
                    if (result.tokens.values[i] == planted->target().values[i]) ++hits;
                }
                row.token_accuracy = static_cast<double>(hits) /
                                     static_cast<double>(result.tokens.values.size());
            }

            const std::string trace_path =
                (fs::path(cfg.out_dir) /
                 ("trace_" + row.strategy + "_seed" + std::to_string(row.seed) + ".jsonl"))
                    .string();
            std::ofstream trace_out(trace_path, std::ios::binary);
            if (!trace_out) throw io_error("cannot write trace file " + trace_path);
            write_trace(trace_out, run_cfg, result.trace);

            output.rows.push_back(std::move(row));
            output.trace_paths.push_back(trace_path);
        }
    }

    std::ofstream csv_out(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv_out) throw io_error("cannot write summary CSV " + csv_path);
    write_summary_csv(csv_out, output.rows);
    return output;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
    out << "strategy,seed,H,W,K,T,nfe,steps,token_accuracy,rescued_total,wall_ms\n";
    for (const SummaryRow& row : rows) {
        out << row.strategy << ',' << row.seed << ',' << row.height << ',' << row.width << ','
            << row.vocab << ',' << row.scheduled_steps << ',' << row.nfe << ',' << row.steps
            << ',' << (row.token_accuracy ? number_to_string(*row.token_accuracy) : std::string())
            << ',' << row.rescued_total << ',' << number_to_string(row.wall_ms) << '\n';
    }
}

void render_grid(const TokenSequence& tokens, int height, int width,
                 const std::string& out_path) {
    if (tokens.values.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw std::invalid_argument("render_grid: token count != H*W");
    }
    for (std::int32_t v : tokens.values) {
        if (tokens.is_masked_value(v)) {
            throw std::invalid_argument("render_grid: sequence still contains masked values");
        }
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw io_error("cannot write image " + out_path);
    out << "P6\n" << width << ' ' << height << "\n255\n";
    for (std::int32_t v : tokens.values) {
        const auto& rgb = kPalette[static_cast<std::size_t>(v) % kPalette.size()];
        out.write(reinterpret_cast<const char*>(rgb.data()), 3);
    }
}

void write_margin_sweep_csv(std::ostream& out, std::span<const MarginSweepRow> rows) {
    out << "K,tau,bruteforce,bound,gap\n";
    for (const MarginSweepRow& row : rows) {
        out << row.vocab << ',' << number_to_string(row.tau) << ','
            << number_to_string(row.bruteforce) << ',' << number_to_string(row.bound) << ','
            << number_to_string(row.gap) << '\n';
    }
}

void write_mi_report_csv(std::ostream& out, const MiParams& params, const MiReport& report) {
    out << "K,beta,H,W,samples,d_far,i_near,i_far,bootstrap_std,sparse_support\n";
    out << params.vocab << ',' << number_to_string(params.beta) << ',' << params.height << ','
        << params.width << ',' << report.samples << ',' << params.d_far << ','
        << number_to_string(report.i_near) << ',' << number_to_string(report.i_far) << ','
        << number_to_string(report.bootstrap_std) << ',' << (report.sparse_support ? 1 : 0)
        << '\n';
}

} // namespace ladr

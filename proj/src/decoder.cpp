#include "ladr/decoder.hpp"

#include "ladr/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace ladr {

namespace {

std::int32_t argmax_row(std::span<const double> probs) {
    std::size_t best = 0;
    for (std::size_t v = 1; v < probs.size(); ++v) {
        if (probs[v] > probs[best]) best = v;
    }
    return static_cast<std::int32_t>(best);
}

std::int32_t sample_row(std::span<const double> probs, SamplingMode mode,
                        double temperature, rng_engine& rng) {
    if (mode == SamplingMode::greedy) return argmax_row(probs);
    if (temperature == 1.0) {
        return static_cast<std::int32_t>(weighted_draw(rng, probs));
    }
    // Tempered draw in log space so extreme exponents stay finite.
    std::vector<double> weights(probs.size(), 0.0);
    double max_log = -1e300;
    for (std::size_t v = 0; v < probs.size(); ++v) {
        if (probs[v] > 0.0) max_log = std::max(max_log, std::log(probs[v]) / temperature);
    }
    for (std::size_t v = 0; v < probs.size(); ++v) {
        if (probs[v] > 0.0) weights[v] = std::exp(std::log(probs[v]) / temperature - max_log);
    }
    return static_cast<std::int32_t>(weighted_draw(rng, weights));
}

struct StepOutcome {
    MaskGrid mask_after_standard;
    MaskGrid mask_after;
    std::vector<int> frontier_set;
    std::vector<int> rescue_set;
    StepRecord record;
};

} // namespace

void DecodeConfig::validate() const {
    if (height < 1 || width < 1) throw config_error("DecodeConfig: dimensions must be positive");
    if (vocab < 2) throw config_error("DecodeConfig: vocab must be >= 2");
    if (mask_id >= 0 && mask_id < vocab) {
        throw config_error("DecodeConfig: mask_id must lie outside the vocabulary");
    }
    if (!(temperature > 0.0)) throw config_error("DecodeConfig: temperature must be > 0");
}

std::vector<std::int32_t> sample_tokens(const PosteriorBatch& batch, SamplingMode mode,
                                        double temperature, rng_engine& rng) {
    if (!(temperature > 0.0)) throw std::invalid_argument("sample_tokens: temperature must be > 0");
    std::vector<std::int32_t> out(static_cast<std::size_t>(batch.positions()));
    for (int i = 0; i < batch.positions(); ++i) {
        out[static_cast<std::size_t>(i)] = sample_row(batch.row(i), mode, temperature, rng);
    }
    return out;
}

DecodeResult decode(Denoiser& denoiser, const DecodeConfig& cfg, const StepObserver& observer) {
    TokenSequence tokens;
    tokens.vocab = cfg.vocab;
    tokens.mask_id = cfg.mask_id;
    tokens.values.assign(static_cast<std::size_t>(cfg.positions()), cfg.mask_id);
    return decode_from(denoiser, cfg, std::move(tokens),
                       MaskGrid(cfg.height, cfg.width, true), observer);
}

DecodeResult decode_from(Denoiser& denoiser, const DecodeConfig& cfg,
                         TokenSequence tokens, MaskGrid mask,
                         const StepObserver& observer) {
    cfg.validate();
    if (denoiser.positions() != cfg.positions() || denoiser.vocab() != cfg.vocab) {
        throw config_error("decode: denoiser dimensions do not match the config");
    }
    if (mask.height() != cfg.height || mask.width() != cfg.width ||
        tokens.values.size() != static_cast<std::size_t>(cfg.positions())) {
        throw config_error("decode: initial state does not match the config");
    }
    if (tokens.vocab != cfg.vocab || tokens.mask_id != cfg.mask_id) {
        throw config_error("decode: initial tokens disagree with the config vocabulary");
    }
    for (int i = 0; i < cfg.positions(); ++i) {
        const std::int32_t v = tokens.values[static_cast<std::size_t>(i)];
        const bool ok = mask.test(i) ? (v == cfg.mask_id) : !tokens.is_masked_value(v);
        if (!ok) throw config_error("decode: initial tokens and mask disagree at " + std::to_string(i));
    }

    const auto started = std::chrono::steady_clock::now();
    const int n_total = cfg.positions();
    const Schedule& sched = cfg.schedule;

    rng_engine rng(cfg.seed);
    DecodeResult result;
    long long nfe = 0;

    // One forward pass plus selection/rescue/commit. When `forced` is set the
    // scheduled target is overridden to zero and commits use plain argmax.
    const auto run_step = [&](bool forced) {
        const long long m = mask.count();
        const double rho_before = static_cast<double>(m) / static_cast<double>(n_total);
        const Timestep t_eff = gamma_inv(sched, MaskFraction(rho_before));
        const Timestep t_next = next_timestep(sched, t_eff);

        long long n_mask = forced ? 0 : target_mask_count(sched, n_total, t_next);
        n_mask = std::min(n_mask, m);
        // The schedule advance guarantees a lower target in exact arithmetic;
        // keep strict progress even if the advance falls below fp resolution.
        if (n_mask >= m && m > 0) n_mask = m - 1;

        PosteriorBatch posterior = denoiser.predict(tokens, mask, t_next);
        ++nfe;

        std::vector<std::int32_t> predicted(tokens.values);
        std::vector<double> top1(static_cast<std::size_t>(n_total), 1.0);
        std::vector<double> margin(static_cast<std::size_t>(n_total), 1.0);
        for (int i = 0; i < n_total; ++i) {
            if (!mask.test(i)) continue;
            const auto row = posterior.row(i);
            top1[static_cast<std::size_t>(i)] = *std::max_element(row.begin(), row.end());
            margin[static_cast<std::size_t>(i)] = confidence_margin(row);
            predicted[static_cast<std::size_t>(i)] =
                forced ? argmax_row(row) : sample_row(row, cfg.sampling, cfg.temperature, rng);
        }

        MaskGrid mask_std = standard_select(top1, mask, n_mask);
        StepOutcome out{std::move(mask_std), MaskGrid(cfg.height, cfg.width), {}, {}, {}};
        out.frontier_set = frontier(out.mask_after_standard, cfg.kernel);

        const PhasePolicy::Params params = cfg.policy.at(t_eff);
        std::vector<double> frontier_margins;
        frontier_margins.reserve(out.frontier_set.size());
        for (int i : out.frontier_set) frontier_margins.push_back(margin[static_cast<std::size_t>(i)]);
        const std::vector<int> ladr_rescue =
            rescue_select(frontier_margins, out.frontier_set, params.alpha, params.tau);

        switch (cfg.strategy) {
        case Strategy::standard:
            break;
        case Strategy::ladr:
            out.rescue_set = ladr_rescue;
            break;
        case Strategy::random_masked:
        case Strategy::non_neighbor_first:
        case Strategy::top1_confidence:
        case Strategy::random_neighbor: {
            std::vector<int> masked_now;
            for (int i = 0; i < n_total; ++i) {
                if (out.mask_after_standard.test(i)) masked_now.push_back(i);
            }
            const SelectionState state{masked_now, out.frontier_set, margin, top1};
            const AblationKind kind =
                cfg.strategy == Strategy::random_masked      ? AblationKind::random_masked
                : cfg.strategy == Strategy::non_neighbor_first ? AblationKind::non_neighbor_first
                : cfg.strategy == Strategy::top1_confidence    ? AblationKind::top1_confidence
                                                               : AblationKind::random_neighbor;
            out.rescue_set = ablation_select(kind, ladr_rescue.size(), state, rng);
            break;
        }
        }

        out.mask_after = out.mask_after_standard;
        for (int i : out.rescue_set) out.mask_after.set(i, false);
        for (int i = 0; i < n_total; ++i) {
            if (mask.test(i) && !out.mask_after.test(i)) {
                tokens.values[static_cast<std::size_t>(i)] = predicted[static_cast<std::size_t>(i)];
            }
        }

        const long long m_after = out.mask_after.count();
        out.record = StepRecord{
            static_cast<int>(result.trace.size()),
            rho_before,
            t_eff.value(),
            t_next.value(),
            n_mask,
            m - n_mask,
            static_cast<long long>(out.frontier_set.size()),
            static_cast<long long>(out.rescue_set.size()),
            static_cast<double>(m_after) / static_cast<double>(n_total),
            nfe,
        };
        result.trace.push_back(out.record);

        if (observer) {
            observer(StepDebug{out.record, mask, out.mask_after_standard, out.mask_after,
                               out.frontier_set, out.rescue_set, margin, params.tau, tokens});
        }
        mask = out.mask_after;
    };

    for (int step = 0; step < sched.steps(); ++step) {
        if (mask.count() == 0) break;
        run_step(false);
    }
    if (mask.count() > 0) run_step(true);

    result.tokens = std::move(tokens);
    result.nfe = nfe;
    result.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started).count();
    return result;
}

} // namespace ladr

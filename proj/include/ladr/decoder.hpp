#pragma once

#include "ladr/denoiser.hpp"
#include "ladr/grid.hpp"
#include "ladr/policy.hpp"
#include "ladr/rng.hpp"
#include "ladr/schedule.hpp"
#include "ladr/selection.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ladr {

// How rescue positions are chosen on top of the scheduled unmasking.
// `standard` performs no rescue; `ladr` rescues frontier tokens by margin;
// the remaining strategies spend the same per-step budget ladr would spend,
// through their own selector.
enum class Strategy {
    standard,
    ladr,
    random_masked,
    non_neighbor_first,
    top1_confidence,
    random_neighbor,
};

enum class SamplingMode { greedy, categorical };

struct DecodeConfig {
    int height = 32;
    int width = 32;
    int vocab = 16;
    std::int32_t mask_id = -1;
    Schedule schedule{ScheduleKind::cosine, 64};
    PhasePolicy policy = PhasePolicy::default_policy();
    Kernel kernel{3};
    Strategy strategy = Strategy::ladr;
    SamplingMode sampling = SamplingMode::greedy;
    double temperature = 1.0;
    std::uint64_t seed = 1;

    int positions() const { return height * width; }
    // Throws config_error on any out-of-range field.
    void validate() const;
};

// Telemetry for one forward pass. rho values are masked fractions of the
// whole grid; the accounting identity
//   rho_after = rho_before - (standard_unmasked + rescued) / N
// holds exactly per record, and rho_after chains into the next record.
struct StepRecord {
    int step = 0;
    double rho_before = 0.0;
    double t_eff = 0.0;
    double t_next = 0.0;
    long long n_mask_target = 0;
    long long standard_unmasked = 0;
    long long frontier_size = 0;
    long long rescued = 0;
    double rho_after = 0.0;
    long long forward_passes_so_far = 0;
};

struct DecodeResult {
    TokenSequence tokens;
    std::vector<StepRecord> trace;
    long long nfe = 0;
    double wall_ms = 0.0;
};

// Per-step internals handed to an optional observer, for verification
// suites that need more than the trace counts.
struct StepDebug {
    const StepRecord& record;
    const MaskGrid& mask_before;          // state entering the step
    const MaskGrid& mask_after_standard;  // after scheduled unmasking
    const MaskGrid& mask_after;           // committed state leaving the step
    std::span<const int> frontier_set;    // frontier of mask_after_standard
    std::span<const int> rescue_set;      // positions unmasked by rescue
    std::span<const double> margin;       // per position, valid where masked
    std::optional<double> tau;            // threshold in effect this step
    const TokenSequence& tokens_after;
};

using StepObserver = std::function<void(const StepDebug&)>;

// Runs the decode loop from a fully masked grid: per step, align the
// effective timestep with the actual mask density through the inverse
// schedule, advance by 1/T, unmask down to the scheduled target by top-1
// confidence, then apply the strategy's rescue on the post-selection state.
// Newly unmasked positions take the sampled predictions; committed tokens
// are never resampled. If T steps leave masks, one final forward commits
// the rest by argmax.
//
// A run owns its state and RNG; concurrent runs need no synchronisation as
// long as each owns its denoiser or shares a stateless one.
DecodeResult decode(Denoiser& denoiser, const DecodeConfig& cfg,
                    const StepObserver& observer = nullptr);

// Same loop from a caller-supplied partial state (tokens/mask must agree).
DecodeResult decode_from(Denoiser& denoiser, const DecodeConfig& cfg,
                         TokenSequence tokens, MaskGrid mask,
                         const StepObserver& observer = nullptr);

// Per-row token draws: greedy takes the argmax (ties to the lowest index),
// categorical draws from probs^(1/temperature) renormalized.
std::vector<std::int32_t> sample_tokens(const PosteriorBatch& batch, SamplingMode mode,
                                        double temperature, rng_engine& rng);

} // namespace ladr

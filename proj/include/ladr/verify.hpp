#pragma once

#include "ladr/decoder.hpp"
#include "ladr/schedule.hpp"
#include "ladr/selection.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ladr {

// Mutual-information estimates (bits) between a centre token and (a) the
// joint of its four lattice neighbours, (b) a single token at Chebyshev
// distance d_far. bootstrap_std is the bootstrap standard deviation of the
// difference i_near - i_far.
struct MiReport {
    double i_near = 0.0;
    double i_far = 0.0;
    double bootstrap_std = 0.0;
    long long samples = 0;
    bool sparse_support = false; // some joint cell saw fewer than 5 observations
};

struct MiParams {
    int vocab = 2;
    double beta = 1.0;
    int height = 16;
    int width = 16;
    long long n_samples = 50000;
    int d_far = 6;
    std::uint64_t seed = 1;
    int sweeps = 12;               // Gibbs sweeps per independent grid
    int bootstrap_resamples = 200;
};

// Draws n_samples independent Gibbs grids and estimates both informations by
// plug-in entropies over empirical joint frequencies, with the Miller-Madow
// small-sample correction so estimates are centred at zero under
// independence. Requires height,width >= 2*d_far+1, d_far >= 2, beta >= 0,
// n_samples >= 1000.
MiReport mi_locality_check(const MiParams& params);

struct TraceCheck {
    bool ok = true;
    int violation_index = -1;
    std::string message;
};

// Re-derives the per-record guarantees of a decode trace: the effective
// timestep matches the recorded density through the schedule (within the
// 1/N floor-quantization slack), the advance rule for t_next, strictly
// decreasing density with exact unmask accounting, and record chaining.
// Violations are findings, not faults; the first one is reported.
TraceCheck check_trace_consistency(std::span<const StepRecord> trace,
                                   const Schedule& schedule, long long n_total);

struct MarginSweepRow {
    int vocab = 0;
    double tau = 0.0;
    double bruteforce = 0.0;
    double bound = 0.0;
    double gap = 0.0; // bound - bruteforce
};

// Brute-force/bound comparison over K in [k_min, k_max] and
// tau in {tau_step, 2*tau_step, ...} below 1.
std::vector<MarginSweepRow> run_margin_sweep(int k_min, int k_max, double tau_step,
                                             double grid_step,
                                             SimplexDomain domain = SimplexDomain::top_two_mass);

} // namespace ladr

#pragma once

#include "ladr/grid.hpp"
#include "ladr/rng.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ladr {

// Top-1 minus top-2 probability of a categorical distribution. For a
// single-class vocabulary the margin is the lone probability. Throws
// std::invalid_argument on an empty distribution.
double confidence_margin(std::span<const double> probs);

// Worst-case misclassification bound (1 - tau) / 2 for a distribution whose
// confidence margin is at least tau.
double margin_error_bound(double tau);

// Scheduled global unmasking: keep exactly n_mask masked, chosen as the
// n_mask least-confident (by top-1 probability) among the currently masked
// positions. Observed positions are never re-masked. Ties break by ascending
// flat index. Throws std::invalid_argument when n_mask exceeds the masked
// count; callers clamp first.
MaskGrid standard_select(std::span<const double> top1_confidence,
                         const MaskGrid& mask, long long n_mask);

// Risk-bounded rescue: among candidates whose margin strictly exceeds tau
// (no filter when tau is absent), take the top floor(|candidates| * alpha)
// by margin. candidate_margins[j] belongs to candidates[j]. Ties break by
// ascending flat index; result is ascending.
std::vector<int> rescue_select(std::span<const double> candidate_margins,
                               std::span<const int> candidates,
                               double alpha, std::optional<double> tau);

// Alternative spend-the-same-budget selectors used for strategy comparisons.
enum class AblationKind {
    random_masked,      // uniform draws from every masked position
    non_neighbor_first, // best margins among masked non-frontier cells first
    top1_confidence,    // frontier ranked by top-1 probability instead of margin
    random_neighbor,    // uniform draws from the frontier
};

// Immutable per-step view consumed by ablation_select. `masked` and
// `frontier` are ascending flat indices; `margin` and `top1` are full-length
// per-position arrays (only masked entries are read).
struct SelectionState {
    std::span<const int> masked;
    std::span<const int> frontier;
    std::span<const double> margin;
    std::span<const double> top1;
};

// Spends exactly `budget` positions via the given selector, truncating to
// the available pool when the budget exceeds it. Result is ascending.
std::vector<int> ablation_select(AblationKind kind, std::size_t budget,
                                 const SelectionState& state, rng_engine& rng);

// Enumeration domain for the margin-bound search.
//
// top_two_mass restricts to distributions whose mass lies entirely on the two
// leading classes, the split the linear bound (1-tau)/2 is derived from and
// where it is tight. full searches every sorted grid distribution; there the
// worst case grows to (K-1)(1-tau)/K because the tail classes may each carry
// up to the runner-up probability, so the linear bound no longer covers it
// for K >= 3.
enum class SimplexDomain { top_two_mass, full };

// Exhaustive grid search for the largest achievable error 1 - p_(1) over
// sorted distributions with margin p_(1) - p_(2) >= tau. grid_step must
// divide 1 evenly. Throws resource_error when the enumeration would exceed
// the iteration budget.
double margin_bound_bruteforce(int num_classes, double tau, double grid_step,
                               SimplexDomain domain = SimplexDomain::top_two_mass);

} // namespace ladr

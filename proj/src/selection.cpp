#include "ladr/selection.hpp"

#include "ladr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ladr {

namespace {

constexpr double kFloorGuard = 1e-9;

// Indices sorted by descending key, ties by ascending index.
std::vector<int> sort_by_key_desc(std::span<const int> indices,
                                  const auto& key_of) {
    std::vector<int> order(indices.begin(), indices.end());
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ka = key_of(a);
        const double kb = key_of(b);
        if (ka != kb) return ka > kb;
        return a < b;
    });
    return order;
}

std::vector<int> take_sorted(std::vector<int> order, std::size_t k) {
    if (k > order.size()) k = order.size();
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace

double confidence_margin(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("confidence_margin: empty distribution");
    if (probs.size() == 1) return probs[0];
    double top1 = -1.0, top2 = -1.0;
    for (double p : probs) {
        if (p > top1) {
            top2 = top1;
            top1 = p;
        } else if (p > top2) {
            top2 = p;
        }
    }
    return top1 - top2;
}

double margin_error_bound(double tau) {
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("margin_error_bound: tau outside [0,1]");
    return (1.0 - tau) / 2.0;
}

MaskGrid standard_select(std::span<const double> top1_confidence,
                         const MaskGrid& mask, long long n_mask) {
    if (top1_confidence.size() != static_cast<std::size_t>(mask.size())) {
        throw std::invalid_argument("standard_select: confidence length != grid size");
    }
    std::vector<int> masked;
    for (int i = 0; i < mask.size(); ++i) {
        if (mask.test(i)) masked.push_back(i);
    }
    const long long m = static_cast<long long>(masked.size());
    if (n_mask < 0 || n_mask > m) {
        throw std::invalid_argument("standard_select: n_mask " + std::to_string(n_mask) +
                                    " outside [0, " + std::to_string(m) + "]");
    }
    const auto order = sort_by_key_desc(masked, [&](int i) { return top1_confidence[static_cast<std::size_t>(i)]; });
    MaskGrid out(mask.height(), mask.width(), false);
    // The least-confident n_mask positions stay masked.
    for (std::size_t j = static_cast<std::size_t>(m - n_mask); j < order.size(); ++j) {
        out.set(order[j], true);
    }
    return out;
}

std::vector<int> rescue_select(std::span<const double> candidate_margins,
                               std::span<const int> candidates,
                               double alpha, std::optional<double> tau) {
    if (candidate_margins.size() != candidates.size()) {
        throw std::invalid_argument("rescue_select: margins/candidates length mismatch");
    }
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("rescue_select: alpha outside [0,1]");
    if (candidates.empty()) return {};

    const std::size_t budget = static_cast<std::size_t>(
        std::floor(static_cast<double>(candidates.size()) * alpha + kFloorGuard));
    if (budget == 0) return {};

    std::vector<std::size_t> slots;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        if (!tau || candidate_margins[j] > *tau) slots.push_back(j);
    }
    std::stable_sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
        if (candidate_margins[a] != candidate_margins[b]) {
            return candidate_margins[a] > candidate_margins[b];
        }
        return candidates[a] < candidates[b];
    });
    std::vector<int> picked;
    picked.reserve(std::min(budget, slots.size()));
    for (std::size_t j = 0; j < slots.size() && picked.size() < budget; ++j) {
        picked.push_back(candidates[slots[j]]);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<int> ablation_select(AblationKind kind, std::size_t budget,
                                 const SelectionState& state, rng_engine& rng) {
    if (budget == 0) return {};
    const auto margin_key = [&](int i) { return state.margin[static_cast<std::size_t>(i)]; };
    const auto top1_key = [&](int i) { return state.top1[static_cast<std::size_t>(i)]; };

    switch (kind) {
    case AblationKind::random_masked:
        return sample_without_replacement(rng, state.masked, budget);

    case AblationKind::non_neighbor_first: {
        std::vector<int> isolated;
        for (int i : state.masked) {
            if (!std::binary_search(state.frontier.begin(), state.frontier.end(), i)) {
                isolated.push_back(i);
            }
        }
        auto picks = take_sorted(sort_by_key_desc(isolated, margin_key),
                                 std::min(budget, isolated.size()));
        if (picks.size() < budget) {
            // Non-neighbor pool exhausted: fall back to frontier margins.
            auto extra = take_sorted(sort_by_key_desc(state.frontier, margin_key),
                                     budget - picks.size());
            picks.insert(picks.end(), extra.begin(), extra.end());
            std::sort(picks.begin(), picks.end());
        }
        return picks;
    }

    case AblationKind::top1_confidence:
        return take_sorted(sort_by_key_desc(state.frontier, top1_key), budget);

    case AblationKind::random_neighbor:
        return sample_without_replacement(rng, state.frontier, budget);
    }
    throw std::invalid_argument("ablation_select: unknown kind");
}

double margin_bound_bruteforce(int num_classes, double tau, double grid_step,
                               SimplexDomain domain) {
    if (num_classes < 2) throw std::invalid_argument("margin_bound_bruteforce: need K >= 2");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("margin_bound_bruteforce: tau outside [0,1]");
    const double units = 1.0 / grid_step;
    const long long m = std::llround(units);
    if (!(grid_step > 0.0) || std::abs(units - static_cast<double>(m)) > 1e-6) {
        throw std::invalid_argument("margin_bound_bruteforce: grid_step must divide 1 evenly");
    }
    // Smallest integer margin d with d/m >= tau.
    const long long d_min = static_cast<long long>(
        std::ceil(tau * static_cast<double>(m) - 1e-9));

    if (domain == SimplexDomain::full) {
        // Sorted-composition count grows like m^(K-1); refuse runaway grids.
        double estimate = 1.0;
        for (int i = 1; i < num_classes; ++i) estimate *= static_cast<double>(m + 1);
        if (estimate > 2e8) {
            throw resource_error("margin_bound_bruteforce: enumeration budget exceeded for K=" +
                                 std::to_string(num_classes) + " at grid_step " +
                                 std::to_string(grid_step));
        }
    }

    long long best_p1 = -1;

    if (domain == SimplexDomain::top_two_mass) {
        // All mass on the two leading classes: p1 + p2 = 1.
        for (long long p1 = (m + 1) / 2; p1 <= m; ++p1) {
            const long long p2 = m - p1;
            if (p2 > p1) continue;
            if (p1 - p2 < d_min) continue;
            if (best_p1 < 0 || p1 < best_p1) best_p1 = p1;
        }
    } else {
        // Depth-first enumeration of sorted compositions p1 >= p2 >= ... >= pK.
        std::vector<long long> parts(static_cast<std::size_t>(num_classes), 0);
        auto recurse = [&](auto&& self, int slot, long long remaining, long long cap) -> void {
            if (slot == num_classes - 1) {
                if (remaining <= cap) {
                    parts[static_cast<std::size_t>(slot)] = remaining;
                    if (parts[0] - parts[1] >= d_min &&
                        (best_p1 < 0 || parts[0] < best_p1)) {
                        best_p1 = parts[0];
                    }
                }
                return;
            }
            // Sortedness lower-bounds this slot at ceil(remaining / slots_left).
            const long long slots_left = num_classes - slot;
            const long long lo = (remaining + slots_left - 1) / slots_left;
            long long hi = std::min(cap, remaining);
            if (slot == 1) hi = std::min(hi, parts[0] - d_min); // margin prune
            for (long long v = hi; v >= lo; --v) {
                parts[static_cast<std::size_t>(slot)] = v;
                self(self, slot + 1, remaining - v, v);
            }
        };
        recurse(recurse, 0, m, m);
    }

    if (best_p1 < 0) return 0.0; // nothing satisfies the margin: no achievable error
    return 1.0 - static_cast<double>(best_p1) / static_cast<double>(m);
}

} // namespace ladr

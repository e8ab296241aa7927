#include "ladr/selection.hpp"

#include "ladr/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace ladr;

TEST_CASE("confidence_margin is top1 minus top2") {
    CHECK(confidence_margin(std::vector<double>{0.7, 0.2, 0.1}) == doctest::Approx(0.5));
    CHECK(confidence_margin(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(0.0));
    CHECK(confidence_margin(std::vector<double>{1.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(confidence_margin(std::vector<double>{1.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(confidence_margin(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("margin_error_bound is (1 - tau)/2") {
    CHECK(margin_error_bound(0.5) == doctest::Approx(0.25));
    CHECK(margin_error_bound(1.0) == doctest::Approx(0.0));
    CHECK(margin_error_bound(0.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(margin_error_bound(1.5), std::invalid_argument);
}

TEST_CASE("standard_select keeps the least-confident masked") {
    const MaskGrid mask(2, 2, true);
    const std::vector<double> top1{0.9, 0.2, 0.7, 0.4};

    const MaskGrid two = standard_select(top1, mask, 2);
    CHECK_FALSE(two.test(0));
    CHECK(two.test(1));
    CHECK_FALSE(two.test(2));
    CHECK(two.test(3));

    CHECK(standard_select(top1, mask, 0).count() == 0);
    CHECK(standard_select(top1, mask, 4) == mask);
    CHECK_THROWS_AS(standard_select(top1, mask, 5), std::invalid_argument);
}

TEST_CASE("standard_select never re-masks observed positions") {
    MaskGrid mask(3, 3, true);
    mask.set(1, false);
    mask.set(6, false);
    const std::vector<double> top1{0.1, 1.0, 0.3, 0.8, 0.2, 0.9, 1.0, 0.5, 0.6};
    for (long long keep = 0; keep <= 7; ++keep) {
        const MaskGrid out = standard_select(top1, mask, keep);
        CHECK_FALSE(out.test(1));
        CHECK_FALSE(out.test(6));
        CHECK(out.count() == keep);
        for (int i = 0; i < 9; ++i) {
            if (out.test(i)) REQUIRE(mask.test(i));
        }
    }
}

TEST_CASE("rescue_select budget, threshold and top-k semantics") {
    const std::vector<int> candidates{4, 9, 13};
    const std::vector<double> margins{0.3, 0.01, 0.2};

    CHECK(rescue_select(margins, candidates, 0.3, 0.05).empty()); // floor(0.9) = 0

    const auto all = rescue_select(margins, candidates, 1.0, std::nullopt);
    CHECK(all == candidates);

    const auto two = rescue_select(margins, candidates, 0.67, 0.05); // floor(2.01) = 2
    CHECK(two == std::vector<int>{4, 13});
}

TEST_CASE("rescue_select invariants over random inputs") {
    rng_engine rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + bounded_uniform(rng, 40);
        std::vector<int> candidates;
        std::vector<double> margins;
        for (std::size_t i = 0; i < n; ++i) {
            candidates.push_back(static_cast<int>(i * 2));
            margins.push_back(canonical_double(rng));
        }
        const double alpha = canonical_double(rng);
        const bool with_tau = trial % 2 == 0;
        const std::optional<double> tau =
            with_tau ? std::optional<double>(canonical_double(rng)) : std::nullopt;
        const auto picked = rescue_select(margins, candidates, alpha, tau);

        REQUIRE(picked.size() <= static_cast<std::size_t>(std::floor(n * alpha + 1e-9)));
        for (int idx : picked) {
            const auto it = std::find(candidates.begin(), candidates.end(), idx);
            REQUIRE(it != candidates.end());
            if (tau) REQUIRE(margins[static_cast<std::size_t>(it - candidates.begin())] > *tau);
        }
    }
}

namespace {

SelectionState fixed_state(const std::vector<int>& masked, const std::vector<int>& front,
                           const std::vector<double>& margin, const std::vector<double>& top1) {
    return SelectionState{masked, front, margin, top1};
}

} // namespace

TEST_CASE("ablation_select covers its four selectors") {
    const std::vector<int> masked{0, 2, 3, 5, 7, 8, 10, 12, 13, 15};
    const std::vector<int> front{2, 3, 5, 7, 8, 10};
    std::vector<double> margin(16), top1(16);
    for (int i = 0; i < 16; ++i) {
        margin[static_cast<std::size_t>(i)] = 0.01 * i;
        top1[static_cast<std::size_t>(i)] = 0.3 + 0.02 * i;
    }
    const SelectionState state = fixed_state(masked, front, margin, top1);

    SUBCASE("zero budget returns nothing for every kind") {
        rng_engine rng(7);
        for (auto kind : {AblationKind::random_masked, AblationKind::non_neighbor_first,
                          AblationKind::top1_confidence, AblationKind::random_neighbor}) {
            CHECK(ablation_select(kind, 0, state, rng).empty());
        }
    }

    SUBCASE("seed-7 draws are pinned") {
        // Golden values generated once under the pinned engine and frozen.
        rng_engine rng(7);
        CHECK(ablation_select(AblationKind::random_masked, 4, state, rng) ==
              std::vector<int>{0, 8, 12, 13});
        rng_engine rng2(7);
        CHECK(ablation_select(AblationKind::random_neighbor, 4, state, rng2) ==
              std::vector<int>{2, 3, 7, 8});
    }

    SUBCASE("non_neighbor_first prefers isolated cells then falls back") {
        rng_engine rng(1);
        // Isolated = masked minus frontier = {0, 12, 13, 15}; top margins first.
        CHECK(ablation_select(AblationKind::non_neighbor_first, 3, state, rng) ==
              std::vector<int>{12, 13, 15});
        // Budget 6 exhausts the isolated pool and pulls {8, 10} from the frontier.
        CHECK(ablation_select(AblationKind::non_neighbor_first, 6, state, rng) ==
              std::vector<int>{0, 8, 10, 12, 13, 15});
    }

    SUBCASE("top1_confidence ranks the frontier by top-1 probability") {
        rng_engine rng(1);
        CHECK(ablation_select(AblationKind::top1_confidence, 2, state, rng) ==
              std::vector<int>{8, 10});
    }

    SUBCASE("budgets beyond the pool return the whole pool") {
        rng_engine rng(3);
        CHECK(ablation_select(AblationKind::random_neighbor, 99, state, rng) == front);
        rng_engine rng2(3);
        CHECK(ablation_select(AblationKind::random_masked, 99, state, rng2) == masked);
    }
}

TEST_CASE("margin bound brute force on the two-class split") {
    CHECK(margin_bound_bruteforce(2, 0.2, 0.01) == doctest::Approx(0.40));
    CHECK(margin_bound_bruteforce(3, 0.5, 0.01) == doctest::Approx(0.25));
    CHECK(margin_bound_bruteforce(2, 1.0, 0.01) == doctest::Approx(0.0));
    CHECK(margin_bound_bruteforce(2, 1.0, 0.05) == doctest::Approx(0.0));
}

TEST_CASE("two-class-split search stays within one grid step of the bound") {
    for (int k = 2; k <= 4; ++k) {
        for (int i = 1; i <= 18; ++i) {
            const double tau = 0.05 * i;
            const double brute = margin_bound_bruteforce(k, tau, 0.01);
            const double bound = margin_error_bound(tau);
            REQUIRE(brute <= bound + 0.01);
            REQUIRE(bound - brute <= 0.01);
        }
    }
}

TEST_CASE("full-simplex search exposes the heavier-tail worst case") {
    // With mass allowed on trailing classes the achievable error is
    // (K-1)(1-tau)/K, strictly above (1-tau)/2 once K >= 3.
    CHECK(margin_bound_bruteforce(2, 0.3, 0.01, SimplexDomain::full) ==
          doctest::Approx(margin_bound_bruteforce(2, 0.3, 0.01)));
    CHECK(margin_bound_bruteforce(3, 0.5, 0.01, SimplexDomain::full) ==
          doctest::Approx(1.0 / 3.0).epsilon(0.02));
    for (int k = 3; k <= 4; ++k) {
        for (double tau : {0.1, 0.3, 0.5, 0.7}) {
            const double full = margin_bound_bruteforce(k, tau, 0.01, SimplexDomain::full);
            const double closed_form = (k - 1) * (1.0 - tau) / k;
            REQUIRE(std::abs(full - closed_form) <= 0.02);
            REQUIRE(full > margin_error_bound(tau) + 0.01);
        }
    }
}

TEST_CASE("margin brute force rejects bad inputs and runaway grids") {
    CHECK_THROWS_AS(margin_bound_bruteforce(1, 0.5, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(margin_bound_bruteforce(2, 0.5, 0.003), std::invalid_argument); // 1/0.003 not integral
    CHECK_THROWS_AS(margin_bound_bruteforce(4, 0.5, 1e-4, SimplexDomain::full), resource_error);
}

TEST_CASE("softmax token ordering is invariant under uniform logit scaling") {
    rng_engine rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + static_cast<int>(bounded_uniform(rng, 7));
        std::vector<double> logits(static_cast<std::size_t>(k));
        for (auto& l : logits) l = 4.0 * canonical_double(rng) - 2.0;
        const double scale = 0.1 + 5.0 * canonical_double(rng);

        const auto softmax = [](const std::vector<double>& ls) {
            std::vector<double> p(ls.size());
            double mx = *std::max_element(ls.begin(), ls.end());
            double z = 0.0;
            for (std::size_t i = 0; i < ls.size(); ++i) z += p[i] = std::exp(ls[i] - mx);
            for (auto& v : p) v /= z;
            return p;
        };
        const auto rank_of = [](const std::vector<double>& p) {
            std::vector<std::size_t> order(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
            return order;
        };

        std::vector<double> scaled(logits);
        for (auto& l : scaled) l *= scale;
        REQUIRE(rank_of(softmax(logits)) == rank_of(softmax(scaled)));
    }
}

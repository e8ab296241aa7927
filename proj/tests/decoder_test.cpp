#include "ladr/decoder.hpp"

#include "ladr/errors.hpp"
#include "ladr/harness.hpp"
#include "ladr/verify.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <vector>

using namespace ladr;

namespace {

DecodeConfig small_config(int h, int w, int k, int steps, Strategy strategy,
                          std::uint64_t seed) {
    DecodeConfig cfg;
    cfg.height = h;
    cfg.width = w;
    cfg.vocab = k;
    cfg.schedule = Schedule(ScheduleKind::cosine, steps);
    cfg.strategy = strategy;
    cfg.seed = seed;
    return cfg;
}

std::unique_ptr<Denoiser> planted_for(const DecodeConfig& cfg, std::uint64_t target_seed = 1001) {
    DenoiserSpec spec;
    spec.kind = "planted";
    spec.target_seed = target_seed;
    return make_denoiser(spec, cfg);
}

} // namespace

TEST_CASE("an all-observed initial state needs no forward passes") {
    const DecodeConfig cfg = small_config(2, 2, 4, 8, Strategy::ladr, 1);
    const auto denoiser = planted_for(cfg);
    TokenSequence tokens;
    tokens.vocab = 4;
    tokens.mask_id = -1;
    tokens.values = {1, 2, 3, 0};
    const DecodeResult result =
        decode_from(*denoiser, cfg, tokens, MaskGrid(2, 2, false));
    CHECK(result.nfe == 0);
    CHECK(result.trace.empty());
    CHECK(result.tokens.values == std::vector<std::int32_t>{1, 2, 3, 0});
}

TEST_CASE("1x1 grid with T=4 decodes in one forward") {
    const DecodeConfig cfg = small_config(1, 1, 4, 4, Strategy::standard, 1);
    const auto denoiser = planted_for(cfg);
    const DecodeResult result = decode(*denoiser, cfg);
    REQUIRE(result.nfe == 1);
    // Hand arithmetic: t_next = 0.25, floor(1 * cos(pi/8)) = 0, so the single
    // token unmasks immediately.
    CHECK(result.trace[0].t_next == doctest::Approx(0.25));
    CHECK(result.trace[0].n_mask_target == 0);
    CHECK(result.trace[0].standard_unmasked == 1);
    CHECK_FALSE(result.tokens.is_masked_value(result.tokens.values[0]));
}

TEST_CASE("2x2 grid with T=2 follows the scheduled arithmetic") {
    const DecodeConfig cfg = small_config(2, 2, 4, 2, Strategy::standard, 1);
    const auto denoiser = planted_for(cfg);
    const DecodeResult result = decode(*denoiser, cfg);
    REQUIRE(result.nfe == 2);

    // Step 0: rho=1, t_eff=0, t_next=0.5, n_mask = floor(4 * 0.70711) = 2.
    CHECK(result.trace[0].t_next == doctest::Approx(0.5));
    CHECK(result.trace[0].n_mask_target == 2);
    CHECK(result.trace[0].standard_unmasked == 2);

    // Step 1: t_eff = (2/pi) arccos(0.5) = 2/3, t_next clamps to 1, target 0.
    CHECK(result.trace[1].t_eff == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(result.trace[1].t_next == doctest::Approx(1.0));
    CHECK(result.trace[1].n_mask_target == 0);
    CHECK(result.trace[1].rho_after == doctest::Approx(0.0));
}

TEST_CASE("sample_tokens modes") {
    PosteriorBatch batch(2, 3);
    auto row0 = batch.row(0);
    row0[0] = 0.1; row0[1] = 0.7; row0[2] = 0.2;
    auto row1 = batch.row(1);
    row1[0] = 0.5; row1[1] = 0.5; row1[2] = 0.0;

    rng_engine rng(1);
    const auto greedy = sample_tokens(batch, SamplingMode::greedy, 1.0, rng);
    CHECK(greedy[0] == 1);
    CHECK(greedy[1] == 0); // tie resolves to the lowest index

    SUBCASE("near-zero temperature reproduces greedy draws") {
        PosteriorBatch sharp(1, 3);
        auto row = sharp.row(0);
        row[0] = 0.5; row[1] = 0.3; row[2] = 0.2;
        rng_engine crng(9);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto drawn = sample_tokens(sharp, SamplingMode::categorical, 0.01, crng);
            REQUIRE(drawn[0] == 0);
        }
    }

    SUBCASE("unit temperature matches the row distribution statistically") {
        PosteriorBatch biased(1, 2);
        auto row = biased.row(0);
        row[0] = 0.8; row[1] = 0.2;
        rng_engine crng(11);
        int zeros = 0;
        for (int trial = 0; trial < 5000; ++trial) {
            zeros += sample_tokens(biased, SamplingMode::categorical, 1.0, crng)[0] == 0;
        }
        CHECK(zeros > 3800);
        CHECK(zeros < 4200);
    }
}

TEST_CASE("decode loop invariants hold over randomized runs") {
    rng_engine meta(77);
    for (int trial = 0; trial < 40; ++trial) {
        const int h = 2 + static_cast<int>(bounded_uniform(meta, 9));
        const int w = 2 + static_cast<int>(bounded_uniform(meta, 9));
        const int k = 2 + static_cast<int>(bounded_uniform(meta, 6));
        const int steps = 2 + static_cast<int>(bounded_uniform(meta, 40));
        const auto strategy = static_cast<Strategy>(bounded_uniform(meta, 6));
        DecodeConfig cfg = small_config(h, w, k, steps, strategy, meta());
        if (trial % 3 == 0) {
            cfg.sampling = SamplingMode::categorical;
            cfg.temperature = 0.5 + canonical_double(meta);
        }

        DenoiserSpec spec;
        if (trial % 2 == 0) {
            spec.kind = "planted";
            spec.target_seed = meta();
        } else {
            spec.kind = "potts";
            spec.beta = 2.0 * canonical_double(meta);
        }
        const auto denoiser = make_denoiser(spec, cfg);

        std::map<int, std::int32_t> committed;
        long long observed_steps = 0;
        const bool frontier_bound = strategy == Strategy::ladr ||
                                    strategy == Strategy::top1_confidence ||
                                    strategy == Strategy::random_neighbor;
        const DecodeResult result = decode(
            *denoiser, cfg, [&](const StepDebug& debug) {
                ++observed_steps;
                // Rescue soundness: rescued positions come from the frontier of
                // the post-selection mask (frontier-bound strategies) or at
                // least from its masked set, and the margin-filtered strategy
                // clears the threshold when one is in effect.
                for (int i : debug.rescue_set) {
                    if (frontier_bound) {
                        REQUIRE(std::binary_search(debug.frontier_set.begin(),
                                                   debug.frontier_set.end(), i));
                    }
                    REQUIRE(debug.mask_after_standard.test(i));
                    REQUIRE_FALSE(debug.mask_after.test(i));
                    if (strategy == Strategy::ladr && debug.tau) {
                        REQUIRE(debug.margin[static_cast<std::size_t>(i)] > *debug.tau);
                    }
                }
                for (int i : debug.frontier_set) {
                    REQUIRE(debug.mask_after_standard.test(i));
                    REQUIRE(debug.mask_before.test(i));
                }
                // Commit immutability: once a value lands it never changes.
                for (int i = 0; i < debug.mask_after.size(); ++i) {
                    if (debug.mask_after.test(i)) continue;
                    const std::int32_t value = debug.tokens_after.values[static_cast<std::size_t>(i)];
                    const auto it = committed.find(i);
                    if (it == committed.end()) {
                        committed.emplace(i, value);
                    } else {
                        REQUIRE(it->second == value);
                    }
                }
                // Strict progress.
                REQUIRE(debug.record.rho_after < debug.record.rho_before);
            });

        REQUIRE(result.nfe <= steps + 1);
        REQUIRE(result.nfe == static_cast<long long>(result.trace.size()));
        REQUIRE(observed_steps == result.nfe);
        for (std::int32_t v : result.tokens.values) {
            REQUIRE_FALSE(result.tokens.is_masked_value(v));
        }
        for (const auto& [pos, value] : committed) {
            REQUIRE(result.tokens.values[static_cast<std::size_t>(pos)] == value);
        }

        const TraceCheck check = check_trace_consistency(result.trace, cfg.schedule, h * w);
        REQUIRE_MESSAGE(check.ok, check.message);
    }
}

TEST_CASE("rescue only fires for strategies that rescue") {
    DecodeConfig cfg = small_config(8, 8, 8, 16, Strategy::standard, 3);
    const auto denoiser = planted_for(cfg);
    const DecodeResult standard = decode(*denoiser, cfg);
    for (const StepRecord& rec : standard.trace) CHECK(rec.rescued == 0);

    cfg.strategy = Strategy::ladr;
    const auto denoiser2 = planted_for(cfg);
    const DecodeResult ladr_run = decode(*denoiser2, cfg);
    long long total = 0;
    for (const StepRecord& rec : ladr_run.trace) total += rec.rescued;
    CHECK(total > 0);
    CHECK(ladr_run.nfe <= standard.nfe);
}

TEST_CASE("count-level dominance holds for sampled configs") {
    rng_engine meta(123);
    for (int trial = 0; trial < 12; ++trial) {
        const int h = 4 + static_cast<int>(bounded_uniform(meta, 12));
        const int w = 4 + static_cast<int>(bounded_uniform(meta, 12));
        const int steps = 8 + static_cast<int>(bounded_uniform(meta, 56));
        DecodeConfig cfg = small_config(h, w, 6, steps, Strategy::standard, meta());
        DenoiserSpec spec;
        spec.kind = trial % 2 == 0 ? "planted" : "potts";
        spec.target_seed = meta();
        spec.beta = 1.0;

        const auto d1 = make_denoiser(spec, cfg);
        const long long standard_nfe = decode(*d1, cfg).nfe;
        cfg.strategy = Strategy::ladr;
        const auto d2 = make_denoiser(spec, cfg);
        const long long ladr_nfe = decode(*d2, cfg).nfe;
        REQUIRE(ladr_nfe <= standard_nfe);
    }
}

TEST_CASE("the masked-count recursion is monotone in the masked count") {
    rng_engine meta(321);
    for (int trial = 0; trial < 50; ++trial) {
        const long long n = 4 + static_cast<long long>(bounded_uniform(meta, 1020));
        const Schedule sched(trial % 2 == 0 ? ScheduleKind::cosine : ScheduleKind::linear,
                             1 + static_cast<int>(bounded_uniform(meta, 127)));
        long long prev = -1;
        for (long long m = 1; m <= n; m += 1 + static_cast<long long>(bounded_uniform(meta, 7))) {
            const double rho = static_cast<double>(m) / static_cast<double>(n);
            const Timestep t_eff = gamma_inv(sched, MaskFraction(rho));
            const long long next = target_mask_count(sched, n, next_timestep(sched, t_eff));
            REQUIRE(next >= prev);
            REQUIRE(next < m);
            prev = next;
        }
    }
}

TEST_CASE("mask trajectory ignores the sampling temperature with a planted oracle") {
    // Margins are computed from the raw posterior, so the selection sequence
    // (and with it every trace count) is temperature-independent; only token
    // draws change.
    DecodeConfig greedy_cfg = small_config(8, 8, 8, 16, Strategy::ladr, 5);
    const auto d1 = planted_for(greedy_cfg);
    const DecodeResult greedy_run = decode(*d1, greedy_cfg);

    DecodeConfig hot_cfg = greedy_cfg;
    hot_cfg.sampling = SamplingMode::categorical;
    hot_cfg.temperature = 2.5;
    const auto d2 = planted_for(hot_cfg);
    const DecodeResult hot_run = decode(*d2, hot_cfg);

    REQUIRE(greedy_run.nfe == hot_run.nfe);
    for (std::size_t i = 0; i < greedy_run.trace.size(); ++i) {
        CHECK(greedy_run.trace[i].standard_unmasked == hot_run.trace[i].standard_unmasked);
        CHECK(greedy_run.trace[i].rescued == hot_run.trace[i].rescued);
        CHECK(greedy_run.trace[i].frontier_size == hot_run.trace[i].frontier_size);
    }
}

TEST_CASE("decode validates dimensions and propagates replay exhaustion") {
    DecodeConfig cfg = small_config(4, 4, 4, 8, Strategy::ladr, 1);
    DecodeConfig other = small_config(5, 4, 4, 8, Strategy::ladr, 1);
    const auto denoiser = planted_for(other);
    CHECK_THROWS_AS(decode(*denoiser, cfg), config_error);

    std::ostringstream replay;
    replay << "{\"version\":1,\"N\":16,\"K\":4,\"T\":1}\n{\"step\":0,\"probs\":[";
    for (int i = 0; i < 64; ++i) replay << 0.25 << (i + 1 < 64 ? "," : "");
    replay << "]}\n";
    std::istringstream in(replay.str());
    ReplayDenoiser short_replay(in);
    CHECK_THROWS_AS(decode(short_replay, cfg), replay_exhausted_error);
}

TEST_CASE("decode config validation") {
    DecodeConfig cfg;
    cfg.mask_id = 3;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.mask_id = -1;
    cfg.temperature = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.temperature = 1.0;
    cfg.vocab = 1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

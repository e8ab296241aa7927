#pragma once

#include "ladr/grid.hpp"
#include "ladr/schedule.hpp"

#include <cstdint>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ladr {

// Token values over the grid plus the vocabulary they are drawn from.
// values[i] == mask_id marks a not-yet-decoded position and must agree with
// the accompanying MaskGrid; mask_id lies outside [0, vocab).
struct TokenSequence {
    std::vector<std::int32_t> values;
    std::int32_t vocab = 0;
    std::int32_t mask_id = -1;

    bool is_masked_value(std::int32_t v) const { return v < 0 || v >= vocab; }
};

// Per-position categorical distribution over the vocabulary, row-major.
class PosteriorBatch {
public:
    PosteriorBatch(int positions, int vocab);

    std::span<double> row(int i) {
        return {probs_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(vocab_),
                static_cast<std::size_t>(vocab_)};
    }
    std::span<const double> row(int i) const {
        return {probs_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(vocab_),
                static_cast<std::size_t>(vocab_)};
    }

    int positions() const { return n_; }
    int vocab() const { return vocab_; }

private:
    int n_;
    int vocab_;
    std::vector<double> probs_;
};

// Behavioural contract shared by every backend: given the current tokens and
// mask, return a posterior row per position. Rows at observed positions are
// one-hot on the committed token. Deterministic given identical inputs;
// stochastic backends take their seed at construction.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual PosteriorBatch predict(const TokenSequence& tokens, const MaskGrid& mask,
                                   Timestep t) = 0;

    virtual int positions() const = 0;
    virtual int vocab() const = 0;
};

// Synthetic stand-in with a fixed ground-truth grid. At a masked position
// with n observed cells in its kernel window, the target token receives
// probability min(0.999, base + gain * n) and the remainder spreads
// uniformly over the other vocab-1 tokens. Confidence therefore grows with
// local observed context, which is the behaviour frontier-driven selection
// exploits. Stateless after construction; safe to share across runs.
class PlantedOracleDenoiser final : public Denoiser {
public:
    PlantedOracleDenoiser(TokenSequence target, int height, int width,
                          double base, double gain, Kernel kernel = Kernel(3));

    PosteriorBatch predict(const TokenSequence& tokens, const MaskGrid& mask,
                           Timestep t) override;

    int positions() const override { return height_ * width_; }
    int vocab() const override { return target_.vocab; }

    const TokenSequence& target() const { return target_; }

private:
    TokenSequence target_;
    int height_;
    int width_;
    double base_;
    double gain_;
    Kernel kernel_;
};

// Local conditional of a ferromagnetic Potts field on the 4-neighbour
// lattice: at a masked position, p(v) is proportional to exp(beta * c_v)
// with c_v the count of observed 4-neighbours carrying token v; uniform when
// no 4-neighbour is observed. This matches the exact conditional whenever
// the full neighbourhood is observed. Stateless after construction.
class PottsDenoiser final : public Denoiser {
public:
    PottsDenoiser(int height, int width, int vocab, double beta);

    PosteriorBatch predict(const TokenSequence& tokens, const MaskGrid& mask,
                           Timestep t) override;

    int positions() const override { return height_ * width_; }
    int vocab() const override { return vocab_; }

private:
    int height_;
    int width_;
    int vocab_;
    double beta_;
};

// One grid drawn by systematic-scan Gibbs sampling from the Potts
// distribution p(z) proportional to exp(beta * #{equal 4-neighbour pairs}),
// starting from seeded uniform tokens. Deterministic given the seed.
TokenSequence gibbs_sample_potts(int height, int width, int vocab, double beta,
                                 int sweeps, std::uint64_t seed);

// Replays posteriors stored in a line-delimited text file: line 1 is a JSON
// header {"version":1,"N":..,"K":..,"T":..}, each further line one record
// {"step":i,"probs":[N*K row-major reals]} with steps increasing from 0.
// Forward-only and single-consumer: one decode run owns the stream. Rows are
// renormalized when their sum strays from 1 by at most 1e-4 and rejected
// beyond that.
class ReplayDenoiser final : public Denoiser {
public:
    explicit ReplayDenoiser(const std::string& path);
    // Caller keeps the stream alive for the denoiser's lifetime.
    explicit ReplayDenoiser(std::istream& in);

    PosteriorBatch predict(const TokenSequence& tokens, const MaskGrid& mask,
                           Timestep t) override;

    int positions() const override { return n_; }
    int vocab() const override { return vocab_; }
    int declared_steps() const { return declared_steps_; }

private:
    void read_header();

    std::unique_ptr<std::istream> owned_;
    std::istream* in_ = nullptr;
    int n_ = 0;
    int vocab_ = 0;
    int declared_steps_ = 0;
    int next_step_ = 0;
};

} // namespace ladr

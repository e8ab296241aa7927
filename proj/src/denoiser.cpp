#include "ladr/denoiser.hpp"

#include "ladr/errors.hpp"
#include "ladr/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace ladr {

namespace {

// Shared by every backend: committed tokens carry probability one.
void fill_one_hot(PosteriorBatch& batch, int position, std::int32_t token) {
    auto row = batch.row(position);
    std::fill(row.begin(), row.end(), 0.0);
    row[static_cast<std::size_t>(token)] = 1.0;
}

void check_contract_inputs(const TokenSequence& tokens, const MaskGrid& mask,
                           int positions, int vocab, const char* who) {
    if (mask.size() != positions ||
        tokens.values.size() != static_cast<std::size_t>(positions)) {
        throw config_error(std::string(who) + ": grid size does not match backend");
    }
    if (tokens.vocab != vocab) {
        throw config_error(std::string(who) + ": vocabulary size does not match backend");
    }
    for (int i = 0; i < positions; ++i) {
        const std::int32_t v = tokens.values[static_cast<std::size_t>(i)];
        const bool ok = mask.test(i) ? (v == tokens.mask_id) : !tokens.is_masked_value(v);
        if (!ok) {
            throw config_error(std::string(who) + ": tokens and mask disagree at position " +
                               std::to_string(i));
        }
    }
}

} // namespace

PosteriorBatch::PosteriorBatch(int positions, int vocab)
    : n_(positions), vocab_(vocab),
      probs_(static_cast<std::size_t>(positions) * static_cast<std::size_t>(vocab), 0.0) {
    if (positions < 1 || vocab < 1) {
        throw std::invalid_argument("PosteriorBatch: dimensions must be positive");
    }
}

PlantedOracleDenoiser::PlantedOracleDenoiser(TokenSequence target, int height, int width,
                                             double base, double gain, Kernel kernel)
    : target_(std::move(target)), height_(height), width_(width),
      base_(base), gain_(gain), kernel_(kernel) {
    if (height < 1 || width < 1) throw config_error("PlantedOracleDenoiser: bad dimensions");
    if (target_.values.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw config_error("PlantedOracleDenoiser: target length != H*W");
    }
    if (target_.vocab < 2) throw config_error("PlantedOracleDenoiser: vocab must be >= 2");
    if (base_ < 0.0 || gain_ < 0.0) {
        throw config_error("PlantedOracleDenoiser: base and gain must be non-negative");
    }
    for (std::int32_t v : target_.values) {
        if (target_.is_masked_value(v)) {
            throw config_error("PlantedOracleDenoiser: target must be fully decoded");
        }
    }
}

PosteriorBatch PlantedOracleDenoiser::predict(const TokenSequence& tokens,
                                              const MaskGrid& mask, Timestep) {
    check_contract_inputs(tokens, mask, positions(), vocab(), "PlantedOracleDenoiser");
    PosteriorBatch batch(positions(), vocab());
    const double other_share = 1.0 / static_cast<double>(vocab() - 1);
    for (int i = 0; i < positions(); ++i) {
        if (!mask.test(i)) {
            fill_one_hot(batch, i, tokens.values[static_cast<std::size_t>(i)]);
            continue;
        }
        const int n = observed_neighbor_count(mask, i, kernel_);
        const double p_target = std::min(0.999, base_ + gain_ * static_cast<double>(n));
        auto row = batch.row(i);
        const double rest = (1.0 - p_target) * other_share;
        std::fill(row.begin(), row.end(), rest);
        row[static_cast<std::size_t>(target_.values[static_cast<std::size_t>(i)])] = p_target;
    }
    return batch;
}

PottsDenoiser::PottsDenoiser(int height, int width, int vocab, double beta)
    : height_(height), width_(width), vocab_(vocab), beta_(beta) {
    if (height < 1 || width < 1) throw config_error("PottsDenoiser: bad dimensions");
    if (vocab < 2) throw config_error("PottsDenoiser: vocab must be >= 2");
    if (beta < 0.0) throw config_error("PottsDenoiser: beta must be >= 0");
}

PosteriorBatch PottsDenoiser::predict(const TokenSequence& tokens, const MaskGrid& mask,
                                      Timestep) {
    check_contract_inputs(tokens, mask, positions(), vocab_, "PottsDenoiser");
    PosteriorBatch batch(positions(), vocab_);
    std::vector<int> counts(static_cast<std::size_t>(vocab_));
    const std::array<std::array<int, 2>, 4> offsets{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
    for (int i = 0; i < positions(); ++i) {
        if (!mask.test(i)) {
            fill_one_hot(batch, i, tokens.values[static_cast<std::size_t>(i)]);
            continue;
        }
        std::fill(counts.begin(), counts.end(), 0);
        int observed = 0;
        const int row_i = i / width_;
        const int col_i = i % width_;
        for (const auto& d : offsets) {
            const int rr = row_i + d[0];
            const int cc = col_i + d[1];
            if (rr < 0 || rr >= height_ || cc < 0 || cc >= width_) continue;
            const int j = rr * width_ + cc;
            if (mask.test(j)) continue;
            ++counts[static_cast<std::size_t>(tokens.values[static_cast<std::size_t>(j)])];
            ++observed;
        }
        auto out = batch.row(i);
        if (observed == 0) {
            std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(vocab_));
            continue;
        }
        double total = 0.0;
        for (int v = 0; v < vocab_; ++v) {
            out[static_cast<std::size_t>(v)] =
                std::exp(beta_ * static_cast<double>(counts[static_cast<std::size_t>(v)]));
            total += out[static_cast<std::size_t>(v)];
        }
        for (int v = 0; v < vocab_; ++v) out[static_cast<std::size_t>(v)] /= total;
    }
    return batch;
}

TokenSequence gibbs_sample_potts(int height, int width, int vocab, double beta,
                                 int sweeps, std::uint64_t seed) {
    if (height < 1 || width < 1) throw std::invalid_argument("gibbs_sample_potts: bad dimensions");
    if (vocab < 2) throw std::invalid_argument("gibbs_sample_potts: vocab must be >= 2");
    if (sweeps < 1) throw std::invalid_argument("gibbs_sample_potts: sweeps must be >= 1");

    rng_engine rng(seed);
    const int n = height * width;
    TokenSequence seq;
    seq.vocab = vocab;
    seq.mask_id = -1;
    seq.values.resize(static_cast<std::size_t>(n));
    for (auto& v : seq.values) {
        v = static_cast<std::int32_t>(bounded_uniform(rng, static_cast<std::uint64_t>(vocab)));
    }

    // exp(beta * c) for the possible equal-neighbour counts c in 0..4.
    std::array<double, 5> weight_of_count{};
    for (int c = 0; c <= 4; ++c) weight_of_count[static_cast<std::size_t>(c)] = std::exp(beta * c);

    std::vector<double> weights(static_cast<std::size_t>(vocab));
    std::vector<int> counts(static_cast<std::size_t>(vocab));
    const std::array<std::array<int, 2>, 4> offsets{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            std::fill(counts.begin(), counts.end(), 0);
            const int row = i / width;
            const int col = i % width;
            for (const auto& d : offsets) {
                const int rr = row + d[0];
                const int cc = col + d[1];
                if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
                ++counts[static_cast<std::size_t>(seq.values[static_cast<std::size_t>(rr * width + cc)])];
            }
            for (int v = 0; v < vocab; ++v) {
                weights[static_cast<std::size_t>(v)] =
                    weight_of_count[static_cast<std::size_t>(counts[static_cast<std::size_t>(v)])];
            }
            seq.values[static_cast<std::size_t>(i)] =
                static_cast<std::int32_t>(weighted_draw(rng, weights));
        }
    }
    return seq;
}

ReplayDenoiser::ReplayDenoiser(const std::string& path) {
    auto file = std::make_unique<std::ifstream>(path);
    if (!*file) throw io_error("ReplayDenoiser: cannot open " + path);
    owned_ = std::move(file);
    in_ = owned_.get();
    read_header();
}

ReplayDenoiser::ReplayDenoiser(std::istream& in) : in_(&in) { read_header(); }

void ReplayDenoiser::read_header() {
    std::string line;
    if (!std::getline(*in_, line)) throw format_error("ReplayDenoiser: missing header line");
    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        throw format_error("ReplayDenoiser: header is not a JSON object");
    }
    if (header.value("version", 0) != 1) {
        throw format_error("ReplayDenoiser: unsupported version");
    }
    n_ = header.value("N", 0);
    vocab_ = header.value("K", 0);
    declared_steps_ = header.value("T", 0);
    if (n_ < 1 || vocab_ < 1) throw format_error("ReplayDenoiser: bad header dimensions");
}

PosteriorBatch ReplayDenoiser::predict(const TokenSequence& tokens, const MaskGrid& mask,
                                       Timestep) {
    check_contract_inputs(tokens, mask, n_, vocab_, "ReplayDenoiser");

    std::string line;
    do {
        if (!std::getline(*in_, line)) {
            throw replay_exhausted_error("ReplayDenoiser: no record for step " +
                                         std::to_string(next_step_));
        }
    } while (line.empty());

    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
        throw format_error("ReplayDenoiser: record is not a JSON object");
    }
    if (record.value("step", -1) != next_step_) {
        throw format_error("ReplayDenoiser: expected step " + std::to_string(next_step_));
    }
    const auto& probs = record.at("probs");
    if (!probs.is_array() ||
        probs.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(vocab_)) {
        throw format_error("ReplayDenoiser: record dimensions do not match header");
    }
    ++next_step_;

    PosteriorBatch batch(n_, vocab_);
    for (int i = 0; i < n_; ++i) {
        if (!mask.test(i)) {
            fill_one_hot(batch, i, tokens.values[static_cast<std::size_t>(i)]);
            continue;
        }
        auto row = batch.row(i);
        double sum = 0.0;
        for (int v = 0; v < vocab_; ++v) {
            const double p =
                probs[static_cast<std::size_t>(i) * static_cast<std::size_t>(vocab_) +
                      static_cast<std::size_t>(v)].get<double>();
            if (p < 0.0) throw format_error("ReplayDenoiser: negative probability");
            row[static_cast<std::size_t>(v)] = p;
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-4) {
            throw format_error("ReplayDenoiser: row " + std::to_string(i) +
                               " sums to " + std::to_string(sum));
        }
        for (int v = 0; v < vocab_; ++v) row[static_cast<std::size_t>(v)] /= sum;
    }
    return batch;
}

} // namespace ladr

#include "ladr/verify.hpp"

#include "ladr/denoiser.hpp"
#include "ladr/errors.hpp"
#include "ladr/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ladr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Plug-in mutual information in bits with the Miller-Madow correction:
// the raw plug-in estimate carries a positive bias of roughly
// (occupied_joint - occupied_x - occupied_y + 1) / (2 n ln 2) bits, which the
// correction removes so independent variables estimate near zero.
double corrected_mi_bits(const std::vector<long long>& joint, std::size_t x_levels,
                         std::size_t y_levels, long long n) {
    std::vector<long long> x_marg(x_levels, 0), y_marg(y_levels, 0);
    for (std::size_t x = 0; x < x_levels; ++x) {
        for (std::size_t y = 0; y < y_levels; ++y) {
            const long long c = joint[x * y_levels + y];
            x_marg[x] += c;
            y_marg[y] += c;
        }
    }
    const double dn = static_cast<double>(n);
    double mi = 0.0;
    long long occupied_joint = 0, occupied_x = 0, occupied_y = 0;
    for (std::size_t x = 0; x < x_levels; ++x) {
        if (x_marg[x] > 0) ++occupied_x;
        for (std::size_t y = 0; y < y_levels; ++y) {
            const long long c = joint[x * y_levels + y];
            if (c == 0) continue;
            ++occupied_joint;
            const double pxy = static_cast<double>(c) / dn;
            const double px = static_cast<double>(x_marg[x]) / dn;
            const double py = static_cast<double>(y_marg[y]) / dn;
            mi += pxy * std::log2(pxy / (px * py));
        }
    }
    for (std::size_t y = 0; y < y_levels; ++y) {
        if (y_marg[y] > 0) ++occupied_y;
    }
    const double correction = static_cast<double>(occupied_joint - occupied_x - occupied_y + 1) /
                              (2.0 * dn * std::numbers::ln2);
    return mi - correction;
}

bool has_thin_cell(const std::vector<long long>& joint) {
    return std::any_of(joint.begin(), joint.end(), [](long long c) { return c < 5; });
}

} // namespace

MiReport mi_locality_check(const MiParams& params) {
    if (params.vocab < 2) throw std::invalid_argument("mi_locality_check: vocab must be >= 2");
    if (params.beta < 0.0) throw std::invalid_argument("mi_locality_check: beta must be >= 0");
    if (params.d_far < 2) {
        throw std::invalid_argument("mi_locality_check: d_far must be >= 2 so near and far are disjoint");
    }
    if (params.height < 2 * params.d_far + 1 || params.width < 2 * params.d_far + 1) {
        throw std::invalid_argument("mi_locality_check: grid must be at least (2*d_far+1) per side");
    }
    if (params.n_samples < 1000) throw std::invalid_argument("mi_locality_check: need >= 1000 samples");
    if (params.sweeps < 1) throw std::invalid_argument("mi_locality_check: sweeps must be >= 1");

    const int k = params.vocab;
    const int w = params.width;
    const int centre_row = params.height / 2;
    const int centre_col = w / 2;
    const int centre = centre_row * w + centre_col;
    const int far_cell = centre_row * w + centre_col + params.d_far;
    const std::array<int, 4> near_cells{centre - w, centre + w, centre - 1, centre + 1};

    const std::size_t near_levels = static_cast<std::size_t>(k) * k * k * k;
    const std::size_t far_levels = static_cast<std::size_t>(k);
    const std::size_t centre_levels = static_cast<std::size_t>(k);

    // Per-sample observations, kept for the bootstrap.
    std::vector<std::uint8_t> centre_obs(static_cast<std::size_t>(params.n_samples));
    std::vector<std::uint32_t> near_obs(static_cast<std::size_t>(params.n_samples));
    std::vector<std::uint8_t> far_obs(static_cast<std::size_t>(params.n_samples));

    for (long long s = 0; s < params.n_samples; ++s) {
        const TokenSequence grid =
            gibbs_sample_potts(params.height, params.width, k, params.beta, params.sweeps,
                               splitmix64(params.seed + static_cast<std::uint64_t>(s)));
        std::uint32_t code = 0;
        for (int cell : near_cells) {
            code = code * static_cast<std::uint32_t>(k) +
                   static_cast<std::uint32_t>(grid.values[static_cast<std::size_t>(cell)]);
        }
        centre_obs[static_cast<std::size_t>(s)] =
            static_cast<std::uint8_t>(grid.values[static_cast<std::size_t>(centre)]);
        near_obs[static_cast<std::size_t>(s)] = code;
        far_obs[static_cast<std::size_t>(s)] =
            static_cast<std::uint8_t>(grid.values[static_cast<std::size_t>(far_cell)]);
    }

    const auto tally = [&](std::span<const long long> picks, std::vector<long long>& joint_near,
                           std::vector<long long>& joint_far) {
        std::fill(joint_near.begin(), joint_near.end(), 0);
        std::fill(joint_far.begin(), joint_far.end(), 0);
        for (long long s : picks) {
            const auto idx = static_cast<std::size_t>(s);
            ++joint_near[centre_obs[idx] * near_levels + near_obs[idx]];
            ++joint_far[centre_obs[idx] * far_levels + far_obs[idx]];
        }
    };

    std::vector<long long> joint_near(centre_levels * near_levels, 0);
    std::vector<long long> joint_far(centre_levels * far_levels, 0);
    std::vector<long long> identity(static_cast<std::size_t>(params.n_samples));
    for (long long s = 0; s < params.n_samples; ++s) identity[static_cast<std::size_t>(s)] = s;
    tally(identity, joint_near, joint_far);

    MiReport report;
    report.samples = params.n_samples;
    report.i_near = corrected_mi_bits(joint_near, centre_levels, near_levels, params.n_samples);
    report.i_far = corrected_mi_bits(joint_far, centre_levels, far_levels, params.n_samples);
    report.sparse_support = has_thin_cell(joint_near) || has_thin_cell(joint_far);

    rng_engine boot_rng(splitmix64(params.seed ^ 0xB005757A9ULL));
    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(params.bootstrap_resamples));
    std::vector<long long> picks(static_cast<std::size_t>(params.n_samples));
    for (int b = 0; b < params.bootstrap_resamples; ++b) {
        for (auto& p : picks) {
            p = static_cast<long long>(
                bounded_uniform(boot_rng, static_cast<std::uint64_t>(params.n_samples)));
        }
        tally(picks, joint_near, joint_far);
        const double near_b = corrected_mi_bits(joint_near, centre_levels, near_levels, params.n_samples);
        const double far_b = corrected_mi_bits(joint_far, centre_levels, far_levels, params.n_samples);
        diffs.push_back(near_b - far_b);
    }
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var /= static_cast<double>(diffs.size() - 1);
    report.bootstrap_std = std::sqrt(var);
    return report;
}

TraceCheck check_trace_consistency(std::span<const StepRecord> trace,
                                   const Schedule& schedule, long long n_total) {
    if (trace.empty()) throw std::invalid_argument("check_trace_consistency: empty trace");
    if (n_total < 1) throw std::invalid_argument("check_trace_consistency: n_total must be >= 1");

    const double slack = 1.0 / static_cast<double>(n_total);
    const auto fail = [](int index, const std::string& message) {
        return TraceCheck{false, index, message};
    };

    for (std::size_t i = 0; i < trace.size(); ++i) {
        const StepRecord& rec = trace[i];
        std::ostringstream what;

        const double gamma_at_eff = gamma(schedule, Timestep(rec.t_eff)).value();
        if (std::abs(gamma_at_eff - rec.rho_before) > slack + 1e-12) {
            what << "gamma(t_eff)=" << gamma_at_eff << " strays from rho_before="
                 << rec.rho_before << " beyond 1/N";
            return fail(static_cast<int>(i), what.str());
        }

        const double expected_next = next_timestep(schedule, Timestep(rec.t_eff)).value();
        if (std::abs(rec.t_next - expected_next) > 1e-12) {
            what << "t_next=" << rec.t_next << " != clamp(t_eff + 1/T)=" << expected_next;
            return fail(static_cast<int>(i), what.str());
        }

        const double expected_after =
            rec.rho_before -
            static_cast<double>(rec.standard_unmasked + rec.rescued) / static_cast<double>(n_total);
        if (std::abs(rec.rho_after - expected_after) > 1e-9) {
            what << "rho_after=" << rec.rho_after << " breaks the unmask accounting ("
                 << expected_after << " expected)";
            return fail(static_cast<int>(i), what.str());
        }

        if (!(rec.rho_after < rec.rho_before)) {
            what << "rho did not decrease: " << rec.rho_before << " -> " << rec.rho_after;
            return fail(static_cast<int>(i), what.str());
        }

        if (i > 0 && std::abs(trace[i - 1].rho_after - rec.rho_before) > 1e-12) {
            what << "rho_before=" << rec.rho_before << " does not chain from previous rho_after="
                 << trace[i - 1].rho_after;
            return fail(static_cast<int>(i), what.str());
        }
    }
    return {};
}

std::vector<MarginSweepRow> run_margin_sweep(int k_min, int k_max, double tau_step,
                                             double grid_step, SimplexDomain domain) {
    if (k_min < 2 || k_max < k_min) throw std::invalid_argument("run_margin_sweep: bad K range");
    if (!(tau_step > 0.0) || tau_step >= 1.0) {
        throw std::invalid_argument("run_margin_sweep: tau_step must lie in (0,1)");
    }
    std::vector<MarginSweepRow> rows;
    for (int k = k_min; k <= k_max; ++k) {
        for (int i = 1;; ++i) {
            // Snap the grid point so i * 0.05 prints as 0.15, not 0.150...02.
            const double tau = std::round(static_cast<double>(i) * tau_step * 1e10) / 1e10;
            if (tau >= 1.0 - 1e-12) break;
            MarginSweepRow row;
            row.vocab = k;
            row.tau = tau;
            row.bruteforce = margin_bound_bruteforce(k, tau, grid_step, domain);
            row.bound = margin_error_bound(tau);
            row.gap = row.bound - row.bruteforce;
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace ladr

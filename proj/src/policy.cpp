#include "ladr/policy.hpp"

#include "ladr/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace ladr {

namespace {
constexpr double kBoundaryTol = 1e-12;
}

PhasePolicy::PhasePolicy(std::vector<Phase> phases) : phases_(std::move(phases)) {
    if (phases_.empty()) throw config_error("PhasePolicy: no phases");
    if (std::abs(phases_.front().t_lo) > kBoundaryTol) {
        throw config_error("PhasePolicy: first phase must start at 0");
    }
    if (std::abs(phases_.back().t_hi - 1.0) > kBoundaryTol) {
        throw config_error("PhasePolicy: last phase must end at 1");
    }
    for (std::size_t i = 0; i < phases_.size(); ++i) {
        const Phase& p = phases_[i];
        if (!(p.t_lo < p.t_hi)) {
            throw config_error("PhasePolicy: phase " + std::to_string(i) + " is empty");
        }
        if (p.alpha < 0.0 || p.alpha > 1.0) {
            throw config_error("PhasePolicy: alpha outside [0,1] in phase " + std::to_string(i));
        }
        if (p.tau && (*p.tau < 0.0 || *p.tau > 1.0)) {
            throw config_error("PhasePolicy: tau outside [0,1] in phase " + std::to_string(i));
        }
        if (i + 1 < phases_.size() &&
            std::abs(phases_[i + 1].t_lo - p.t_hi) > kBoundaryTol) {
            throw config_error("PhasePolicy: gap or overlap between phases " +
                               std::to_string(i) + " and " + std::to_string(i + 1));
        }
    }
}

PhasePolicy PhasePolicy::default_policy() {
    return PhasePolicy({
        {0.0, 0.2, 0.1, 0.05},
        {0.2, 0.7, 0.3, 0.05},
        {0.7, 1.0, 1.0, std::nullopt},
    });
}

PhasePolicy::Params PhasePolicy::at(Timestep t_eff) const {
    const double t = t_eff.value();
    // Lookup walks stored upper bounds so boundary values land in exactly one
    // phase even when adjacent t_lo/t_hi differ by the construction tolerance.
    for (std::size_t i = 0; i + 1 < phases_.size(); ++i) {
        if (t < phases_[i].t_hi) return {phases_[i].alpha, phases_[i].tau};
    }
    return {phases_.back().alpha, phases_.back().tau};
}

} // namespace ladr

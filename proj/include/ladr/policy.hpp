#pragma once

#include "ladr/schedule.hpp"

#include <optional>
#include <vector>

namespace ladr {

// One phase of the rescue policy: effective timesteps in [t_lo, t_hi) map to
// rescue ratio alpha and optional margin threshold tau (absent = no filter).
struct Phase {
    double t_lo = 0.0;
    double t_hi = 1.0;
    double alpha = 0.0;
    std::optional<double> tau;
};

// Piecewise-constant mapping from effective timestep to rescue parameters.
// Phases must partition [0, 1] with no gaps or overlaps; the final phase is
// closed at 1. Malformed phase lists are rejected at construction so lookup
// can never fail.
class PhasePolicy {
public:
    explicit PhasePolicy(std::vector<Phase> phases);

    // Conservative early, aggressive late:
    //   [0.0, 0.2): alpha 0.1, tau 0.05
    //   [0.2, 0.7): alpha 0.3, tau 0.05
    //   [0.7, 1.0]: alpha 1.0, no threshold
    static PhasePolicy default_policy();

    struct Params {
        double alpha;
        std::optional<double> tau;
    };

    Params at(Timestep t_eff) const;

    const std::vector<Phase>& phases() const { return phases_; }

private:
    std::vector<Phase> phases_;
};

} // namespace ladr

#pragma once

#include <cstdint>

namespace ladr {

// Generation progress in [0, 1]: 0 = fully masked, 1 = fully decoded.
// Clamped on construction.
class Timestep {
public:
    Timestep() = default;
    explicit Timestep(double t);
    double value() const { return value_; }

private:
    double value_ = 0.0;
};

// Fraction of positions currently masked, clamped to [0, 1].
class MaskFraction {
public:
    MaskFraction() = default;
    explicit MaskFraction(double rho);
    double value() const { return value_; }

private:
    double value_ = 0.0;
};

enum class ScheduleKind { cosine, linear };

// Masking-fraction curve gamma over generation progress, with an exact
// closed-form inverse. gamma(0) = 1 (everything masked), gamma(1) = 0,
// strictly decreasing in between. `steps` is the scheduled step count T
// used by the timestep advance.
class Schedule {
public:
    Schedule(ScheduleKind kind, int steps);

    ScheduleKind kind() const { return kind_; }
    int steps() const { return steps_; }

private:
    ScheduleKind kind_;
    int steps_;
};

MaskFraction gamma(const Schedule& s, Timestep t);
Timestep gamma_inv(const Schedule& s, MaskFraction rho);

// clamp(t_eff + 1/T, 0, 1)
Timestep next_timestep(const Schedule& s, Timestep t_eff);

// floor(n_total * gamma(t)), in [0, n_total]. Requires n_total >= 1.
long long target_mask_count(const Schedule& s, long long n_total, Timestep t);

} // namespace ladr

#include "ladr/schedule.hpp"

#include "ladr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ladr {

namespace {

// Absorbs round-trip noise of gamma(gamma_inv(rho)) so targets that are exact
// rationals of n_total floor to the intended integer.
constexpr double kFloorGuard = 1e-9;

} // namespace

Timestep::Timestep(double t) : value_(std::clamp(t, 0.0, 1.0)) {}

MaskFraction::MaskFraction(double rho) : value_(std::clamp(rho, 0.0, 1.0)) {}

Schedule::Schedule(ScheduleKind kind, int steps) : kind_(kind), steps_(steps) {
    if (steps < 1) throw std::invalid_argument("Schedule: steps must be >= 1");
}

MaskFraction gamma(const Schedule& s, Timestep t) {
    switch (s.kind()) {
    case ScheduleKind::cosine:
        return MaskFraction(std::cos(std::numbers::pi / 2.0 * t.value()));
    case ScheduleKind::linear:
        return MaskFraction(1.0 - t.value());
    }
    throw std::invalid_argument("gamma: unknown schedule kind");
}

Timestep gamma_inv(const Schedule& s, MaskFraction rho) {
    switch (s.kind()) {
    case ScheduleKind::cosine:
        return Timestep(2.0 / std::numbers::pi * std::acos(rho.value()));
    case ScheduleKind::linear:
        return Timestep(1.0 - rho.value());
    }
    throw std::invalid_argument("gamma_inv: unknown schedule kind");
}

Timestep next_timestep(const Schedule& s, Timestep t_eff) {
    return Timestep(t_eff.value() + 1.0 / static_cast<double>(s.steps()));
}

long long target_mask_count(const Schedule& s, long long n_total, Timestep t) {
    if (n_total < 1) throw std::invalid_argument("target_mask_count: n_total must be >= 1");
    const double scaled = static_cast<double>(n_total) * gamma(s, t).value();
    const long long count = static_cast<long long>(std::floor(scaled + kFloorGuard));
    return std::clamp(count, 0LL, n_total);
}

} // namespace ladr

#include "cuspsim/ideal.hpp"
#include "cuspsim/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cuspsim {

namespace {

cplx unit_phase(double phi) { return {std::cos(phi), std::sin(phi)}; }

void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("time must be finite and >= 0");
}

cplx denominator(const IdealModelParams& p) { return {1.0, p.g * p.heisenberg_time}; }

} // namespace

PeriodDecomposition decompose_period(double t, double period) {
    require_time(t);
    if (!(period > 0.0)) throw ConfigError("period must be positive");
    const double x = t / period;
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x)) {
        return {static_cast<long>(nearest), 0.0};
    }
    const long r = static_cast<long>(std::floor(x));
    double s = t - static_cast<double>(r) * period;
    if (s < 0.0) s = 0.0;
    return {r, s};
}

cplx psi0_closed_form(const IdealModelParams& p, double t) {
    const auto [r, s] = decompose_period(t, p.heisenberg_time);
    const cplx num(1.0, -2.0 * p.g * (s - 0.5 * p.heisenberg_time));
    return num / denominator(p) * unit_phase(-static_cast<double>(r) * p.theta);
}

SValue s_closed_form(const IdealModelParams& p, double t) {
    const auto [r, s] = decompose_period(t, p.heisenberg_time);
    return {unit_phase(-static_cast<double>(r) * p.theta) / denominator(p), s == 0.0};
}

cplx psi_n_closed_form(const IdealModelParams& p, int n, double t) {
    if (n == 0) throw ConfigError("psi_n closed form needs n != 0; use psi0_closed_form");
    const auto [r, s] = decompose_period(t, p.heisenberg_time);
    const double nd = n * p.delta;
    return 2.0 * p.g / (nd * denominator(p)) * (unit_phase(-nd * s) - 1.0) *
           unit_phase(-static_cast<double>(r) * p.theta);
}

double offset_population_closed_form(const IdealModelParams& p, int n, double t) {
    if (n == 0) throw ConfigError("offset population needs n != 0");
    require_time(t);
    const double gt = p.g * p.heisenberg_time;
    const double nd = n * p.delta;
    const double sn = std::sin(0.5 * nd * t);
    return 4.0 * p.g * p.g * sn * sn / ((1.0 + gt * gt) * nd * nd);
}

IdealPopulations populations_closed_form(const IdealModelParams& p, double t, int n_max) {
    const cplx psi0 = psi0_closed_form(p, t);
    IdealPopulations out{0.25 * std::norm(1.0 + psi0), 0.25 * std::norm(1.0 - psi0), {}};
    for (int n = -n_max; n <= n_max; ++n) {
        if (n != 0) out.p_offset[n] = 0.25 * std::norm(psi_n_closed_form(p, n, t));
    }
    return out;
}

double right_mover_closed_form(const IdealModelParams& p, double t) {
    const auto [r, s] = decompose_period(t, p.heisenberg_time);
    const double gt = p.g * p.heisenberg_time;
    const double c = std::cos(0.5 * static_cast<double>(r) * p.theta);
    return c * c - std::sin((static_cast<double>(r) + 0.5) * p.theta) * p.g * s / std::sqrt(1.0 + gt * gt);
}

double right_mover_series(const IdealModelParams& p, double t, int n_max) {
    double tail = 0.0;
    // Smallest terms first.
    for (int n = n_max; n >= 1; --n) {
        tail += std::norm(psi_n_closed_form(p, n, t)) + std::norm(psi_n_closed_form(p, -n, t));
    }
    return 0.25 * (std::norm(1.0 + psi0_closed_form(p, t)) + tail);
}

SincSum sinc_sum_identity(double alpha, long n_max) {
    if (!(alpha > 0.0 && alpha < std::numbers::pi)) throw ConfigError("alpha must lie in (0, pi)");
    if (n_max < 1) throw ConfigError("n_max must be >= 1");
    double sum = 0.0;
    double carry = 0.0;
    for (long n = n_max; n >= 1; --n) {
        const double x = static_cast<double>(n) * alpha;
        const double sx = std::sin(x);
        const double term = 2.0 * sx * sx / (x * x);
        const double y = term - carry;
        const double next = sum + y;
        carry = (next - sum) - y;
        sum = next;
    }
    return {1.0 + sum, 2.0 / (alpha * alpha * static_cast<double>(n_max))};
}

std::vector<cplx> bounce_trajectory(const IdealModelParams& p, int n_periods) {
    if (n_periods < 1) throw ConfigError("n_periods must be >= 1");
    if (p.g == 0.0) return {cplx(1.0, 0.0)};
    std::vector<cplx> pts;
    pts.reserve(n_periods + 1);
    for (int r = 0; r <= n_periods; ++r) pts.push_back(unit_phase(-static_cast<double>(r) * p.theta));
    return pts;
}

cplx psi0_velocity(const IdealModelParams& p, long r) {
    return cplx(0.0, -2.0 * p.g) / denominator(p) * unit_phase(-static_cast<double>(r) * p.theta);
}

CuspSlopes population_slopes_at_revival(const IdealModelParams& p, long r, int sign) {
    if (r < 1) throw ConfigError("revival index must be >= 1");
    if (sign != 1 && sign != -1) throw ConfigError("sign must be +1 or -1");
    // P = |1 + sign psi0|^2 / 4  =>  dP/dt = sign Re(conj(1 + sign psi0) psi0') / 2
    const cplx at = unit_phase(-static_cast<double>(r) * p.theta);
    const cplx base = 1.0 + static_cast<double>(sign) * at;
    auto slope = [&](cplx velocity) { return sign * 0.5 * std::real(std::conj(base) * velocity); };
    return {slope(psi0_velocity(p, r - 1)), slope(psi0_velocity(p, r))};
}

} // namespace cuspsim

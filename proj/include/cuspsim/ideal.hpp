#pragma once
#include "cuspsim/lattice.hpp"

#include <map>
#include <vector>

namespace cuspsim {

/// t = r T + s with r >= 0 and s in [0, T).
struct PeriodDecomposition {
    long r;
    double s;
};

/// floor(t/T), except that t within a few ulps of r*T snaps to (r, 0).
PeriodDecomposition decompose_period(double t, double period);

/// psi0(t) = [1 - 2ig(s - T/2)] / (1 + igT) * e^{-i r theta}
cplx psi0_closed_form(const IdealModelParams& p, double t);

struct SValue {
    cplx value;
    bool discontinuity; ///< t is an exact multiple of T; value is the right limit
};

/// S(t) = e^{-i r theta} / (1 + igT), piecewise constant.
SValue s_closed_form(const IdealModelParams& p, double t);

/// psi_n(t) = 2g / (n Delta (1 + igT)) (e^{-i n Delta s} - 1) e^{-i r theta}, n != 0.
cplx psi_n_closed_form(const IdealModelParams& p, int n, double t);

/// P_n = |psi_n|^2 / 4 = 4 g^2 sin^2(n Delta t / 2) / ((1 + g^2 T^2) n^2 Delta^2).
double offset_population_closed_form(const IdealModelParams& p, int n, double t);

struct IdealPopulations {
    double p_init;
    double p_reflect;
    std::map<int, double> p_offset; ///< n -> P_n for 0 < |n| <= n_max
};

/// P_i = |1 + psi0|^2 / 4, P_r = |1 - psi0|^2 / 4, and P_n for 0 < |n| <= n_max.
IdealPopulations populations_closed_form(const IdealModelParams& p, double t, int n_max = 0);

/// cos^2(r theta / 2) - sin[(r + 1/2) theta] g s / sqrt(1 + g^2 T^2)
double right_mover_closed_form(const IdealModelParams& p, double t);

/// 1/4 (|1 + psi0|^2 + sum_{0<|n|<=n_max} |psi_n|^2): direct partial sum of the series.
double right_mover_series(const IdealModelParams& p, double t, int n_max);

struct SincSum {
    double partial_sum; ///< sum_{|n| <= n_max} sin^2(n a) / (n a)^2, n = 0 term is 1
    double tail_bound;  ///< 2 / (a^2 n_max) bounds the omitted tail
};

/// Partial sums of sum_n sin^2(n a)/(n a)^2 = pi / a, 0 < a < pi.
SincSum sinc_sum_identity(double alpha, long n_max);

/// psi0 at the period boundaries: e^{-i r theta}, r = 0..n_periods. A single point when g = 0.
std::vector<cplx> bounce_trajectory(const IdealModelParams& p, int n_periods);

struct CuspSlopes {
    double left;
    double right;
};

/// One-sided time derivatives of P_i (sign = +1) or P_r (sign = -1) at t = r T, r >= 1.
CuspSlopes population_slopes_at_revival(const IdealModelParams& p, long r, int sign);

/// d psi0 / dt inside period r (constant: psi0 is linear on each period).
cplx psi0_velocity(const IdealModelParams& p, long r);

} // namespace cuspsim

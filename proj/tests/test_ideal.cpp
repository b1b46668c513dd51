#include <doctest.h>

#include "cuspsim/errors.hpp"
#include "cuspsim/ideal.hpp"

#include <cmath>
#include <numbers>

using namespace cuspsim;
using std::numbers::pi;

TEST_CASE("period decomposition") {
    const double period = 2.0 * pi / 0.0625;
    auto d = decompose_period(3.0 * period, period);
    CHECK(d.r == 3);
    CHECK(d.s == 0.0);
    d = decompose_period(2.5 * period, period);
    CHECK(d.r == 2);
    CHECK(d.s == doctest::Approx(0.5 * period));
    d = decompose_period(std::nextafter(7.0 * period, 0.0), period);
    CHECK(d.r == 7);
    CHECK(d.s == 0.0);
    d = decompose_period(0.0, period);
    CHECK(d.r == 0);
    CHECK_THROWS_AS(decompose_period(-1.0, period), ConfigError);
    CHECK_THROWS_AS(decompose_period(1.0, 0.0), ConfigError);
}

TEST_CASE("psi0: starts at one, linear inside a period, continuous across revivals") {
    const auto p = IdealModelParams::from_ratio(0.3);
    CHECK(std::abs(psi0_closed_form(p, 0.0) - 1.0) < 1e-15);
    const double period = p.heisenberg_time;
    for (int r = 0; r < 6; ++r) {
        const double t0 = r * period;
        const cplx a = psi0_closed_form(p, t0 + 0.2 * period);
        const cplx b = psi0_closed_form(p, t0 + 0.5 * period);
        const cplx c = psi0_closed_form(p, t0 + 0.8 * period);
        CHECK(std::abs(a - 2.0 * b + c) < 1e-14);
        CHECK(std::abs((c - a) / (0.6 * period) - psi0_velocity(p, r)) < 1e-13);
        if (r > 0) {
            const cplx left = psi0_closed_form(p, t0 - 1e-9 * period);
            CHECK(std::abs(left - psi0_closed_form(p, t0)) < 1e-8);
            CHECK(std::abs(psi0_closed_form(p, t0) - std::polar(1.0, -r * p.theta)) < 1e-14);
        }
    }
}

TEST_CASE("psi0 at mid-period is the smallest point of the chord") {
    const auto p = IdealModelParams::from_ratio(1.0 / (2.0 * pi)); // gT = 1
    CHECK(p.theta == doctest::Approx(pi / 2));
    const cplx mid = psi0_closed_form(p, 0.5 * p.heisenberg_time);
    CHECK(std::abs(mid - cplx(0.5, -0.5)) < 1e-14);
    const auto pop = populations_closed_form(p, 0.5 * p.heisenberg_time);
    CHECK(pop.p_init == doctest::Approx(0.625));
    CHECK(pop.p_reflect == doctest::Approx(0.125));
}

TEST_CASE("S is piecewise constant with jumps at revivals") {
    const auto p = IdealModelParams::from_ratio(0.125);
    const double period = p.heisenberg_time;
    const auto s0 = s_closed_form(p, 0.0);
    CHECK(s0.discontinuity);
    CHECK(std::abs(s0.value - 1.0 / cplx(1.0, p.g * period)) < 1e-15);
    for (int r = 0; r < 4; ++r) {
        const auto a = s_closed_form(p, (r + 0.1) * period);
        const auto b = s_closed_form(p, (r + 0.9) * period);
        CHECK_FALSE(a.discontinuity);
        CHECK(a.value == b.value);
        CHECK(std::abs(a.value) == doctest::Approx(1.0 / std::sqrt(1.0 + std::pow(p.g * period, 2))));
        const auto next = s_closed_form(p, (r + 1.0) * period);
        CHECK(next.discontinuity);
        CHECK(std::abs(next.value - a.value * std::polar(1.0, -p.theta)) < 1e-14);
    }
}

TEST_CASE("offset amplitudes and populations agree") {
    const auto p = IdealModelParams::from_coupling(0.02, 0.07, 0.9);
    for (double t : {0.0, 13.0, 250.0, 1234.5}) {
        for (int n : {-3, -1, 1, 2, 5}) {
            const double direct = 0.25 * std::norm(psi_n_closed_form(p, n, t));
            CHECK(offset_population_closed_form(p, n, t) == doctest::Approx(direct).epsilon(1e-12).scale(1e-18));
        }
        const auto pops = populations_closed_form(p, t, 2);
        CHECK(pops.p_offset.size() == 4);
        CHECK(pops.p_init + pops.p_reflect == doctest::Approx(0.5 * (1.0 + std::norm(psi0_closed_form(p, t)))));
    }
    CHECK(std::abs(psi_n_closed_form(p, 3, 0.0)) == 0.0);
    CHECK_THROWS_AS(psi_n_closed_form(p, 0, 1.0), ConfigError);
    CHECK_THROWS_AS(offset_population_closed_form(p, 0, 1.0), ConfigError);
}

TEST_CASE("even-sector norm is exhausted by the offset series") {
    const auto p = IdealModelParams::from_ratio(0.4);
    const int n_max = 20000;
    for (double frac : {0.1, 0.37, 0.8, 2.3}) {
        const double t = frac * p.heisenberg_time;
        double total = std::norm(psi0_closed_form(p, t));
        for (int n = n_max; n >= 1; --n) {
            total += std::norm(psi_n_closed_form(p, n, t)) + std::norm(psi_n_closed_form(p, -n, t));
        }
        const double gt = p.g * p.heisenberg_time;
        const double tail = 2.0 * 16.0 * p.g * p.g / ((1.0 + gt * gt) * p.delta * p.delta * n_max);
        CHECK(total <= 1.0 + 1e-12);
        CHECK(1.0 - total <= tail);
    }
}

TEST_CASE("right-mover population: closed form matches the series") {
    for (double ratio : {0.1, 0.5, 2.0}) {
        const auto p = IdealModelParams::from_ratio(ratio);
        CHECK(right_mover_closed_form(p, 0.0) == doctest::Approx(1.0));
        const int n_max = 100000;
        const double gt = p.g * p.heisenberg_time;
        const double tail = 2.0 * 4.0 * p.g * p.g / ((1.0 + gt * gt) * p.delta * p.delta * n_max);
        for (double frac : {0.05, 0.5, 0.95, 1.25, 3.7}) {
            const double t = frac * p.heisenberg_time;
            CHECK(std::abs(right_mover_closed_form(p, t) - right_mover_series(p, t, n_max)) <= tail + 1e-12);
        }
    }
}

TEST_CASE("right-mover population at revivals follows cos^2(r theta / 2)") {
    const auto p = IdealModelParams::from_ratio(0.7);
    for (int r = 0; r < 8; ++r) {
        const double c = std::cos(0.5 * r * p.theta);
        CHECK(right_mover_closed_form(p, r * p.heisenberg_time) == doctest::Approx(c * c).epsilon(1e-12));
    }
}

TEST_CASE("sinc-sum identity") {
    for (double alpha : {0.05, 0.3, 1.0, 2.5}) {
        for (long n_max : {100L, 10000L, 1000000L}) {
            const auto s = sinc_sum_identity(alpha, n_max);
            CHECK(s.tail_bound == doctest::Approx(2.0 / (alpha * alpha * n_max)));
            CHECK(std::abs(s.partial_sum - pi / alpha) <= s.tail_bound);
        }
    }
    CHECK_THROWS_AS(sinc_sum_identity(0.0, 10), ConfigError);
    CHECK_THROWS_AS(sinc_sum_identity(pi, 10), ConfigError);
    CHECK_THROWS_AS(sinc_sum_identity(1.0, 0), ConfigError);
}

TEST_CASE("bounce trajectory on the unit circle") {
    const auto p = IdealModelParams::from_ratio(1.0 / (2.0 * pi)); // theta = pi / 2
    const auto pts = bounce_trajectory(p, 8);
    REQUIRE(pts.size() == 9);
    for (const auto& z : pts) CHECK(std::abs(z) == doctest::Approx(1.0));
    CHECK(std::abs(pts[1] - cplx(0.0, -1.0)) < 1e-15);
    CHECK(std::abs(pts[4] - 1.0) < 1e-14);
    CHECK(std::abs(pts[8] - 1.0) < 1e-14);
    for (int r = 0; r <= 8; ++r) {
        CHECK(std::abs(pts[r] - psi0_closed_form(p, r * p.heisenberg_time)) < 1e-13);
    }
    CHECK(bounce_trajectory(IdealModelParams::from_ratio(0.0), 5).size() == 1);
    CHECK_THROWS_AS(bounce_trajectory(p, 0), ConfigError);
}

TEST_CASE("one-sided slopes at revivals expose the cusp") {
    const auto p = IdealModelParams::from_ratio(0.2);
    const double period = p.heisenberg_time;
    const double h = 1e-6 * period;
    for (int sign : {1, -1}) {
        auto pop = [&](double t) {
            const auto pops = populations_closed_form(p, t);
            return sign > 0 ? pops.p_init : pops.p_reflect;
        };
        for (long r = 1; r <= 4; ++r) {
            const double t = r * period;
            const auto sl = population_slopes_at_revival(p, r, sign);
            const double left = (pop(t) - pop(t - h)) / h;
            const double right = (pop(t + h) - pop(t)) / h;
            CHECK(std::abs(sl.left - left) < 1e-6);
            CHECK(std::abs(sl.right - right) < 1e-6);
            CHECK(std::abs(sl.left - sl.right) > 1e-6);
        }
    }
    CHECK_THROWS_AS(population_slopes_at_revival(p, 0, 1), ConfigError);
    CHECK_THROWS_AS(population_slopes_at_revival(p, 1, 0), ConfigError);
}

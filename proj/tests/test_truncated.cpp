#include <doctest.h>

#include "cuspsim/errors.hpp"
#include "cuspsim/ideal.hpp"
#include "cuspsim/truncated.hpp"

#include <cmath>
#include <numbers>

using namespace cuspsim;

TEST_CASE("truncated matrix: levels n Delta plus uniform coupling 2g") {
    const TruncatedModel model(3, 0.2, 0.7);
    const auto& m = model.matrix();
    REQUIRE(m.rows() == 7);
    for (int a = 0; a < 7; ++a) {
        for (int b = 0; b < 7; ++b) {
            const double expected = (a == b ? (a - 3) * 0.7 : 0.0) + 0.4;
            CHECK(m(a, b) == doctest::Approx(expected).epsilon(1e-15));
        }
    }
    CHECK(model.heisenberg_time() == doctest::Approx(2.0 * std::numbers::pi / 0.7));
    const Eigen::MatrixXd recon =
        model.eigenvectors() * model.eigenvalues().asDiagonal() * model.eigenvectors().transpose();
    CHECK((recon - m).cwiseAbs().maxCoeff() < 1e-13);
    for (int i = 1; i < 7; ++i) CHECK(model.eigenvalues()[i] >= model.eigenvalues()[i - 1]);
}

TEST_CASE("truncated model rejects bad input") {
    CHECK_THROWS_AS(TruncatedModel(-1, 0.1, 1.0), ConfigError);
    CHECK_THROWS_AS(TruncatedModel(3, 0.1, 0.0), ConfigError);
    CHECK_THROWS_AS(TruncatedModel(3, std::nan(""), 1.0), ConfigError);
    const TruncatedModel model(2, 0.1, 1.0);
    CHECK_THROWS_AS(evolve_truncated(model, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(evolve_truncated(model, std::vector<double>{-0.5}), ConfigError);
}

TEST_CASE("truncated evolution: initial condition, unitarity, S") {
    const TruncatedModel model(10, 0.125, 1.0);
    const auto traj = evolve_truncated(model, 4.0 * model.heisenberg_time(), 801);
    REQUIRE(traj.times.size() == 801);
    CHECK(traj.m_levels() == 10);
    CHECK(traj.psi_n(0, 0) == cplx(1.0, 0.0));
    CHECK(std::abs(traj.s_values[0] - 1.0) < 1e-14);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        CHECK(std::abs(traj.psi[i].squaredNorm() - 1.0) < 1e-10);
        CHECK(std::abs(traj.psi[i].sum() - traj.s_values[i]) < 1e-13);
    }
}

TEST_CASE("uncoupled truncated model only rotates phases") {
    const TruncatedModel model(4, 0.0, 1.0);
    const auto traj = evolve_truncated(model, std::vector<double>{0.0, 1.7, 9.0});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(std::abs(traj.psi_n(i, 0)) - 1.0) < 1e-14);
        CHECK(std::abs(traj.psi_n(i, 2)) < 1e-14);
    }
}

TEST_CASE("truncated dynamics depends on g / Delta only") {
    const TruncatedModel a(15, 0.05, 0.2);
    const TruncatedModel b(15, 0.5, 2.0);
    std::vector<double> ta, tb;
    for (int i = 0; i <= 40; ++i) {
        ta.push_back(a.heisenberg_time() * i / 13.0);
        tb.push_back(b.heisenberg_time() * i / 13.0);
    }
    const auto pa = evolve_truncated(a, ta);
    const auto pb = evolve_truncated(b, tb);
    for (std::size_t i = 0; i < ta.size(); ++i) {
        CHECK((pa.psi[i] - pb.psi[i]).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("truncated psi0 approaches the closed form as M grows") {
    const IdealModelParams p = IdealModelParams::from_ratio(0.5);
    const auto grid = uniform_grid(p.heisenberg_time, 1.0, 400);
    double previous = 1e9;
    for (int m : {5, 10, 20, 40, 80}) {
        const auto traj = evolve_truncated(build_truncated(p, m), grid);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            err = std::max(err, std::abs(traj.psi_n(i, 0) - psi0_closed_form(p, grid[i])));
        }
        MESSAGE("M=" << m << " max|psi0 - closed form| = " << err);
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 0.05);
}

TEST_CASE("per-period average of S tracks the piecewise-constant closed form") {
    const IdealModelParams p = IdealModelParams::from_ratio(0.125);
    const auto traj = evolve_truncated(build_truncated(p, 10), 5.0 * p.heisenberg_time, 5 * 400 + 1);
    for (int r = 0; r < 5; ++r) {
        cplx mean = 0.0;
        for (int i = r * 400; i < (r + 1) * 400; ++i) mean += traj.s_values[i];
        mean /= 400.0;
        const cplx expected = s_closed_form(p, (r + 0.5) * p.heisenberg_time).value;
        CHECK(std::abs(std::abs(mean) - std::abs(expected)) < 0.05);
        CHECK(std::abs(std::arg(mean / expected)) < 0.1);
    }
}

TEST_CASE("M window: m_min is N-independent at fixed U and q") {
    // q = pi/4 for every N below; g / Delta = U / (4 pi sin q) is shared.
    const auto a = m_window_bounds(LatticeConfig(400, 50, 3.0), 0.05);
    const auto b = m_window_bounds(LatticeConfig(800, 100, 3.0), 0.05);
    const auto c = m_window_bounds(LatticeConfig(1600, 200, 3.0), 0.05);
    CHECK(a.m_min == b.m_min);
    CHECK(b.m_min == c.m_min);
    CHECK(a.m_min > 1);
    CHECK(a.m_max < b.m_max);
    CHECK(b.m_max < c.m_max);
    CHECK_FALSE(a.cubic_fallback);
}

TEST_CASE("M window: default criterion grows like sqrt(N), slope criterion linearly") {
    MWindowOptions slope;
    slope.criterion = LinearizationCriterion::SlopeFraction;
    std::vector<double> n_values, spacing, linear;
    for (int n : {800, 1600, 3200, 6400}) {
        const LatticeConfig cfg(n, n / 8, 3.0);
        n_values.push_back(std::log(n));
        spacing.push_back(std::log(m_window_bounds(cfg, 0.2, {}).linearization_m_max));
        linear.push_back(std::log(m_window_bounds(cfg, 0.2, slope).linearization_m_max));
    }
    const auto exponent = [&](const std::vector<double>& y) {
        return (y.back() - y.front()) / (n_values.back() - n_values.front());
    };
    CHECK(exponent(spacing) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(exponent(linear) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("M window: cubic fallback at the band centre") {
    const auto w = m_window_bounds(LatticeConfig(400, 100, 3.0), 0.2);
    CHECK(w.cubic_fallback);
    CHECK(w.m_max > 0);
    CHECK(w.m_max < 100);
}

TEST_CASE("M window: infeasible requests carry a diagnostic") {
    const auto w = m_window_bounds(LatticeConfig(60, 15, 3.0), 0.01);
    CHECK_FALSE(w.feasible);
    CHECK(w.diagnostic.find("increase N") != std::string::npos);
    CHECK_THROWS_AS(m_window_bounds(LatticeConfig(60, 15, 3.0), 0.0), ConfigError);
    MWindowOptions tight;
    tight.m_search_limit = 4;
    CHECK_THROWS_AS(m_window_bounds(LatticeConfig(60, 15, 3.0), 0.01, tight), NumericalError);
}

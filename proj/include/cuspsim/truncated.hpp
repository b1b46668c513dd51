#pragma once
#include "cuspsim/lattice.hpp"

#include <vector>

namespace cuspsim {

/**
 The even-parity sector of the truncated, linearized model: 2M+1 levels
 n*Delta, n in [-M, M], every pair (including n1 == n2) coupled by 2g.
 */
class TruncatedModel {
public:
    TruncatedModel(int m_levels, double g, double delta);

    int m_levels() const { return m_levels_; }
    int dimension() const { return 2 * m_levels_ + 1; }
    double g() const { return g_; }
    double delta() const { return delta_; }
    double heisenberg_time() const;
    /// Real symmetric (2M+1) x (2M+1) matrix; row/col i is level n = i - M.
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

private:
    int m_levels_;
    double g_;
    double delta_;
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

TruncatedModel build_truncated(const IdealModelParams& params, int m_levels);

struct PsiTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXcd> psi; ///< psi_{-M..M} per sample, index n + M
    std::vector<cplx> s_values;        ///< S(t) = sum_n psi_n(t)

    int m_levels() const { return psi.empty() ? 0 : static_cast<int>(psi.front().size() - 1) / 2; }
    cplx psi_n(std::size_t sample, int n) const { return psi[sample][n + m_levels()]; }
};

/// psi_n(0) = delta_{n0}, propagated exactly through the eigenbasis.
PsiTrajectory evolve_truncated(const TruncatedModel& model, const std::vector<double>& times);

/// `samples` points equally spaced on [0, t_final].
PsiTrajectory evolve_truncated(const TruncatedModel& model, double t_final, int samples);

struct MWindow {
    int m_min;                   ///< smallest M reaching target accuracy on psi0 over one period
    int m_max;                   ///< largest M keeping the band linearization error acceptable
    double linearization_m_max;  ///< continuous bound before flooring / window clamping
    bool cubic_fallback;         ///< eps''(q_i) vanished, cubic term used instead
    bool feasible;               ///< m_min <= m_max
    std::string diagnostic;      ///< set when infeasible
};

enum class LinearizationCriterion {
    /// Taylor remainder below spacing_fraction * Delta (energy error per level).
    SpacingFraction,
    /// Taylor remainder below slope_fraction * |eps'(q_i)| * dq (fixed window in q).
    SlopeFraction,
};

struct MWindowOptions {
    LinearizationCriterion criterion = LinearizationCriterion::SpacingFraction;
    double spacing_fraction = 0.5;
    double slope_fraction = 0.1;
    int samples_per_period = 400;
    int m_search_limit = 4096;
};

/**
 Window of admissible truncation sizes for a lattice scenario.

 m_min is the smallest M whose truncated psi0 stays within target_accuracy of the closed form on a uniform grid over [0, T].
 It depends on g/Delta only, so it is N-independent at fixed U and q_i.

 m_max is the largest M whose Taylor remainder of the band across the window,
 R(dq) = |eps''(q_i)| dq^2 / 2 with dq = 2 pi M / N, stays below the limit set by
 the criterion: Delta / 2 by default (SpacingFraction, grows like sqrt(N) since
 Delta ~ 1/N), or a fraction of the linear term |eps'(q_i)| dq (SlopeFraction,
 grows linearly in N). When eps''(q_i) = 2 cos q_i vanishes (|.| < 1e-12) the
 cubic term |eps'''(q_i)| dq^3 / 6 is used instead. m_max is also clamped so
 the right/left Bloch windows stay disjoint.

 m_min uses a doubling-then-bisection search, which assumes the psi0 error is
 non-increasing in M.
 */
MWindow m_window_bounds(const LatticeConfig& cfg, double target_accuracy, MWindowOptions opts = {});

} // namespace cuspsim

#include "cuspsim/truncated.hpp"
#include "cuspsim/errors.hpp"
#include "cuspsim/ideal.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cuspsim {

namespace {

cplx unit_phase(double phi) { return {std::cos(phi), std::sin(phi)}; }

} // namespace

TruncatedModel::TruncatedModel(int m_levels, double g, double delta) : m_levels_(m_levels), g_(g), delta_(delta) {
    if (m_levels < 1) throw ConfigError("truncation M must be >= 1");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("level spacing must be positive");
    if (!std::isfinite(g)) throw ConfigError("coupling must be finite");
    const int dim = dimension();
    matrix_ = Eigen::MatrixXd::Constant(dim, dim, 2.0 * g);
    for (int i = 0; i < dim; ++i) matrix_(i, i) += (i - m_levels) * delta;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("truncated-model eigensolver did not converge (M=" + std::to_string(m_levels) + ")");
    }
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

double TruncatedModel::heisenberg_time() const { return 2.0 * std::numbers::pi / delta_; }

TruncatedModel build_truncated(const IdealModelParams& params, int m_levels) {
    return {m_levels, params.g, params.delta};
}

PsiTrajectory evolve_truncated(const TruncatedModel& model, const std::vector<double>& times) {
    const int dim = model.dimension();
    const int m = model.m_levels();
    const Eigen::MatrixXd& vecs = model.eigenvectors();
    const Eigen::VectorXd& vals = model.eigenvalues();
    // psi(0) = e_{n=0}: eigenbasis coefficients are row M of V.
    const Eigen::VectorXd coeffs = vecs.row(m).transpose();
    const Eigen::MatrixXcd vecs_c = vecs.cast<cplx>();

    PsiTrajectory out;
    out.times = times;
    out.psi.reserve(times.size());
    out.s_values.reserve(times.size());
    Eigen::VectorXcd phased(dim);
    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("evolution times must be finite and >= 0");
        for (int e = 0; e < dim; ++e) phased[e] = coeffs[e] * unit_phase(-vals[e] * t);
        Eigen::VectorXcd psi = vecs_c * phased;
        const double drift = std::abs(psi.squaredNorm() - 1.0);
        if (drift > 1e-8) {
            std::ostringstream msg;
            msg << "truncated evolution lost normalization at t=" << t << ": drift " << drift;
            throw NumericalError(msg.str());
        }
        out.s_values.push_back(psi.sum());
        out.psi.push_back(std::move(psi));
    }
    return out;
}

PsiTrajectory evolve_truncated(const TruncatedModel& model, double t_final, int samples) {
    if (samples < 2) throw ConfigError("need at least 2 samples");
    if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
    std::vector<double> times(samples);
    for (int i = 0; i < samples; ++i) times[i] = t_final * i / (samples - 1);
    return evolve_truncated(model, times);
}

namespace {

double psi0_error(const IdealModelParams& reduced, int m, const std::vector<double>& grid) {
    const PsiTrajectory traj = evolve_truncated(build_truncated(reduced, m), grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        worst = std::max(worst, std::abs(traj.psi_n(i, 0) - psi0_closed_form(reduced, grid[i])));
    }
    return worst;
}

} // namespace

MWindow m_window_bounds(const LatticeConfig& cfg, double target_accuracy, MWindowOptions opts) {
    if (!(target_accuracy > 0.0)) throw ConfigError("target accuracy must be positive");
    const IdealModelParams params = derive_params(cfg);
    MWindow out{};

    // Lower bound: reduced units (Delta = 1) since the dynamics depends on g/Delta only.
    const IdealModelParams reduced = IdealModelParams::from_ratio(params.g / params.delta);
    const std::vector<double> grid = uniform_grid(reduced.heisenberg_time, 1.0, opts.samples_per_period);
    auto good = [&](int m) { return psi0_error(reduced, m, grid) <= target_accuracy; };
    int hi = 1;
    while (!good(hi)) {
        if (hi >= opts.m_search_limit) {
            throw NumericalError("no truncation up to M=" + std::to_string(opts.m_search_limit) +
                                 " reaches psi0 accuracy " + std::to_string(target_accuracy));
        }
        hi = std::min(2 * hi, opts.m_search_limit);
    }
    int lo = hi / 2; // known bad (or 0)
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (good(mid) ? hi : lo) = mid;
    }
    out.m_min = hi;

    // Upper bound: Taylor remainder of eps(q) = -2 cos q about q_i.
    const double q = params.q_init;
    const double n = cfg.n_sites();
    const double second = std::abs(2.0 * std::cos(q));
    const double third = std::abs(2.0 * std::sin(q));
    const double slope = third; // |eps'(q)| = |2 sin q| = |eps'''(q)|
    out.cubic_fallback = second < 1e-12;
    const double order = out.cubic_fallback ? 3.0 : 2.0;
    const double coeff = out.cubic_fallback ? third / 6.0 : second / 2.0;
    double dq_max = 0.0;
    if (opts.criterion == LinearizationCriterion::SpacingFraction) {
        // coeff dq^order < fraction * Delta
        dq_max = std::pow(opts.spacing_fraction * params.delta / coeff, 1.0 / order);
    } else {
        // coeff dq^order < fraction * slope * dq
        dq_max = std::pow(opts.slope_fraction * slope / coeff, 1.0 / (order - 1.0));
    }
    out.linearization_m_max = dq_max * n / (2.0 * std::numbers::pi);
    const int strict = static_cast<int>(std::ceil(out.linearization_m_max)) - 1;
    out.m_max = std::min(std::max(strict, 0), max_window_levels(cfg));

    out.feasible = out.m_min <= out.m_max;
    if (!out.feasible) {
        std::ostringstream msg;
        msg << "no admissible truncation: psi0 accuracy " << target_accuracy << " needs M >= " << out.m_min
            << " but linearization allows M <= " << out.m_max << " at N=" << cfg.n_sites()
            << "; increase N";
        out.diagnostic = msg.str();
    }
    return out;
}

} // namespace cuspsim

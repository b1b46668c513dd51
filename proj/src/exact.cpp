#include "cuspsim/exact.hpp"
#include "cuspsim/errors.hpp"
#include "parallel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cuspsim {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr double kStepperDriftLimit = 1e-8;

double wave_vector(int k, int n_sites) { return 2.0 * std::numbers::pi * k / n_sites; }

cplx unit_phase(double phi) { return {std::cos(phi), std::sin(phi)}; }

Eigen::MatrixXcd real_space_matrix(const LatticeConfig& cfg) {
    const int n = cfg.n_sites();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (int l = 0; l < n; ++l) {
        const int next = (l + 1) % n;
        h(l, next) = -1.0;
        h(next, l) = -1.0;
    }
    h(cfg.defect_site(), cfg.defect_site()) += cfg.defect_strength();
    return h;
}

Eigen::MatrixXcd bloch_rank_one_matrix(const LatticeConfig& cfg) {
    const int n = cfg.n_sites();
    const double g = cfg.defect_strength() / n;
    const int j = cfg.defect_site();
    // <k1|U|j><j|k2> = g e^{-i(q1 - q2) j}: outer product of the site-j column.
    Eigen::VectorXcd col(n);
    for (int s = 0; s < n; ++s) {
        const int k = bloch_index_of_slot(s, n);
        const long long m = (static_cast<long long>(k) * j) % n;
        col[s] = unit_phase(-2.0 * std::numbers::pi * static_cast<double>(m) / n);
    }
    Eigen::MatrixXcd h = g * col * col.adjoint();
    for (int s = 0; s < n; ++s) h(s, s) = dispersion(wave_vector(bloch_index_of_slot(s, n), n)) + g;
    return h;
}

// Rotate each degenerate cluster onto reflection eigenstates.
void canonicalize_degenerate(Eigen::MatrixXcd& vecs, const Eigen::VectorXd& vals, const Eigen::MatrixXcd& reflection) {
    const Eigen::Index n = vals.size();
    const double scale = 1.0 + vals.cwiseAbs().maxCoeff();
    const double tol = 1e-9 * scale;
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && vals[end] - vals[end - 1] < tol) ++end;
        const Eigen::Index width = end - start;
        if (width > 1) {
            Eigen::MatrixXcd block = vecs.middleCols(start, width);
            Eigen::MatrixXcd parity = block.adjoint() * reflection * block;
            parity = 0.5 * (parity + parity.adjoint()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(parity);
            Eigen::MatrixXcd rotated = block * solver.eigenvectors();
            // Re-orthonormalize against round-off in the rotation.
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(rotated);
            Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rotated.rows(), width);
            for (Eigen::Index c = 0; c < width; ++c) {
                const cplx overlap = q.col(c).dot(rotated.col(c));
                if (std::abs(overlap) > 0.0) q.col(c) *= overlap / std::abs(overlap);
            }
            vecs.middleCols(start, width) = q;
        }
        start = end;
    }
}

} // namespace

QuenchedHamiltonian::QuenchedHamiltonian(const LatticeConfig& cfg, Representation rep)
    : cfg_(cfg), rep_(rep),
      matrix_(rep == Representation::RealSpace ? real_space_matrix(cfg) : bloch_rank_one_matrix(cfg)) {}

double QuenchedHamiltonian::norm_bound() const {
    return matrix_.cwiseAbs().rowwise().sum().maxCoeff();
}

Eigen::MatrixXcd reflection_operator(const LatticeConfig& cfg, Representation rep) {
    const int n = cfg.n_sites();
    const int j = cfg.defect_site();
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
    if (rep == Representation::RealSpace) {
        for (int l = 0; l < n; ++l) p(((2 * j - l) % n + n) % n, l) = 1.0;
    } else {
        // R|k> = e^{2 i q j} |-k>
        for (int s = 0; s < n; ++s) {
            const int k = bloch_index_of_slot(s, n);
            const long long m = (2LL * k * j) % n;
            p(bloch_slot(reduce_bloch_index(-k, n), n), s) =
                unit_phase(2.0 * std::numbers::pi * static_cast<double>(m) / n);
        }
    }
    return p;
}

SpectralDecomposition decompose(const QuenchedHamiltonian& h) {
    SpectralDecomposition out;
    out.basis = h.basis();
    if (h.representation() == Representation::RealSpace) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix().real());
        if (solver.info() != Eigen::Success) {
            throw NumericalError("real symmetric eigensolver did not converge (N=" +
                                 std::to_string(h.dimension()) + ")");
        }
        out.eigenvalues = solver.eigenvalues();
        out.eigenvectors = solver.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix());
        if (solver.info() != Eigen::Success) {
            throw NumericalError("Hermitian eigensolver did not converge (N=" +
                                 std::to_string(h.dimension()) + ")");
        }
        out.eigenvalues = solver.eigenvalues();
        out.eigenvectors = solver.eigenvectors();
    }
    canonicalize_degenerate(out.eigenvectors, out.eigenvalues,
                            reflection_operator(h.config(), h.representation()));

    const Eigen::MatrixXcd residual =
        h.matrix() * out.eigenvectors - out.eigenvectors * out.eigenvalues.cast<cplx>().asDiagonal();
    const double worst_residual = residual.colwise().norm().maxCoeff();
    const double worst_ortho =
        (out.eigenvectors.adjoint() * out.eigenvectors -
         Eigen::MatrixXcd::Identity(h.dimension(), h.dimension()))
            .cwiseAbs()
            .maxCoeff();
    if (worst_residual > kResidualTolerance || worst_ortho > kResidualTolerance) {
        std::ostringstream msg;
        msg << "eigendecomposition failed accuracy check: max residual " << worst_residual
            << ", max orthonormality defect " << worst_ortho << " (tolerance " << kResidualTolerance << ")";
        throw NumericalError(msg.str());
    }
    return out;
}

namespace {

Eigen::VectorXcd in_basis(const StateVector& psi, Basis basis, const LatticeConfig& cfg) {
    if (psi.basis() == basis) return psi.amplitudes();
    return basis_change(psi, basis, cfg).amplitudes();
}

} // namespace

std::vector<StateVector> evolve_spectral(const SpectralDecomposition& spec, const LatticeConfig& cfg,
                                         const StateVector& psi0, const std::vector<double>& times,
                                         EvolveOptions opts) {
    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("evolution times must be finite and >= 0");
    }
    const Eigen::VectorXcd coeffs = spec.eigenvectors.adjoint() * in_basis(psi0, spec.basis, cfg);
    std::vector<Eigen::VectorXcd> states(times.size());
    detail::parallel_for(times.size(), opts.parallel, [&](std::size_t i) {
        Eigen::VectorXcd phased(coeffs.size());
        for (Eigen::Index n = 0; n < coeffs.size(); ++n) {
            phased[n] = coeffs[n] * unit_phase(-spec.eigenvalues[n] * times[i]);
        }
        states[i] = spec.eigenvectors * phased;
    });

    std::vector<StateVector> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double drift = std::abs(states[i].squaredNorm() - 1.0);
        if (drift > kResidualTolerance) {
            std::ostringstream msg;
            msg << "spectral propagation lost normalization at t=" << times[i] << ": drift " << drift;
            throw NumericalError(msg.str());
        }
        out.push_back(StateVector::unchecked(spec.basis, std::move(states[i])));
    }
    return out;
}

std::vector<StateVector> evolve_spectral(const QuenchedHamiltonian& h, const StateVector& psi0,
                                         const std::vector<double>& times, EvolveOptions opts) {
    return evolve_spectral(decompose(h), h.config(), psi0, times, opts);
}

StateVector evolve_stepper(const QuenchedHamiltonian& h, const StateVector& psi0, double t_final, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be finite and >= 0");
    const double bound = h.norm_bound();
    if (dt * bound > 1.0) {
        std::ostringstream msg;
        msg << "dt=" << dt << " too large: dt*||H|| = " << dt * bound << " exceeds 1";
        throw ConfigError(msg.str());
    }

    Eigen::VectorXcd psi = in_basis(psi0, h.basis(), h.config());
    if (t_final == 0.0) return StateVector::unchecked(h.basis(), std::move(psi));

    const long steps = static_cast<long>(std::ceil(t_final / dt - 1e-12));
    const double step = t_final / static_cast<double>(steps);

    const double cbrt2 = std::cbrt(2.0);
    const double w_outer = 1.0 / (2.0 - cbrt2);
    const double w_inner = -cbrt2 * w_outer;

    const int n = h.dimension();
    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);
    auto cayley = [&](double tau) {
        const cplx half(0.0, 0.5 * tau);
        const Eigen::MatrixXcd lhs = identity + half * h.matrix();
        const Eigen::MatrixXcd rhs = identity - half * h.matrix();
        return Eigen::MatrixXcd(lhs.partialPivLu().solve(rhs));
    };
    const Eigen::MatrixXcd outer = cayley(w_outer * step);
    const Eigen::MatrixXcd inner = cayley(w_inner * step);

    const double norm0 = psi.squaredNorm();
    Eigen::VectorXcd scratch(n);
    for (long s = 0; s < steps; ++s) {
        scratch.noalias() = outer * psi;
        psi.noalias() = inner * scratch;
        scratch.noalias() = outer * psi;
        psi = scratch;
        const double drift = std::abs(psi.squaredNorm() - norm0);
        if (drift > kStepperDriftLimit) {
            std::ostringstream msg;
            msg << "stepper norm drift " << drift << " exceeds " << kStepperDriftLimit << " at step " << s + 1
                << " (t=" << (s + 1) * step << ", dt=" << step << ")";
            throw NumericalError(msg.str());
        }
    }
    return StateVector::unchecked(h.basis(), std::move(psi));
}

Eigen::VectorXcd bloch_amplitudes(const StateVector& psi, const LatticeConfig& cfg) {
    if (psi.basis() == Basis::APlusMinus) return basis_change(psi, Basis::Bloch, cfg).amplitudes();
    if (psi.basis_size() != cfg.n_sites()) throw ConfigError("state size does not match n_sites");
    if (psi.basis() == Basis::Bloch) return psi.amplitudes();
    return fourier_matrix(cfg.n_sites()) * psi.amplitudes();
}

namespace {

cplx project_bloch(const StateVector& psi, const LatticeConfig& cfg, long long k) {
    const int n = cfg.n_sites();
    const int kr = reduce_bloch_index(k, n);
    switch (psi.basis()) {
    case Basis::Bloch: return psi[bloch_slot(kr, n)];
    case Basis::Wannier: {
        if (psi.basis_size() != n) throw ConfigError("state size does not match n_sites");
        cplx acc = 0.0;
        for (int l = 0; l < n; ++l) acc += std::conj(bloch_amplitude(l, kr, n)) * psi[l];
        return acc;
    }
    case Basis::APlusMinus: return bloch_amplitudes(psi, cfg)[bloch_slot(kr, n)];
    }
    return 0.0;
}

} // namespace

SurvivalReflection survival_and_reflection(const StateVector& psi, const LatticeConfig& cfg) {
    return {std::norm(project_bloch(psi, cfg, cfg.k_init())), std::norm(project_bloch(psi, cfg, -cfg.k_init()))};
}

std::map<int, double> bloch_populations(const StateVector& psi, const LatticeConfig& cfg) {
    const Eigen::VectorXcd c = bloch_amplitudes(psi, cfg);
    std::map<int, double> out;
    for (int s = 0; s < c.size(); ++s) out[bloch_index_of_slot(s, cfg.n_sites())] = std::norm(c[s]);
    return out;
}

double bloch_offset_population(const StateVector& psi, const LatticeConfig& cfg, int n) {
    return std::norm(project_bloch(psi, cfg, static_cast<long long>(cfg.k_init()) + n));
}

namespace {

double right_movers_from_bloch(const Eigen::VectorXcd& c, int n_sites) {
    double sum = 0.0;
    for (int k = 1; k <= n_sites / 2; ++k) sum += std::norm(c[bloch_slot(reduce_bloch_index(k, n_sites), n_sites)]);
    return sum;
}

} // namespace

double right_mover_population(const StateVector& psi, const LatticeConfig& cfg) {
    return right_movers_from_bloch(bloch_amplitudes(psi, cfg), cfg.n_sites());
}

double odd_sector_weight(const StateVector& psi, const LatticeConfig& cfg) {
    const int n = cfg.n_sites();
    const int k = cfg.k_init();
    const long long m = (static_cast<long long>(k) * cfg.defect_site()) % n;
    const cplx ph = unit_phase(2.0 * std::numbers::pi * static_cast<double>(m) / n);
    // <A0-|psi> = (e^{i q j} c_R - e^{-i q j} c_L) / sqrt(2)
    const cplx a = (ph * project_bloch(psi, cfg, k) - std::conj(ph) * project_bloch(psi, cfg, -k)) /
                   std::numbers::sqrt2;
    return std::norm(a);
}

double window_leakage(const StateVector& psi, const LatticeConfig& cfg, int m_levels) {
    if (m_levels < 0) throw ConfigError("window_leakage: m_levels must be >= 0");
    if (m_levels > max_window_levels(cfg)) throw ConfigError("window_leakage: right and left windows overlap");
    const int n = cfg.n_sites();
    const Eigen::VectorXcd c = bloch_amplitudes(psi, cfg);
    double kept = 0.0;
    for (int k : right_window(cfg, m_levels)) {
        kept += std::norm(c[bloch_slot(k, n)]) + std::norm(c[bloch_slot(reduce_bloch_index(-static_cast<long long>(k), n), n)]);
    }
    return std::max(0.0, c.squaredNorm() - kept);
}

ExactObservables run_exact(const LatticeConfig& cfg, const std::vector<double>& times, int n_offsets,
                           EvolveOptions opts) {
    const QuenchedHamiltonian h(cfg, Representation::RealSpace);
    const SpectralDecomposition spec = decompose(h);
    const int n = cfg.n_sites();

    // Eigenvectors in the Bloch basis; the initial state |k_i> has coefficients
    // conj(row k_i) in the eigenbasis.
    const Eigen::MatrixXcd bloch_vecs = fourier_matrix(n) * spec.eigenvectors;
    const int slot_init = bloch_slot(cfg.k_init(), n);
    const Eigen::VectorXcd coeffs = bloch_vecs.row(slot_init).adjoint();

    const int slot_reflect = bloch_slot(reduce_bloch_index(-cfg.k_init(), n), n);
    std::vector<int> offset_slots;
    for (int d = 1; d <= n_offsets; ++d) {
        offset_slots.push_back(bloch_slot(reduce_bloch_index(static_cast<long long>(cfg.k_init()) + d, n), n));
    }

    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("evolution times must be finite and >= 0");
    }
    const long long mj = (static_cast<long long>(cfg.k_init()) * cfg.defect_site()) % n;
    // e^{-2 i q_i j}: relative phase of |-k_i> inside A0+, normalised so psi0(0) = 1.
    const cplx phase_j = unit_phase(-4.0 * std::numbers::pi * static_cast<double>(mj) / n);
    const double eps_init = dispersion(cfg.q_init());

    ExactObservables out;
    out.times = times;
    out.p_init.resize(times.size());
    out.p_reflect.resize(times.size());
    out.p_right.resize(times.size());
    out.psi0.resize(times.size());
    out.p_offset.assign(n_offsets, std::vector<double>(times.size()));

    detail::parallel_for(times.size(), opts.parallel, [&](std::size_t i) {
        Eigen::VectorXcd phased(n);
        for (int e = 0; e < n; ++e) phased[e] = coeffs[e] * unit_phase(-spec.eigenvalues[e] * times[i]);
        const Eigen::VectorXcd c = bloch_vecs * phased;
        out.p_init[i] = std::norm(c[slot_init]);
        out.p_reflect[i] = std::norm(c[slot_reflect]);
        out.p_right[i] = right_movers_from_bloch(c, n);
        // interaction picture: the free phase of the initial level is removed
        out.psi0[i] = unit_phase(eps_init * times[i]) * (c[slot_init] + phase_j * c[slot_reflect]);
        for (int d = 0; d < n_offsets; ++d) out.p_offset[d][i] = std::norm(c[offset_slots[d]]);
    });
    return out;
}

} // namespace cuspsim

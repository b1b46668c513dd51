#pragma once
#include "cuspsim/lattice.hpp"

#include <map>
#include <vector>

namespace cuspsim {

enum class Representation {
    RealSpace,   ///< real symmetric N x N over Wannier sites
    BlochRankOne ///< diag(-2 cos q_k) + (U/N) e^{-i(q1-q2)j}, over Bloch slots
};

/// H = H0 + U|j><j| on the ring, stored densely in the chosen representation.
class QuenchedHamiltonian {
public:
    QuenchedHamiltonian(const LatticeConfig& cfg, Representation rep);

    const LatticeConfig& config() const { return cfg_; }
    Representation representation() const { return rep_; }
    /// Basis in which matrix() is expressed.
    Basis basis() const { return rep_ == Representation::RealSpace ? Basis::Wannier : Basis::Bloch; }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    int dimension() const { return static_cast<int>(matrix_.rows()); }
    /// Max row sum of |H_ij|, an upper bound on the spectral radius.
    double norm_bound() const;

private:
    LatticeConfig cfg_;
    Representation rep_;
    Eigen::MatrixXcd matrix_;
};

inline QuenchedHamiltonian build_hamiltonian(const LatticeConfig& cfg,
                                             Representation rep = Representation::RealSpace) {
    return {cfg, rep};
}

/**
 Eigenpairs of a QuenchedHamiltonian, eigenvalues ascending. Within each
 degenerate cluster the eigenvectors are rotated onto eigenstates of the
 reflection about the defect site, so the basis is canonical.
 */
struct SpectralDecomposition {
    Basis basis;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors; ///< columns
};

/// Throws NumericalError when the eigensolver fails or residuals exceed 1e-10.
SpectralDecomposition decompose(const QuenchedHamiltonian& h);

/// Reflection l -> 2j - l about the defect site, in the Hamiltonian's basis.
Eigen::MatrixXcd reflection_operator(const LatticeConfig& cfg, Representation rep);

struct EvolveOptions {
    /// Spread time points over hardware threads. Results are bitwise
    /// identical to the serial path because each point is computed independently.
    bool parallel = false;
};

/**
 psi(t) = V exp(-i Lambda t) V^dagger psi0 for each t. psi0 is converted to
 the decomposition basis if needed; outputs are in that basis.
 */
std::vector<StateVector> evolve_spectral(const SpectralDecomposition& spec, const LatticeConfig& cfg,
                                         const StateVector& psi0, const std::vector<double>& times,
                                         EvolveOptions opts = {});

std::vector<StateVector> evolve_spectral(const QuenchedHamiltonian& h, const StateVector& psi0,
                                         const std::vector<double>& times, EvolveOptions opts = {});

/**
 Independent time-stepping propagator.

 Scheme: fourth-order Yoshida composition of Crank-Nicolson (Cayley) steps,
 (1 + i H w dt/2) psi' = (1 - i H w dt/2) psi with weights w1, w0, w1,
 w1 = 1/(2 - 2^{1/3}), w0 = -2^{1/3} w1. Every substep is a Cayley transform,
 hence unitary for any dt; the global error is O(dt^4).

 Accuracy bound: dt * ||H|| must not exceed 1 (checked against norm_bound(),
 ConfigError otherwise). The phase error per unit time is about
 ||H||^5 dt^4 / 100 at that bound.

 The norm is monitored every step; drift beyond 1e-8 throws NumericalError.
 dt is reduced to t_final / ceil(t_final / dt) so t_final is hit exactly.
 */
StateVector evolve_stepper(const QuenchedHamiltonian& h, const StateVector& psi0, double t_final, double dt);

struct SurvivalReflection {
    double p_init;    ///< |<+k_i|psi>|^2
    double p_reflect; ///< |<-k_i|psi>|^2
};

/// Bloch amplitudes of a Wannier or Bloch state.
Eigen::VectorXcd bloch_amplitudes(const StateVector& psi, const LatticeConfig& cfg);

SurvivalReflection survival_and_reflection(const StateVector& psi, const LatticeConfig& cfg);

/// Population on every Bloch index, keyed by the canonical index.
std::map<int, double> bloch_populations(const StateVector& psi, const LatticeConfig& cfg);

/// Population on |k_i + n>.
double bloch_offset_population(const StateVector& psi, const LatticeConfig& cfg, int n);

/// Sum over k = 1 .. floor(N/2) of |<k|psi>|^2.
double right_mover_population(const StateVector& psi, const LatticeConfig& cfg);

/// |<A0-|psi>|^2 with the phase-adjusted odd combination about the defect.
double odd_sector_weight(const StateVector& psi, const LatticeConfig& cfg);

/// Weight outside the retained Bloch windows {k_i + n} and {-k_i - n}, |n| <= m_levels:
/// how much the finite model leaks past an M-level truncation.
double window_leakage(const StateVector& psi, const LatticeConfig& cfg, int m_levels);

/// Trajectories of the standard observables under the exact model.
struct ExactObservables {
    std::vector<double> times;
    std::vector<double> p_init;
    std::vector<double> p_reflect;
    std::vector<double> p_right;
    /// Even-sector amplitude on the initial level, <A0+|psi> / <A0+|k_i> times
    /// e^{i eps(q_i) t}; equals 1 at t = 0 and P_i = |1 + psi0|^2 / 4.
    std::vector<cplx> psi0;
    /// populations on |k_i + n> for n = 1..offsets
    std::vector<std::vector<double>> p_offset;
};

ExactObservables run_exact(const LatticeConfig& cfg, const std::vector<double>& times, int n_offsets = 3,
                           EvolveOptions opts = {});

} // namespace cuspsim

#pragma once
#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cuspsim {

using cplx = std::complex<double>;

/// Map any integer Bloch index onto the canonical window
/// k in {-floor(N/2), ..., ceil(N/2) - 1}.
int reduce_bloch_index(long long k, int n_sites);

/// Position of canonical Bloch index k inside a Bloch-basis amplitude vector.
inline int bloch_slot(int k, int n_sites) { return k + n_sites / 2; }

/// Inverse of bloch_slot.
inline int bloch_index_of_slot(int slot, int n_sites) { return slot - n_sites / 2; }

/**
 Quench scenario: an N-site periodic ring with unit hopping, initially in the
 Bloch state |k_init>, with on-site potential U switched on at defect_site.
 */
class LatticeConfig {
public:
    /// Throws ConfigError when the scenario violates any invariant.
    LatticeConfig(int n_sites, long long k_init, double defect_strength, int defect_site = 0);

    int n_sites() const { return n_sites_; }
    /// Reduced Bloch index, always in (0, N/2).
    int k_init() const { return k_init_; }
    double defect_strength() const { return defect_strength_; }
    int defect_site() const { return defect_site_; }
    /// q_i = 2 pi k_i / N, in (0, pi).
    double q_init() const;

    LatticeConfig with_defect_site(int j) const { return {n_sites_, k_init_, defect_strength_, j}; }
    LatticeConfig with_strength(double u) const { return {n_sites_, k_init_, u, defect_site_}; }

private:
    int n_sites_;
    int k_init_;
    double defect_strength_;
    int defect_site_;
};

/// Derived parameters of the equally-spaced, equally-coupled model.
struct IdealModelParams {
    double g;               ///< coupling U/N
    double delta;           ///< linearized level spacing 4 pi sin(q_i) / N
    double heisenberg_time; ///< T = 2 pi / delta
    double theta;           ///< per-period phase, 2 atan(gT)
    double omega;           ///< theta / T
    double q_init;

    /// Build from a coupling and level spacing directly (truncated-model studies).
    static IdealModelParams from_coupling(double g, double delta, double q_init = 0.0);
    /// Reduced-units parameters: delta = 1, g = ratio.
    static IdealModelParams from_ratio(double g_over_delta);
};

IdealModelParams derive_params(const LatticeConfig& cfg);

/// <l|k> = exp(2 pi i k l / N) / sqrt(N)
cplx bloch_amplitude(int l, long long k, int n_sites);

/// F(slot, l) = <k|l> = exp(-2 pi i k l / N) / sqrt(N); Bloch amplitudes are F * wannier.
Eigen::MatrixXcd fourier_matrix(int n_sites);

/// Tight-binding band, -2 cos q.
inline double dispersion(double q) { return -2.0 * std::cos(q); }

enum class Basis { Wannier, Bloch, APlusMinus };

std::string_view basis_name(Basis b);

/**
 Normalized amplitudes over a labeled basis.

 Wannier: slot l is site l. Bloch: slot bloch_slot(k). APlusMinus: slots
 [0, 2M] hold A+_{-M..M}, slots [2M+1, 4M+1] hold A-_{-M..M}, with
 A+-_n = (e^{-i q_n j}|k_i+n> +- e^{i q_n j}|-k_i-n>)/sqrt(2). The phases make
 A-_n vanish on the defect site for any j.
 */
class StateVector {
public:
    /// Throws ConfigError if the amplitudes are not normalized to 1e-12.
    StateVector(Basis basis, Eigen::VectorXcd amplitudes);

    Basis basis() const { return basis_; }
    const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
    int basis_size() const { return static_cast<int>(amplitudes_.size()); }
    cplx operator[](int i) const { return amplitudes_[i]; }

    /// Skip the normalization check (evolved states checked by the caller).
    static StateVector unchecked(Basis basis, Eigen::VectorXcd amplitudes);

    static StateVector wannier(int site, int n_sites);
    static StateVector bloch(long long k, int n_sites);

private:
    struct Unchecked {};
    StateVector(Unchecked, Basis basis, Eigen::VectorXcd amplitudes)
        : basis_(basis), amplitudes_(std::move(amplitudes)) {}

    Basis basis_;
    Eigen::VectorXcd amplitudes_;
};

/// Bloch indices k_i + n, n in [-M, M], reduced.
std::vector<int> right_window(const LatticeConfig& cfg, int m_levels);

/// Largest M for which the right window {k_i+n} and left window {-k_i-n} are disjoint.
int max_window_levels(const LatticeConfig& cfg);

/**
 Unitary change of basis. Conversions into APlusMinus need `m_levels`
 and throw ConfigError when the state carries more than 1e-12 weight
 outside the retained window.
 */
StateVector basis_change(const StateVector& state, Basis target, const LatticeConfig& cfg,
                         std::optional<int> m_levels = std::nullopt);

/// Sampled trajectory of an observable.
template <typename T>
struct TimeSeries {
    std::vector<double> times;
    std::vector<T> values;
    std::string label;

    std::size_t size() const { return times.size(); }
};

using RealSeries = TimeSeries<double>;
using ComplexSeries = TimeSeries<cplx>;

/// Throws ConfigError unless lengths match and times strictly increase.
template <typename T>
void validate_series(const TimeSeries<T>& series);

/// n_periods * samples_per_period + 1 equally spaced points on [0, n_periods * period].
std::vector<double> uniform_grid(double period, double n_periods, int samples_per_period);

} // namespace cuspsim

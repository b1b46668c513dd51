#include "cuspsim/lattice.hpp"
#include "cuspsim/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cuspsim {

namespace {

constexpr double kNormTolerance = 1e-12;

double phase_of(long long k, long long l, int n_sites) {
    // Reduce k*l mod N first so the phase argument stays small.
    long long m = ((k % n_sites) * (l % n_sites)) % n_sites;
    if (m < 0) m += n_sites;
    return 2.0 * std::numbers::pi * static_cast<double>(m) / n_sites;
}

cplx unit_phase(double phi) { return {std::cos(phi), std::sin(phi)}; }

} // namespace

int reduce_bloch_index(long long k, int n_sites) {
    if (n_sites <= 0) throw ConfigError("n_sites must be positive");
    const long long lo = -(n_sites / 2);
    long long r = (k - lo) % n_sites;
    if (r < 0) r += n_sites;
    return static_cast<int>(r + lo);
}

LatticeConfig::LatticeConfig(int n_sites, long long k_init, double defect_strength, int defect_site)
    : n_sites_(n_sites), k_init_(0), defect_strength_(defect_strength), defect_site_(defect_site) {
    if (n_sites < 3) throw ConfigError("n_sites must be >= 3, got " + std::to_string(n_sites));
    if (!std::isfinite(defect_strength)) throw ConfigError("defect strength must be finite");
    if (defect_site < 0 || defect_site >= n_sites) {
        throw ConfigError("defect_site " + std::to_string(defect_site) + " outside [0, " +
                          std::to_string(n_sites) + ")");
    }
    k_init_ = reduce_bloch_index(k_init, n_sites);
    // 0 < q < pi with sin q != 0 is exactly 0 < k < N/2.
    if (k_init_ <= 0 || 2 * k_init_ >= n_sites) {
        std::ostringstream msg;
        msg << "k_init " << k_init << " reduces to " << k_init_ << " (N=" << n_sites
            << "); need 0 < q_i < pi away from the band edge/center where sin(q_i) = 0";
        throw ConfigError(msg.str());
    }
}

double LatticeConfig::q_init() const {
    return 2.0 * std::numbers::pi * k_init_ / n_sites_;
}

IdealModelParams IdealModelParams::from_coupling(double g, double delta, double q_init) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("level spacing must be positive");
    if (!std::isfinite(g)) throw ConfigError("coupling must be finite");
    IdealModelParams p{};
    p.g = g;
    p.delta = delta;
    p.heisenberg_time = 2.0 * std::numbers::pi / delta;
    p.theta = 2.0 * std::atan(g * p.heisenberg_time);
    p.omega = p.theta / p.heisenberg_time;
    p.q_init = q_init;
    return p;
}

IdealModelParams IdealModelParams::from_ratio(double g_over_delta) {
    return from_coupling(g_over_delta, 1.0);
}

IdealModelParams derive_params(const LatticeConfig& cfg) {
    const double q = cfg.q_init();
    const double s = std::sin(q);
    if (s <= 0.0) throw ConfigError("sin(q_i) must be positive");
    const double n = cfg.n_sites();
    return IdealModelParams::from_coupling(cfg.defect_strength() / n,
                                           4.0 * std::numbers::pi * s / n, q);
}

cplx bloch_amplitude(int l, long long k, int n_sites) {
    if (l < 0 || l >= n_sites) throw ConfigError("site index out of range");
    return unit_phase(phase_of(k, l, n_sites)) / std::sqrt(static_cast<double>(n_sites));
}

Eigen::MatrixXcd fourier_matrix(int n_sites) {
    Eigen::MatrixXcd f(n_sites, n_sites);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_sites));
    for (int slot = 0; slot < n_sites; ++slot) {
        const int k = bloch_index_of_slot(slot, n_sites);
        for (int l = 0; l < n_sites; ++l) f(slot, l) = std::conj(unit_phase(phase_of(k, l, n_sites))) * norm;
    }
    return f;
}

std::string_view basis_name(Basis b) {
    switch (b) {
    case Basis::Wannier: return "wannier";
    case Basis::Bloch: return "bloch";
    case Basis::APlusMinus: return "a_plus_minus";
    }
    return "?";
}

StateVector::StateVector(Basis basis, Eigen::VectorXcd amplitudes)
    : basis_(basis), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) throw ConfigError("empty state vector");
    const double norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "state vector not normalized: |psi|^2 = " << norm2;
        throw ConfigError(msg.str());
    }
}

StateVector StateVector::unchecked(Basis basis, Eigen::VectorXcd amplitudes) {
    return StateVector(Unchecked{}, basis, std::move(amplitudes));
}

StateVector StateVector::wannier(int site, int n_sites) {
    if (site < 0 || site >= n_sites) throw ConfigError("site index out of range");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_sites);
    v[site] = 1.0;
    return {Basis::Wannier, std::move(v)};
}

StateVector StateVector::bloch(long long k, int n_sites) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_sites);
    v[bloch_slot(reduce_bloch_index(k, n_sites), n_sites)] = 1.0;
    return {Basis::Bloch, std::move(v)};
}

std::vector<int> right_window(const LatticeConfig& cfg, int m_levels) {
    std::vector<int> ks;
    ks.reserve(2 * m_levels + 1);
    for (int n = -m_levels; n <= m_levels; ++n) {
        ks.push_back(reduce_bloch_index(static_cast<long long>(cfg.k_init()) + n, cfg.n_sites()));
    }
    return ks;
}

int max_window_levels(const LatticeConfig& cfg) {
    // Need 0 < k_i - M and k_i + M < N - (k_i + M), i.e. both windows strictly
    // inside the open right/left half bands.
    const int k = cfg.k_init();
    const int n = cfg.n_sites();
    int m = k - 1;
    while (m >= 0 && 2 * (k + m) >= n) --m;
    return m;
}

namespace {

Eigen::VectorXcd wannier_to_bloch(const Eigen::VectorXcd& psi, int n_sites) {
    return fourier_matrix(n_sites) * psi;
}

Eigen::VectorXcd bloch_to_wannier(const Eigen::VectorXcd& c, int n_sites) {
    return fourier_matrix(n_sites).adjoint() * c;
}

int window_levels_of(const StateVector& s) {
    const int size = s.basis_size();
    if (size % 2 != 0 || (size / 2) % 2 != 1) {
        throw ConfigError("APlusMinus state must have 2(2M+1) amplitudes");
    }
    return (size / 2 - 1) / 2;
}

void require_window(const LatticeConfig& cfg, int m_levels) {
    if (m_levels < 0) throw ConfigError("window size M must be >= 0");
    if (m_levels > max_window_levels(cfg)) {
        throw ConfigError("window M=" + std::to_string(m_levels) +
                          " makes the right/left Bloch windows overlap (max " +
                          std::to_string(max_window_levels(cfg)) + ")");
    }
}

Eigen::VectorXcd bloch_to_aplusminus(const Eigen::VectorXcd& c, const LatticeConfig& cfg, int m) {
    require_window(cfg, m);
    const int n_sites = cfg.n_sites();
    const int width = 2 * m + 1;
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    Eigen::VectorXcd out(2 * width);
    double captured = 0.0;
    for (int n = -m; n <= m; ++n) {
        const long long kr = static_cast<long long>(cfg.k_init()) + n;
        const cplx cr = c[bloch_slot(reduce_bloch_index(kr, n_sites), n_sites)];
        const cplx cl = c[bloch_slot(reduce_bloch_index(-kr, n_sites), n_sites)];
        captured += std::norm(cr) + std::norm(cl);
        const cplx ph = unit_phase(phase_of(kr, cfg.defect_site(), n_sites));
        out[n + m] = (ph * cr + std::conj(ph) * cl) * inv_sqrt2;
        out[width + n + m] = (ph * cr - std::conj(ph) * cl) * inv_sqrt2;
    }
    const double leaked = c.squaredNorm() - captured;
    if (leaked > kNormTolerance) {
        std::ostringstream msg;
        msg << "state has weight " << leaked << " outside the M=" << m << " window";
        throw ConfigError(msg.str());
    }
    return out;
}

Eigen::VectorXcd aplusminus_to_bloch(const Eigen::VectorXcd& a, const LatticeConfig& cfg, int m) {
    require_window(cfg, m);
    const int n_sites = cfg.n_sites();
    const int width = 2 * m + 1;
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n_sites);
    for (int n = -m; n <= m; ++n) {
        const long long kr = static_cast<long long>(cfg.k_init()) + n;
        const cplx plus = a[n + m];
        const cplx minus = a[width + n + m];
        const cplx ph = unit_phase(phase_of(kr, cfg.defect_site(), n_sites));
        out[bloch_slot(reduce_bloch_index(kr, n_sites), n_sites)] = std::conj(ph) * (plus + minus) * inv_sqrt2;
        out[bloch_slot(reduce_bloch_index(-kr, n_sites), n_sites)] = ph * (plus - minus) * inv_sqrt2;
    }
    return out;
}

} // namespace

StateVector basis_change(const StateVector& state, Basis target, const LatticeConfig& cfg,
                         std::optional<int> m_levels) {
    if (state.basis() == target) throw ConfigError("state already in target basis");
    const int n_sites = cfg.n_sites();
    if (state.basis() != Basis::APlusMinus && state.basis_size() != n_sites) {
        throw ConfigError("state size does not match n_sites");
    }

    // Route everything through the Bloch basis.
    Eigen::VectorXcd bloch;
    switch (state.basis()) {
    case Basis::Bloch: bloch = state.amplitudes(); break;
    case Basis::Wannier: bloch = wannier_to_bloch(state.amplitudes(), n_sites); break;
    case Basis::APlusMinus:
        bloch = aplusminus_to_bloch(state.amplitudes(), cfg, window_levels_of(state));
        break;
    }

    switch (target) {
    case Basis::Bloch: return StateVector::unchecked(Basis::Bloch, std::move(bloch));
    case Basis::Wannier:
        return StateVector::unchecked(Basis::Wannier, bloch_to_wannier(bloch, n_sites));
    case Basis::APlusMinus:
        if (!m_levels) throw ConfigError("conversion to APlusMinus needs the window size M");
        return StateVector::unchecked(Basis::APlusMinus, bloch_to_aplusminus(bloch, cfg, *m_levels));
    }
    throw ConfigError("unknown basis");
}

template <typename T>
void validate_series(const TimeSeries<T>& series) {
    if (series.times.size() != series.values.size()) {
        throw ConfigError("time series '" + series.label + "': length mismatch");
    }
    for (std::size_t i = 1; i < series.times.size(); ++i) {
        if (!(series.times[i] > series.times[i - 1])) {
            throw ConfigError("time series '" + series.label + "': times not strictly increasing");
        }
    }
}

template void validate_series(const TimeSeries<double>&);
template void validate_series(const TimeSeries<cplx>&);

std::vector<double> uniform_grid(double period, double n_periods, int samples_per_period) {
    if (!(period > 0.0)) throw ConfigError("period must be positive");
    if (!(n_periods > 0.0)) throw ConfigError("number of periods must be positive");
    if (samples_per_period < 1) throw ConfigError("samples_per_period must be >= 1");
    const long count = std::lround(n_periods * samples_per_period);
    const double dt = period / samples_per_period;
    std::vector<double> t(count + 1);
    for (long i = 0; i <= count; ++i) t[i] = static_cast<double>(i) * dt;
    return t;
}

} // namespace cuspsim

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "cuspsim/analysis.hpp"
#include "cuspsim/exact.hpp"
#include "cuspsim/ideal.hpp"
#include "cuspsim/truncated.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace cuspsim;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "FAILED " << what << "; ";
        }
    }
};

struct Scenario {
    int n;
    long long k;
    double u;
};

constexpr Scenario fig1a{401, 80, 1.5};
constexpr Scenario fig1b{301, 75, 2.0};
constexpr Scenario fig1c{201, 50, 12.0};

LatticeConfig lattice(const Scenario& s) { return {s.n, s.k, s.u}; }

RealSeries as_series(const std::vector<double>& t, const std::vector<double>& v, const char* label) {
    return {t, v, label};
}

struct ExactRun {
    IdealModelParams params;
    std::vector<double> times;
    ExactObservables obs;
};

ExactRun exact_run(const Scenario& s, double periods, int spp, int offsets = 3) {
    const LatticeConfig cfg = lattice(s);
    ExactRun r{derive_params(cfg), {}, {}};
    r.times = uniform_grid(r.params.heisenberg_time, periods, spp);
    r.obs = run_exact(cfg, r.times, offsets, {.parallel = true});
    return r;
}

double distance_to_set(double x, std::initializer_list<double> set) {
    double best = 1e300;
    for (double v : set) best = std::min(best, std::abs(x - v));
    return best;
}

std::size_t nearest_index(const std::vector<double>& times, double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    std::size_t i = static_cast<std::size_t>(it - times.begin());
    if (i == times.size()) return i - 1;
    if (i > 0 && t - times[i - 1] < times[i] - t) return i - 1;
    return i;
}

// 1. cusp regularity and tip values, (301, 75, 2)
void criterion_regularity(Outcome& out) {
    const int spp = 200;
    const ExactRun run = exact_run(fig1b, 6.0, spp);
    const auto& p = run.params;
    const double q = 2.0 * pi * fig1b.k / fig1b.n;
    const double t_formula = fig1b.n / (2.0 * std::sin(q));
    out.require(std::abs(t_formula - p.heisenberg_time) < 1e-9 * t_formula, "T = N / (2 sin q)");

    const auto rep_i = detect_cusps(as_series(run.times, run.obs.p_init, "P_i"), p);
    CuspDetectorOptions reflect_opts;
    reflect_opts.envelope_sign = -1;
    const auto rep_r = detect_cusps(as_series(run.times, run.obs.p_reflect, "P_r"), p, reflect_opts);
    const auto merged = merge_cusp_times({rep_i, rep_r}, 0.25 * p.heisenberg_time);

    out.require(merged.size() >= 5, "at least five revivals detected");
    double worst_spacing = 0.0;
    for (std::size_t i = 1; i < merged.size(); ++i) {
        worst_spacing = std::max(worst_spacing, std::abs(merged[i] - merged[i - 1] - p.heisenberg_time) / p.heisenberg_time);
    }
    out.require(worst_spacing < 0.02, "spacing within 2% of T");

    double worst_value = 0.0;
    for (double t : merged) {
        const std::size_t i = nearest_index(run.times, t);
        worst_value = std::max(worst_value, distance_to_set(run.obs.p_init[i], {0.0, 0.5, 1.0}));
        worst_value = std::max(worst_value, distance_to_set(run.obs.p_reflect[i], {0.0, 0.5, 1.0}));
    }
    // The curve that carries a cusp is at 0.5 or 1 there.
    for (const auto* rep : {&rep_i, &rep_r}) {
        for (double tip : rep->tip_values) worst_value = std::max(worst_value, distance_to_set(tip, {0.5, 1.0}));
    }
    out.require(worst_value < 0.02, "cusp values on the closed-form pattern");
    out.detail << "cusps P_i=" << rep_i.cusp_times.size() << " P_r=" << rep_r.cusp_times.size()
               << " merged=" << merged.size() << ", max |spacing/T - 1|=" << worst_spacing
               << ", max tip distance=" << worst_value;
}

// 2. exact vs closed form, all three scenarios
void criterion_exact_vs_ideal(Outcome& out) {
    for (const Scenario& s : {fig1a, fig1b, fig1c}) {
        const ExactRun run = exact_run(s, 5.0, 200, 0);
        std::vector<double> pi_ideal, pr_ideal;
        for (double t : run.times) {
            const auto pops = populations_closed_form(run.params, t);
            pi_ideal.push_back(pops.p_init);
            pr_ideal.push_back(pops.p_reflect);
        }
        const double ei = compare_series(as_series(run.times, run.obs.p_init, "P_i"),
                                         as_series(run.times, pi_ideal, "P_i")).max_abs_error;
        const double er = compare_series(as_series(run.times, run.obs.p_reflect, "P_r"),
                                         as_series(run.times, pr_ideal, "P_r")).max_abs_error;
        out.require(ei < 0.05 && er < 0.05, "max error < 0.05");
        out.detail << "(" << s.n << "," << s.k << "," << s.u << "): P_i " << ei << ", P_r " << er << "; ";
    }
}

// 3. P_i + P_r = 1 at revivals, < 1 elsewhere
void criterion_sum_rule(Outcome& out) {
    for (const Scenario& s : {fig1a, fig1b, fig1c}) {
        const ExactRun run = exact_run(s, 5.0, 200, 0);
        const auto& p = run.params;
        const auto rep_i = detect_cusps(as_series(run.times, run.obs.p_init, "P_i"), p);
        const auto rep_r = detect_cusps(as_series(run.times, run.obs.p_reflect, "P_r"), p);
        const auto merged = merge_cusp_times({rep_i, rep_r}, 0.25 * p.heisenberg_time);
        double worst_at = 0.0;
        std::vector<std::size_t> cusp_idx;
        for (double t : merged) {
            const std::size_t i = nearest_index(run.times, t);
            cusp_idx.push_back(i);
            worst_at = std::max(worst_at, std::abs(run.obs.p_init[i] + run.obs.p_reflect[i] - 1.0));
        }
        // Strictly below one away from the cusp samples (and t = 0) by more than two samples.
        double max_between = 0.0;
        for (std::size_t i = 3; i < run.times.size(); ++i) {
            bool near = false;
            for (std::size_t c : cusp_idx) near = near || (i + 2 >= c && i <= c + 2);
            if (!near) max_between = std::max(max_between, run.obs.p_init[i] + run.obs.p_reflect[i]);
        }
        out.require(!merged.empty(), "cusps found");
        out.require(worst_at < 0.02, "sum rule at cusps");
        out.require(max_between < 1.0, "sum below one between cusps");
        out.detail << "(" << s.n << "," << s.k << "," << s.u << "): " << merged.size()
                   << " cusps, max |P_i+P_r-1|=" << worst_at << ", max between=" << max_between << "; ";
    }
}

// 4. truncated-model convergence of |psi0|^2
void criterion_truncation(Outcome& out) {
    const auto p = IdealModelParams::from_ratio(0.5);
    const auto grid = uniform_grid(p.heisenberg_time, 1.0, 400);
    double previous = 1e300;
    double last = 0.0;
    for (int m : {5, 10, 20, 40}) {
        const auto traj = evolve_truncated(build_truncated(p, m), grid);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            err = std::max(err, std::abs(std::norm(traj.psi_n(i, 0)) - std::norm(psi0_closed_form(p, grid[i]))));
        }
        out.require(err <= previous, "non-increasing at M=" + std::to_string(m));
        out.detail << "M=" << m << ": " << err << "; ";
        previous = err;
        last = err;
    }
    out.require(last < 0.02, "error < 0.02 at M=40");
}

// 5. S from the truncated model
void criterion_s_average(Outcome& out) {
    const auto p = IdealModelParams::from_ratio(0.125);
    const int spp = 400;
    const int periods = 5;
    const auto traj = evolve_truncated(build_truncated(p, 10), uniform_grid(p.heisenberg_time, periods, spp));
    double worst_mod = 0.0, worst_phase = 0.0, min_spread = 1e300;
    for (int r = 0; r < periods; ++r) {
        cplx mean = 0.0;
        for (int i = r * spp; i < (r + 1) * spp; ++i) mean += traj.s_values[i];
        mean /= static_cast<double>(spp);
        const cplx expected = s_closed_form(p, (r + 0.5) * p.heisenberg_time).value;
        worst_mod = std::max(worst_mod, std::abs(std::abs(mean) - std::abs(expected)));
        worst_phase = std::max(worst_phase, std::abs(std::arg(mean / expected)));
        double spread = 0.0;
        for (int i = r * spp; i < (r + 1) * spp; ++i) spread = std::max(spread, std::abs(traj.s_values[i] - mean));
        min_spread = std::min(min_spread, spread);
    }
    out.require(worst_mod < 0.05, "modulus within 0.05");
    out.require(worst_phase < 0.1, "phase within 0.1 rad");
    out.require(min_spread > 1e-3, "instantaneous S oscillates about the average");
    out.detail << "max |dmod|=" << worst_mod << ", max |dphase|=" << worst_phase
               << " rad, min in-period excursion=" << min_spread;
}

// 6. spectral vs stepping propagator
void criterion_propagators(Outcome& out) {
    const LatticeConfig cfg(101, 25, 1.5);
    const auto h = build_hamiltonian(cfg);
    const double period = derive_params(cfg).heisenberg_time;
    const auto psi0 = StateVector::bloch(25, 101);
    std::vector<double> times;
    for (int i = 1; i <= 8; ++i) times.push_back(i * period / 4.0);
    const auto spectral = evolve_spectral(h, psi0, times);
    StateVector stepped = psi0;
    double t_prev = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        stepped = evolve_stepper(h, stepped, times[i] - t_prev, 0.01);
        t_prev = times[i];
        worst = std::max(worst, (stepped.amplitudes() - spectral[i].amplitudes()).cwiseAbs().maxCoeff());
    }
    out.require(worst < 1e-6, "max-norm difference < 1e-6");
    out.detail << "max |psi_spectral - psi_stepper| over [0, 2T] = " << worst;
}

// 7. offset populations, (201, 50, 12)
void criterion_offsets(Outcome& out) {
    const ExactRun run = exact_run(fig1c, 5.0, 200, 3);
    double err1 = 0.0;
    for (std::size_t i = 0; i < run.times.size(); ++i) {
        err1 = std::max(err1, std::abs(run.obs.p_offset[0][i] - offset_population_closed_form(run.params, 1, run.times[i])));
    }
    out.require(err1 < 0.02, "P_1 within 0.02");
    const double amp1 = *std::max_element(run.obs.p_offset[0].begin(), run.obs.p_offset[0].end());
    out.detail << "max |P_1 - closed form|=" << err1 << ", n^2 A_n / A_1:";
    for (int n = 2; n <= 3; ++n) {
        const auto& col = run.obs.p_offset[n - 1];
        const double ratio = n * n * *std::max_element(col.begin(), col.end()) / amp1;
        out.require(std::abs(ratio - 1.0) < 0.2, "1/n^2 scaling for n=" + std::to_string(n));
        out.detail << " n=" << n << " " << ratio;
    }
}

// 8. right-mover population, (201, 50, 12)
void criterion_right_movers(Outcome& out) {
    const int spp = 200;
    const ExactRun run = exact_run(fig1c, 5.0, spp, 0);
    const auto& p = run.params;
    double err = 0.0;
    for (std::size_t i = 0; i < run.times.size(); ++i) {
        err = std::max(err, std::abs(run.obs.p_right[i] - right_mover_closed_form(p, run.times[i])));
    }
    out.require(err < 0.03, "closed form within 0.03");

    double worst_r2 = 1.0;
    for (int r = 0; r < 5; ++r) {
        std::vector<double> x, y;
        for (int i = r * spp + spp / 10; i <= r * spp + spp - spp / 10; ++i) {
            x.push_back(run.times[i]);
            y.push_back(run.obs.p_right[i]);
        }
        worst_r2 = std::min(worst_r2, linear_fit(x, y).r_squared);
    }
    out.require(worst_r2 > 0.99, "R^2 > 0.99 in every period");

    const auto rep = detect_cusps(as_series(run.times, run.obs.p_right, "P_R"), p);
    out.require(!rep.empty(), "cusps found");
    const double env = rep.empty() ? 1.0 : envelope_residual(rep, p, 1);
    out.require(env < 0.03, "tips on (1 + cos wt)/2");
    out.detail << "max |P_R - closed form|=" << err << ", min R^2=" << worst_r2 << ", " << rep.cusp_times.size()
               << " cusps, envelope residual=" << env;
}

// 9. sinc-sum identity
void criterion_identity(Outcome& out) {
    for (double alpha : {0.5, 1.0, pi / 2.0, 2.5}) {
        const auto s = sinc_sum_identity(alpha, 1000000);
        const double err = std::abs(s.partial_sum - pi / alpha);
        out.require(err < 1e-5, "identity within 1e-5");
        out.detail << "a=" << alpha << ": " << s.partial_sum << " (err " << err << "); ";
    }
    const double half = sinc_sum_identity(pi / 2.0, 1000000).partial_sum;
    out.require(std::abs(half - 2.0) < 1e-5, "value 2 at pi/2");
}

// 10. structural invariants
void criterion_invariants(Outcome& out) {
    double unitarity = 0.0, odd = 0.0, covariance = 0.0, revival = 0.0, theta = 0.0;
    for (const Scenario& s : {fig1b, fig1c}) {
        const LatticeConfig cfg = lattice(s);
        const auto p = derive_params(cfg);
        std::vector<double> times;
        for (int i = 0; i <= 40; ++i) times.push_back(p.heisenberg_time * i / 8.0 + 0.37 * i);
        const auto states = evolve_spectral(build_hamiltonian(cfg), StateVector::bloch(s.k, s.n), times);
        const LatticeConfig moved = cfg.with_defect_site(s.n / 3);
        const auto states_moved = evolve_spectral(build_hamiltonian(moved), StateVector::bloch(s.k, s.n), times);
        for (std::size_t i = 0; i < times.size(); ++i) {
            unitarity = std::max(unitarity, std::abs(states[i].amplitudes().squaredNorm() - 1.0));
            odd = std::max(odd, std::abs(odd_sector_weight(states[i], cfg) - 0.5));
            odd = std::max(odd, std::abs(odd_sector_weight(states_moved[i], moved) - 0.5));
            const auto a = survival_and_reflection(states[i], cfg);
            const auto b = survival_and_reflection(states_moved[i], moved);
            covariance = std::max({covariance, std::abs(a.p_init - b.p_init), std::abs(a.p_reflect - b.p_reflect)});
        }
        for (double frac : {0.0, 0.13, 0.5, 0.91}) {
            for (int r = 0; r < 4; ++r) {
                const double t = (r + frac) * p.heisenberg_time;
                const cplx turn = std::polar(1.0, -p.theta);
                revival = std::max(revival, std::abs(psi0_closed_form(p, t + p.heisenberg_time) - psi0_closed_form(p, t) * turn));
                for (int n : {-2, 1, 3}) {
                    revival = std::max(revival, std::abs(psi_n_closed_form(p, n, t + p.heisenberg_time) -
                                                         psi_n_closed_form(p, n, t) * turn));
                }
            }
        }
        theta = std::max(theta, std::abs(p.theta - 2.0 * std::atan(p.g * p.heisenberg_time)));
        theta = std::max(theta, std::abs(p.omega * p.heisenberg_time - p.theta));
    }
    out.require(unitarity < 1e-10, "unitarity");
    out.require(odd < 1e-10, "odd-sector weight");
    out.require(covariance < 1e-10, "defect-site covariance");
    out.require(revival < 1e-12, "closed-form revival");
    out.require(theta < 1e-12, "theta = 2 atan(gT)");
    out.detail << "norm " << unitarity << ", odd " << odd << ", covariance " << covariance << ", revival " << revival
               << ", theta " << theta;
}

// 11. detector calibration
void criterion_detector(Outcome& out) {
    const auto p = IdealModelParams::from_ratio(0.25);
    const double period = p.heisenberg_time;
    int sawtooth_runs = 0, smooth_hits = 0;
    for (int spp : {40, 100, 400}) {
        RealSeries saw;
        saw.times = uniform_grid(period, 6.0, spp);
        for (double t : saw.times) saw.values.push_back(std::abs(std::fmod(t, period) - 0.5 * period));
        for (double kappa = 3.0; kappa <= 10.0; kappa += 1.0) {
            CuspDetectorOptions opts;
            opts.kappa = kappa;
            const auto rep = detect_cusps(saw, p, opts);
            // corners at every half period strictly inside the window
            bool ok = rep.cusp_times.size() == 11;
            for (std::size_t i = 0; ok && i < rep.cusp_times.size(); ++i) {
                ok = std::abs(rep.cusp_times[i] - 0.5 * period * (i + 1.0)) < 1e-9 * period;
            }
            out.require(ok, "sawtooth break points at spp=" + std::to_string(spp));
            ++sawtooth_runs;
        }
        for (double freq : {0.25, 0.5, 1.0, 1.5}) {
            RealSeries smooth;
            smooth.times = uniform_grid(period, 6.0, spp);
            for (double t : smooth.times) smooth.values.push_back(0.5 + 0.4 * std::sin(2.0 * pi * freq * t / period + 0.3));
            smooth_hits += static_cast<int>(detect_cusps(smooth, p).cusp_times.size());
        }
    }
    out.require(smooth_hits == 0, "no hits on sinusoids");
    out.detail << sawtooth_runs << " sawtooth runs, " << smooth_hits << " false positives on sinusoids";
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"cusp regularity (301, 75, 2)", criterion_regularity},
        {"exact vs closed form, three scenarios", criterion_exact_vs_ideal},
        {"sum rule at revivals", criterion_sum_rule},
        {"truncated convergence, g/Delta = 0.5", criterion_truncation},
        {"per-period average of S, M = 10", criterion_s_average},
        {"spectral vs stepping propagator", criterion_propagators},
        {"offset populations P_n", criterion_offsets},
        {"right-mover population P_R", criterion_right_movers},
        {"sinc-sum identity", criterion_identity},
        {"structural invariants", criterion_invariants},
        {"cusp detector calibration", criterion_detector},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!out.pass) ++failures;
        std::printf("%s criterion %zu: %s | %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    out.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}

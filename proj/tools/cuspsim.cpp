// cuspsim: run quench scenarios, compare series, detect cusps, rebuild figure data.
#include "cuspsim/analysis.hpp"
#include "cuspsim/csv.hpp"
#include "cuspsim/errors.hpp"
#include "cuspsim/exact.hpp"
#include "cuspsim/ideal.hpp"
#include "cuspsim/runner.hpp"
#include "cuspsim/truncated.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace cuspsim;
namespace fs = std::filesystem;

namespace {

// Flags given on the command line; anything unset falls back to --config, then to defaults.
struct RunFlags {
    std::string config;
    std::optional<int> n;
    std::optional<long long> k;
    std::optional<double> u;
    std::optional<int> j;
    std::optional<double> ratio;
    std::optional<double> periods;
    std::optional<double> t_max;
    std::optional<int> spp;
    std::optional<std::string> methods;
    std::optional<int> m;
    std::optional<int> offsets;
    std::optional<std::string> out;
    bool detect = false;
    bool serial = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_methods, bool with_lattice) {
    cmd->add_option("--config", f.config, "JSON config file; flags override its values");
    if (with_lattice) {
        cmd->add_option("--n", f.n, "ring size N");
        cmd->add_option("--k", f.k, "initial Bloch index k_i");
        cmd->add_option("--u", f.u, "defect strength U");
        cmd->add_option("--j", f.j, "defect site");
    }
    cmd->add_option("--ratio", f.ratio, "bare g/Delta in reduced units (no lattice)");
    auto* periods = cmd->add_option("--periods", f.periods, "duration in units of T");
    cmd->add_option("--t-max", f.t_max, "duration in absolute time units")->excludes(periods);
    cmd->add_option("--samples-per-period", f.spp, "samples per period T");
    if (with_methods) cmd->add_option("--methods", f.methods, "comma list of exact,truncated,ideal");
    cmd->add_option("--m", f.m, "truncation M for the truncated method");
    cmd->add_option("--offsets", f.offsets, "number of P_n columns (n = 1..)");
    cmd->add_option("--out", f.out, "output CSV path");
    cmd->add_flag("--detect-cusps", f.detect, "report cusps of P_i and P_r");
    cmd->add_flag("--serial", f.serial, "single-threaded, bit-identical reruns");
}

RunConfig resolve(const RunFlags& f, const std::string& command, std::optional<Method> fixed) {
    RunConfig c;
    if (fixed) c.methods = {*fixed};
    if (!f.config.empty()) c = load_run_config(f.config, c);
    c.command = command;
    if (f.n) c.n_sites = *f.n;
    if (f.k) c.k_init = *f.k;
    if (f.u) c.defect_strength = *f.u;
    if (f.j) c.defect_site = *f.j;
    if (f.ratio) c.ratio = *f.ratio;
    if (f.periods) {
        c.t_max = *f.periods;
        c.time_unit = TimeUnit::Periods;
    }
    if (f.t_max) {
        c.t_max = *f.t_max;
        c.time_unit = TimeUnit::Absolute;
    }
    if (f.spp) c.samples_per_period = *f.spp;
    if (f.methods) c.methods = parse_methods(*f.methods);
    if (fixed) c.methods = {*fixed};
    if (f.m) c.m_levels = *f.m;
    if (f.offsets) c.n_offsets = *f.offsets;
    if (f.out) c.output = *f.out;
    if (f.detect) c.detect_cusps = true;
    if (f.serial) c.serial = true;
    c.validate();
    return c;
}

IdealModelParams params_from_metadata(const CsvTable& t) {
    IdealModelParams p{};
    auto get = [&](const char* key) {
        const std::string v = t.meta(key);
        if (v.empty()) throw ConfigError(std::string("CSV metadata lacks '") + key + "'");
        return std::stod(v);
    };
    p.g = get("g");
    p.delta = get("delta");
    p.heisenberg_time = get("heisenberg_time");
    p.theta = get("theta");
    p.omega = get("omega");
    p.q_init = get("q_init");
    return p;
}

void print_cusps(const std::string& title, const CuspReport& rep, const IdealModelParams& p) {
    const double period = p.heisenberg_time;
    std::printf("%s: %zu cusps (threshold %.3g)\n", title.c_str(), rep.cusp_times.size(), rep.threshold);
    std::printf("  %-4s %14s %10s %10s %12s\n", "#", "t", "t/T", "value", "env resid");
    for (std::size_t i = 0; i < rep.cusp_times.size(); ++i) {
        std::printf("  %-4zu %14.6f %10.4f %10.5f %12.3e\n", i, rep.cusp_times[i], rep.cusp_times[i] / period,
                    rep.tip_values[i], rep.envelope_residuals[i]);
    }
    if (rep.cusp_times.size() >= 2) {
        const double s = rep.mean_spacing();
        std::printf("  mean spacing %.6f = %.5f T (T = %.6f)\n", s, s / period, period);
    }
    // weak cusps can go undetected, so also fit t = r T' with r the nearest revival index
    double rt = 0.0, rr = 0.0;
    for (double t : rep.cusp_times) {
        const double r = std::max(1.0, std::round(t / period));
        rt += r * t;
        rr += r * r;
    }
    if (rr > 0.0) std::printf("  fitted spacing %.6f = %.5f T\n", rt / rr, rt / rr / period);
}

CsvTable cusp_table(const CuspReport& rep, double period) {
    CsvTable t;
    std::vector<double> reduced;
    for (double x : rep.cusp_times) reduced.push_back(x / period);
    t.add_column("t", rep.cusp_times);
    t.add_column("t_over_T", std::move(reduced));
    t.add_column("value", rep.tip_values);
    t.add_column("envelope_residual", rep.envelope_residuals);
    return t;
}

std::string sibling(const std::string& path, const std::string& suffix) {
    const fs::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix + ".csv")).string();
}

void report_cusps(const RunConfig& cfg, const RunResult& result) {
    const IdealModelParams p = cfg.params();
    for (const auto& [method, table] : result.tables) {
        for (int sign : {1, -1}) {
            const char* col = sign > 0 ? "P_i" : "P_r";
            CuspDetectorOptions opts;
            opts.envelope_sign = sign;
            const CuspReport rep = detect_cusps(table.series(col), p, opts);
            print_cusps(method_name(method) + " " + col, rep, p);
            CsvTable out = cusp_table(rep, p.heisenberg_time);
            out.metadata = {{"column", col}, {"method", method_name(method)}, {"config", cfg.to_json()}};
            write_csv(sibling(output_path(cfg, method), std::string("_cusps_") + col), out);
        }
    }
}

int cmd_run(const RunFlags& f, const std::string& command, std::optional<Method> fixed) {
    const RunConfig cfg = resolve(f, command, fixed);
    const RunResult result = run(cfg);
    for (const auto& [m, path] : result.files) std::printf("%s -> %s\n", method_name(m).c_str(), path.c_str());
    if (cfg.detect_cusps) report_cusps(cfg, result);
    return 0;
}

void print_comparison(const std::string& label, const ComparisonReport& r, bool per_period) {
    std::printf("%-12s max %.6e  rms %.6e  (%zu samples)\n", label.c_str(), r.max_abs_error, r.rms_error, r.samples);
    if (!per_period) return;
    for (const auto& pe : r.per_period) {
        std::printf("  period %-4ld max %.6e  rms %.6e\n", pe.period, pe.max_abs_error, pe.rms_error);
    }
}

int cmd_compare(const std::string& a_path, const std::string& b_path, std::vector<std::string> cols, bool per_period) {
    const CsvTable a = read_csv(a_path);
    const CsvTable b = read_csv(b_path);
    std::optional<double> period;
    if (const std::string T = a.meta("heisenberg_time"); !T.empty()) period = std::stod(T);
    if (cols.empty()) {
        for (const auto& c : a.columns) {
            if (c != "t" && c != "t_over_T" && b.has_column(c)) cols.push_back(c);
        }
    }
    if (cols.empty()) throw ConfigError("no common columns to compare");
    for (const auto& c : cols) print_comparison(c, compare_series(a.series(c), b.series(c), period), per_period);
    return 0;
}

int cmd_cusps(const std::string& in, const std::string& col, CuspDetectorOptions opts, const std::string& out) {
    const CsvTable table = read_csv(in);
    const IdealModelParams p = params_from_metadata(table);
    const CuspReport rep = detect_cusps(table.series(col), p, opts);
    print_cusps(col, rep, p);
    if (!out.empty()) {
        CsvTable t = cusp_table(rep, p.heisenberg_time);
        t.metadata = {{"source", in}, {"column", col}};
        write_csv(out, t);
        std::printf("cusps -> %s\n", out.c_str());
    }
    return 0;
}

int cmd_identity(double alpha, long n_max) {
    const SincSum s = sinc_sum_identity(alpha, n_max);
    const double exact = std::numbers::pi / alpha;
    std::printf("alpha       %.10g\n", alpha);
    std::printf("n_max       %ld\n", n_max);
    std::printf("partial sum %.15f\n", s.partial_sum);
    std::printf("pi / alpha  %.15f\n", exact);
    std::printf("difference  %.3e (tail bound %.3e)\n", s.partial_sum - exact, s.tail_bound);
    return 0;
}

// ---- figure recipes --------------------------------------------------------

struct Scenario {
    const char* name;
    int n;
    long long k;
    double u;
};

constexpr Scenario kFig1[] = {{"a", 401, 80, 1.5}, {"b", 301, 75, 2.0}, {"c", 201, 50, 12.0}};

RunConfig lattice_run(const Scenario& s, double periods, int spp, const fs::path& out, bool serial) {
    RunConfig c;
    c.n_sites = s.n;
    c.k_init = s.k;
    c.defect_strength = s.u;
    c.t_max = periods;
    c.samples_per_period = spp;
    c.methods = {Method::Exact, Method::Ideal};
    c.output = out.string();
    c.serial = serial;
    c.command = "figures";
    return c;
}

RunResult run_and_list(const RunConfig& cfg) {
    RunResult r = run(cfg);
    for (const auto& [m, path] : r.files) std::printf("  %s -> %s\n", method_name(m).c_str(), path.c_str());
    return r;
}

const CsvTable& table_for(const RunResult& r, Method m) {
    for (const auto& [method, table] : r.tables) {
        if (method == m) return table;
    }
    throw ConfigError("method missing from run");
}

void figure1(const fs::path& dir, bool serial) {
    std::puts("figure 1: P_i and P_r, exact and closed form, 6 periods");
    for (const Scenario& s : kFig1) {
        std::printf("(%d, %lld, %g)\n", s.n, s.k, s.u);
        const RunConfig cfg = lattice_run(s, 6.0, 200, dir / ("fig1" + std::string(s.name) + ".csv"), serial);
        const RunResult r = run_and_list(cfg);
        const IdealModelParams p = cfg.params();
        CuspDetectorOptions opts;
        const CuspReport pi = detect_cusps(table_for(r, Method::Exact).series("P_i"), p, opts);
        opts.envelope_sign = -1;
        const CuspReport pr = detect_cusps(table_for(r, Method::Exact).series("P_r"), p, opts);
        const auto merged = merge_cusp_times({pi, pr}, 0.25 * p.heisenberg_time);
        std::printf("  cusps P_i %zu, P_r %zu, merged %zu; T = %.6f, theta = %.6f\n", pi.cusp_times.size(),
                    pr.cusp_times.size(), merged.size(), p.heisenberg_time, p.theta);
    }
}

void figure2(const fs::path& dir, bool serial) {
    std::puts("figure 2: rounded cusps of (301, 75, 2), fine sampling");
    const int spp = 4000;
    const RunConfig cfg = lattice_run(kFig1[1], 4.0, spp, dir / "fig2.csv", serial);
    const RunResult r = run_and_list(cfg);
    const IdealModelParams p = cfg.params();
    const double period = p.heisenberg_time;
    std::printf("  %-3s %-4s %12s %12s %12s\n", "r", "col", "width/T", "peak dev", "peak t/T");
    for (int rev = 1; rev <= 3; ++rev) {
        for (const char* col : {"P_i", "P_r"}) {
            const auto w = rounding_width(table_for(r, Method::Exact).series(col),
                                          table_for(r, Method::Ideal).series(col), rev * period, 0.25 * period);
            std::printf("  %-3d %-4s %12.5f %12.5f %12.5f\n", rev, col, w.width / period, w.peak_deviation,
                        w.peak_time / period);
        }
    }
}

void figure4(const fs::path& dir, bool serial) {
    std::puts("figure 4: S and psi0 for M = 10, g/Delta = 0.125");
    RunConfig c;
    c.ratio = 0.125;
    c.m_levels = 10;
    c.t_max = 5.0;
    c.samples_per_period = 400;
    c.methods = {Method::Truncated, Method::Ideal};
    c.output = (dir / "fig4.csv").string();
    c.serial = serial;
    c.command = "figures";
    const RunResult r = run_and_list(c);
    const CsvTable& tr = table_for(r, Method::Truncated);
    const IdealModelParams p = c.params();
    const auto& re = tr.column("re_S");
    const auto& im = tr.column("im_S");
    const int spp = c.samples_per_period;
    for (int period = 0; period < 5; ++period) {
        cplx mean = 0.0;
        for (int i = period * spp; i < (period + 1) * spp; ++i) mean += cplx(re[i], im[i]);
        mean /= static_cast<double>(spp);
        const cplx expected = s_closed_form(p, (period + 0.5) * p.heisenberg_time).value;
        std::printf("  period %d  <S> = %+.5f %+.5fi   closed form %+.5f %+.5fi\n", period, mean.real(), mean.imag(),
                    expected.real(), expected.imag());
    }
}

void figure5(const fs::path& dir) {
    std::puts("figure 5: |psi0|^2 convergence in M, g/Delta = 0.5, one period");
    const IdealModelParams p = IdealModelParams::from_ratio(0.5);
    const auto grid = uniform_grid(p.heisenberg_time, 1.0, 400);
    CsvTable table;
    std::vector<double> reduced, ideal;
    for (double t : grid) {
        reduced.push_back(t / p.heisenberg_time);
        ideal.push_back(std::norm(psi0_closed_form(p, t)));
    }
    table.add_column("t", grid);
    table.add_column("t_over_T", reduced);
    table.add_column("abs2_psi0_ideal", ideal);
    for (int m : {5, 10, 20, 40}) {
        const PsiTrajectory traj = evolve_truncated(build_truncated(p, m), grid);
        std::vector<double> v;
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            v.push_back(std::norm(traj.psi_n(i, 0)));
            err = std::max(err, std::abs(v.back() - ideal[i]));
        }
        table.add_column("abs2_psi0_M" + std::to_string(m), std::move(v));
        std::printf("  M = %-3d max | |psi0|^2 - closed form | = %.5f\n", m, err);
    }
    table.metadata = {{"cuspsim", "figures"}, {"g_over_delta", format_double(0.5)},
                      {"g", format_double(p.g)}, {"delta", format_double(p.delta)},
                      {"heisenberg_time", format_double(p.heisenberg_time)}, {"theta", format_double(p.theta)},
                      {"omega", format_double(p.omega)}, {"q_init", format_double(p.q_init)}};
    const std::string path = (dir / "fig5.csv").string();
    write_csv(path, table);
    std::printf("  -> %s\n", path.c_str());
}

void figure6(const fs::path& dir, bool serial) {
    std::puts("figure 6: exact against closed form, 5 periods");
    for (const Scenario& s : kFig1) {
        std::printf("(%d, %lld, %g)\n", s.n, s.k, s.u);
        const RunConfig cfg = lattice_run(s, 5.0, 200, dir / ("fig6" + std::string(s.name) + ".csv"), serial);
        const RunResult r = run_and_list(cfg);
        const double period = cfg.params().heisenberg_time;
        for (const char* col : {"P_i", "P_r"}) {
            print_comparison(std::string("  ") + col,
                             compare_series(table_for(r, Method::Exact).series(col),
                                            table_for(r, Method::Ideal).series(col), period),
                             false);
        }
        // weight the finite ring carries beyond the truncated windows
        const LatticeConfig lat = cfg.lattice();
        const auto states = evolve_spectral(build_hamiltonian(lat), StateVector::bloch(lat.k_init(), lat.n_sites()),
                                            uniform_grid(period, 5.0, 20));
        std::printf("  max leakage past |n| <= M:");
        for (int m : {5, 10, 20, 40}) {
            if (m > max_window_levels(lat)) break;
            double worst = 0.0;
            for (const auto& st : states) worst = std::max(worst, window_leakage(st, lat, m));
            std::printf("  M=%d %.2e", m, worst);
        }
        std::printf("\n");
    }
}

void figure7(const fs::path& dir, bool serial) {
    std::puts("figure 7: P_1 and P_R for (201, 50, 12), 6 periods");
    const RunConfig cfg = lattice_run(kFig1[2], 6.0, 200, dir / "fig7.csv", serial);
    const RunResult r = run_and_list(cfg);
    const IdealModelParams p = cfg.params();
    const CsvTable& ex = table_for(r, Method::Exact);
    const CsvTable& id = table_for(r, Method::Ideal);
    for (const char* col : {"P_1", "P_R"}) {
        print_comparison(std::string("  ") + col, compare_series(ex.series(col), id.series(col)), false);
    }
    const CuspReport rep = detect_cusps(ex.series("P_R"), p);
    print_cusps("  exact P_R", rep, p);
}

int cmd_figures(const std::string& which, const std::string& outdir, bool serial) {
    const fs::path dir(outdir);
    fs::create_directories(dir);
    const bool all = which == "all";
    bool any = false;
    auto want = [&](const char* id) {
        const bool yes = all || which == id;
        any = any || yes;
        return yes;
    };
    if (want("1")) figure1(dir, serial);
    if (want("2")) figure2(dir, serial);
    if (want("4")) figure4(dir, serial);
    if (want("5")) figure5(dir);
    if (want("6")) figure6(dir, serial);
    if (want("7")) figure7(dir, serial);
    if (!any) throw ConfigError("--which must be one of 1, 2, 4, 5, 6, 7, all");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic cusps after a defect quench on a tight-binding ring"};
    app.require_subcommand(1);

    RunFlags quench_flags, truncated_flags, ideal_flags;
    auto* quench = app.add_subcommand("quench", "run any subset of exact, truncated, ideal on one scenario");
    add_run_flags(quench, quench_flags, true, true);
    auto* truncated = app.add_subcommand("truncated", "finite-M truncated model only");
    add_run_flags(truncated, truncated_flags, false, true);
    auto* ideal = app.add_subcommand("ideal", "closed-form ideal model only");
    add_run_flags(ideal, ideal_flags, false, true);

    std::string a_path, b_path;
    std::vector<std::string> compare_cols;
    bool per_period = false;
    auto* compare = app.add_subcommand("compare", "max and rms difference of two series files");
    compare->add_option("--a", a_path, "first CSV")->required();
    compare->add_option("--b", b_path, "second CSV")->required();
    compare->add_option("--col", compare_cols, "columns to compare (default: all shared)");
    compare->add_flag("--per-period", per_period, "break errors down by period");

    std::string cusp_in, cusp_col = "P_i", cusp_out;
    CuspDetectorOptions cusp_opts;
    auto* cusps = app.add_subcommand("cusps", "detect cusps in one column of a series file");
    cusps->add_option("--in", cusp_in, "input CSV (needs the derived-parameter metadata)")->required();
    cusps->add_option("--col", cusp_col, "column to scan")->capture_default_str();
    cusps->add_option("--kappa", cusp_opts.kappa, "threshold in units of the median")->capture_default_str();
    cusps->add_option("--sign", cusp_opts.envelope_sign, "envelope: 1 for P_i-like, -1 for P_r-like")
        ->check(CLI::IsMember({1, -1}))
        ->capture_default_str();
    cusps->add_option("--stride", cusp_opts.stride, "second-difference lag in samples (0 = auto)");
    cusps->add_flag("--refine", cusp_opts.refine, "refine hits by line intersection");
    cusps->add_option("--out", cusp_out, "write the cusp table to this CSV");

    double alpha = std::numbers::pi / 2;
    long n_max = 1000000;
    auto* identity = app.add_subcommand("identity-check", "partial sums of sum_n sin^2(n a)/(n a)^2 against pi/a");
    identity->add_option("--alpha", alpha, "0 < alpha < pi")->capture_default_str();
    identity->add_option("--nmax", n_max, "cutoff |n| <= nmax")->capture_default_str();

    std::string which = "all", outdir = "figures";
    bool fig_serial = false;
    auto* figures = app.add_subcommand("figures", "rebuild the data behind each figure recipe");
    figures->add_option("--which", which, "1, 2, 4, 5, 6, 7 or all")->capture_default_str();
    figures->add_option("--outdir", outdir, "output directory")->capture_default_str();
    figures->add_flag("--serial", fig_serial, "single-threaded");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*quench) return cmd_run(quench_flags, "quench", std::nullopt);
        if (*truncated) return cmd_run(truncated_flags, "truncated", Method::Truncated);
        if (*ideal) return cmd_run(ideal_flags, "ideal", Method::Ideal);
        if (*compare) return cmd_compare(a_path, b_path, compare_cols, per_period);
        if (*cusps) return cmd_cusps(cusp_in, cusp_col, cusp_opts, cusp_out);
        if (*identity) return cmd_identity(alpha, n_max);
        if (*figures) return cmd_figures(which, outdir, fig_serial);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

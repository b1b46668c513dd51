#include "cuspsim/runner.hpp"
#include "cuspsim/errors.hpp"
#include "cuspsim/exact.hpp"
#include "cuspsim/ideal.hpp"
#include "cuspsim/truncated.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

namespace cuspsim {

using json = nlohmann::json;

std::string method_name(Method m) {
    switch (m) {
    case Method::Exact: return "exact";
    case Method::Truncated: return "truncated";
    case Method::Ideal: return "ideal";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "exact") return Method::Exact;
    if (name == "truncated") return Method::Truncated;
    if (name == "ideal") return Method::Ideal;
    throw ConfigError("unknown method '" + name + "' (expected exact, truncated, ideal)");
}

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const Method m = parse_method(item);
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    return out;
}

void RunConfig::validate() const {
    if (methods.empty()) throw ConfigError("at least one method must be selected");
    if (ratio) {
        if (!std::isfinite(*ratio)) throw ConfigError("ratio must be finite");
        if (std::find(methods.begin(), methods.end(), Method::Exact) != methods.end()) {
            throw ConfigError("the exact method needs a lattice scenario, not a bare g/Delta ratio");
        }
    } else {
        (void)lattice();
    }
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be positive");
    if (samples_per_period < 1) throw ConfigError("samples_per_period must be >= 1");
    if (detect_cusps && samples_per_period < 40) {
        throw ConfigError("cusp detection needs samples_per_period >= 40");
    }
    if (n_offsets < 0) throw ConfigError("n_offsets must be >= 0");
    if (m_levels && *m_levels < 1) throw ConfigError("m_levels must be >= 1");
    if (std::find(methods.begin(), methods.end(), Method::Truncated) != methods.end() &&
        n_offsets > resolved_m_levels()) {
        throw ConfigError("n_offsets exceeds the truncation M");
    }
    if (output.empty()) throw ConfigError("output path must not be empty");
}

LatticeConfig RunConfig::lattice() const {
    if (ratio) throw ConfigError("run is in ratio mode; no lattice scenario");
    return {n_sites, k_init, defect_strength, defect_site};
}

IdealModelParams RunConfig::params() const {
    return ratio ? IdealModelParams::from_ratio(*ratio) : derive_params(lattice());
}

int RunConfig::resolved_m_levels() const {
    if (m_levels) return *m_levels;
    if (ratio) return 40;
    return std::max(1, std::min(40, max_window_levels(lattice())));
}

std::vector<double> RunConfig::time_grid() const {
    const double period = params().heisenberg_time;
    if (time_unit == TimeUnit::Periods) return uniform_grid(period, t_max, samples_per_period);
    const double dt = period / samples_per_period;
    const auto count = static_cast<long>(std::floor(t_max / dt + 1e-9));
    std::vector<double> t(count + 1);
    for (long i = 0; i <= count; ++i) t[i] = static_cast<double>(i) * dt;
    return t;
}

std::string RunConfig::to_json() const {
    json j;
    if (ratio) {
        j["ratio"] = *ratio;
    } else {
        j["n_sites"] = n_sites;
        j["k_init"] = k_init;
        j["defect_strength"] = defect_strength;
        j["defect_site"] = defect_site;
    }
    j["t_max"] = t_max;
    j["time_unit"] = time_unit == TimeUnit::Periods ? "periods" : "absolute";
    j["samples_per_period"] = samples_per_period;
    std::vector<std::string> names;
    for (Method m : methods) names.push_back(method_name(m));
    j["methods"] = names;
    if (m_levels) j["m_levels"] = *m_levels;
    j["n_offsets"] = n_offsets;
    j["output"] = output;
    j["detect_cusps"] = detect_cusps;
    j["serial"] = serial;
    return j.dump();
}

RunConfig run_config_from_json(const std::string& text, RunConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config JSON must be an object");
    static const std::set<std::string> known = {
        "n_sites", "k_init",  "defect_strength", "defect_site", "ratio",   "t_max",  "time_unit",
        "samples_per_period", "methods", "m_levels", "n_offsets", "output", "detect_cusps", "serial"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ConfigError("config JSON: unknown key '" + key + "'");
    }
    try {
        RunConfig c = std::move(base);
        if (j.contains("n_sites")) c.n_sites = j["n_sites"].get<int>();
        if (j.contains("k_init")) c.k_init = j["k_init"].get<long long>();
        if (j.contains("defect_strength")) c.defect_strength = j["defect_strength"].get<double>();
        if (j.contains("defect_site")) c.defect_site = j["defect_site"].get<int>();
        if (j.contains("ratio")) {
            if (j["ratio"].is_null()) c.ratio.reset();
            else c.ratio = j["ratio"].get<double>();
        }
        if (j.contains("t_max")) c.t_max = j["t_max"].get<double>();
        if (j.contains("time_unit")) {
            const auto u = j["time_unit"].get<std::string>();
            if (u == "periods") c.time_unit = TimeUnit::Periods;
            else if (u == "absolute") c.time_unit = TimeUnit::Absolute;
            else throw ConfigError("time_unit must be 'periods' or 'absolute'");
        }
        if (j.contains("samples_per_period")) c.samples_per_period = j["samples_per_period"].get<int>();
        if (j.contains("methods")) {
            const auto& m = j["methods"];
            if (m.is_string()) {
                c.methods = parse_methods(m.get<std::string>());
            } else {
                c.methods.clear();
                for (const auto& item : m) c.methods.push_back(parse_method(item.get<std::string>()));
            }
        }
        if (j.contains("m_levels")) {
            if (j["m_levels"].is_null()) c.m_levels.reset();
            else c.m_levels = j["m_levels"].get<int>();
        }
        if (j.contains("n_offsets")) c.n_offsets = j["n_offsets"].get<int>();
        if (j.contains("output")) c.output = j["output"].get<std::string>();
        if (j.contains("detect_cusps")) c.detect_cusps = j["detect_cusps"].get<bool>();
        if (j.contains("serial")) c.serial = j["serial"].get<bool>();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config JSON: ") + e.what());
    }
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_config_from_json(buf.str(), std::move(base));
}

namespace {

void add_metadata(CsvTable& table, const RunConfig& cfg, Method method, const IdealModelParams& p) {
    auto& m = table.metadata;
    m.emplace_back("cuspsim", cfg.command);
    m.emplace_back("method", method_name(method));
    if (cfg.ratio) {
        m.emplace_back("g_over_delta", format_double(*cfg.ratio));
    } else {
        const LatticeConfig lat = cfg.lattice();
        m.emplace_back("n_sites", std::to_string(lat.n_sites()));
        m.emplace_back("k_init", std::to_string(lat.k_init()));
        m.emplace_back("defect_strength", format_double(lat.defect_strength()));
        m.emplace_back("defect_site", std::to_string(lat.defect_site()));
    }
    m.emplace_back("g", format_double(p.g));
    m.emplace_back("delta", format_double(p.delta));
    m.emplace_back("heisenberg_time", format_double(p.heisenberg_time));
    m.emplace_back("theta", format_double(p.theta));
    m.emplace_back("omega", format_double(p.omega));
    m.emplace_back("q_init", format_double(p.q_init));
    m.emplace_back("samples_per_period", std::to_string(cfg.samples_per_period));
    if (method == Method::Truncated) m.emplace_back("m_levels", std::to_string(cfg.resolved_m_levels()));
    m.emplace_back("config", cfg.to_json());
}

void add_time_columns(CsvTable& table, const std::vector<double>& times, double period) {
    std::vector<double> reduced(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) reduced[i] = times[i] / period;
    table.add_column("t", times);
    table.add_column("t_over_T", std::move(reduced));
}

void add_psi0_columns(CsvTable& table, const std::vector<cplx>& psi0) {
    std::vector<double> re, im, abs2;
    for (const cplx& z : psi0) {
        re.push_back(z.real());
        im.push_back(z.imag());
        abs2.push_back(std::norm(z));
    }
    table.add_column("re_psi0", std::move(re));
    table.add_column("im_psi0", std::move(im));
    table.add_column("abs2_psi0", std::move(abs2));
}

void add_s_columns(CsvTable& table, const std::vector<cplx>& s) {
    std::vector<double> re, im;
    for (const cplx& z : s) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    table.add_column("re_S", std::move(re));
    table.add_column("im_S", std::move(im));
}

CsvTable exact_table(const RunConfig& cfg, const std::vector<double>& times) {
    const ExactObservables obs = run_exact(cfg.lattice(), times, cfg.n_offsets, {.parallel = !cfg.serial});
    CsvTable table;
    add_time_columns(table, times, cfg.params().heisenberg_time);
    table.add_column("P_i", obs.p_init);
    table.add_column("P_r", obs.p_reflect);
    table.add_column("P_R", obs.p_right);
    for (int d = 0; d < cfg.n_offsets; ++d) table.add_column("P_" + std::to_string(d + 1), obs.p_offset[d]);
    add_psi0_columns(table, obs.psi0);
    return table;
}

CsvTable truncated_table(const RunConfig& cfg, const std::vector<double>& times) {
    const IdealModelParams p = cfg.params();
    const int m = cfg.resolved_m_levels();
    const PsiTrajectory traj = evolve_truncated(build_truncated(p, m), times);
    std::vector<double> pi, pr, pright;
    std::vector<std::vector<double>> offsets(cfg.n_offsets);
    std::vector<cplx> psi0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const cplx z = traj.psi_n(i, 0);
        psi0.push_back(z);
        pi.push_back(0.25 * std::norm(1.0 + z));
        pr.push_back(0.25 * std::norm(1.0 - z));
        double rest = 0.0;
        for (int n = -m; n <= m; ++n) {
            if (n != 0) rest += std::norm(traj.psi_n(i, n));
        }
        pright.push_back(0.25 * (std::norm(1.0 + z) + rest));
        for (int d = 0; d < cfg.n_offsets; ++d) offsets[d].push_back(0.25 * std::norm(traj.psi_n(i, d + 1)));
    }
    CsvTable table;
    add_time_columns(table, times, p.heisenberg_time);
    table.add_column("P_i", std::move(pi));
    table.add_column("P_r", std::move(pr));
    table.add_column("P_R", std::move(pright));
    for (int d = 0; d < cfg.n_offsets; ++d) table.add_column("P_" + std::to_string(d + 1), std::move(offsets[d]));
    add_psi0_columns(table, psi0);
    add_s_columns(table, traj.s_values);
    return table;
}

CsvTable ideal_table(const RunConfig& cfg, const std::vector<double>& times) {
    const IdealModelParams p = cfg.params();
    std::vector<double> pi, pr, pright;
    std::vector<std::vector<double>> offsets(cfg.n_offsets);
    std::vector<cplx> psi0, s;
    for (double t : times) {
        const cplx z = psi0_closed_form(p, t);
        psi0.push_back(z);
        s.push_back(s_closed_form(p, t).value);
        pi.push_back(0.25 * std::norm(1.0 + z));
        pr.push_back(0.25 * std::norm(1.0 - z));
        pright.push_back(right_mover_closed_form(p, t));
        for (int d = 0; d < cfg.n_offsets; ++d) offsets[d].push_back(offset_population_closed_form(p, d + 1, t));
    }
    CsvTable table;
    add_time_columns(table, times, p.heisenberg_time);
    table.add_column("P_i", std::move(pi));
    table.add_column("P_r", std::move(pr));
    table.add_column("P_R", std::move(pright));
    for (int d = 0; d < cfg.n_offsets; ++d) table.add_column("P_" + std::to_string(d + 1), std::move(offsets[d]));
    add_psi0_columns(table, psi0);
    add_s_columns(table, s);
    return table;
}

} // namespace

CsvTable compute_method(const RunConfig& cfg, Method method) {
    cfg.validate();
    const std::vector<double> times = cfg.time_grid();
    CsvTable table;
    switch (method) {
    case Method::Exact: table = exact_table(cfg, times); break;
    case Method::Truncated: table = truncated_table(cfg, times); break;
    case Method::Ideal: table = ideal_table(cfg, times); break;
    }
    add_metadata(table, cfg, method, cfg.params());
    return table;
}

std::string output_path(const RunConfig& cfg, Method method) {
    if (cfg.methods.size() == 1) return cfg.output;
    const std::filesystem::path p(cfg.output);
    std::filesystem::path out = p.parent_path() / (p.stem().string() + "_" + method_name(method));
    out += p.has_extension() ? p.extension().string() : std::string(".csv");
    return out.string();
}

RunResult run(const RunConfig& cfg, bool write_files) {
    cfg.validate();
    RunResult result;
    std::vector<CsvTable> tables(cfg.methods.size());
    if (cfg.serial || cfg.methods.size() == 1) {
        for (std::size_t i = 0; i < cfg.methods.size(); ++i) tables[i] = compute_method(cfg, cfg.methods[i]);
    } else {
        std::vector<std::future<CsvTable>> jobs;
        for (Method m : cfg.methods) jobs.push_back(std::async(std::launch::async, compute_method, std::cref(cfg), m));
        for (std::size_t i = 0; i < jobs.size(); ++i) tables[i] = jobs[i].get();
    }
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
        const Method m = cfg.methods[i];
        if (write_files) {
            const std::string path = output_path(cfg, m);
            write_csv(path, tables[i]);
            result.files.emplace_back(m, path);
        }
        result.tables.emplace_back(m, std::move(tables[i]));
    }
    return result;
}

} // namespace cuspsim

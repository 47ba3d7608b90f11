// fcs — batch CLI: cumulants, theta curves, jump-trajectory estimates, Kerr
// branches, and parameter sweeps, driven by a JSON config and emitting CSV.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fcs/cumulants.hpp"
#include "fcs/gaussian.hpp"
#include "fcs/ldf.hpp"
#include "fcs/models.hpp"
#include "fcs/trajectories.hpp"

namespace {

using json = nlohmann::json;
using namespace fcs;

constexpr const char* kVersion = "fcs 0.1.0";

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ----------------------------- config access --------------------------------

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
}

double need_num(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number())
        throw config_error("config: missing numeric field '" + key + "'");
    return j[key].get<double>();
}

double opt_num(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw config_error("config: field '" + key + "' must be a number");
    return j[key].get<double>();
}

// ----------------------------- model registry -------------------------------

const std::map<std::string, std::vector<std::string>>& model_param_names() {
    static const std::map<std::string, std::vector<std::string>> names = {
        {"two_spins_same", {"h", "gamma"}},
        {"two_spins_inverse", {"h", "gamma"}},
        {"two_spins_global", {"gamma"}},
        {"squeezed_pair", {"omega", "g", "gamma1", "gamma2", "cutoff"}},
        {"kerr", {"delta", "gamma", "g", "intensity"}},
    };
    return names;
}

struct ModelSpec {
    std::string id;
    std::map<std::string, double> params;

    bool has(const std::string& key) const { return params.count(key) > 0; }
    double at(const std::string& key) const {
        auto it = params.find(key);
        if (it == params.end()) throw config_error("model '" + id + "' needs parameter '" + key + "'");
        return it->second;
    }
};

ModelSpec parse_model(const json& j) {
    if (!j.contains("model") || !j["model"].is_object())
        throw config_error("config: missing 'model' object");
    const json& jm = j["model"];
    ModelSpec spec;
    if (!jm.contains("id") || !jm["id"].is_string())
        throw config_error("config: model.id must be a string");
    spec.id = jm["id"].get<std::string>();
    auto reg = model_param_names().find(spec.id);
    if (reg == model_param_names().end())
        throw config_error("config: unknown model id '" + spec.id + "'");
    for (auto it = jm.begin(); it != jm.end(); ++it) {
        if (it.key() == "id") continue;
        if (std::find(reg->second.begin(), reg->second.end(), it.key()) == reg->second.end())
            throw config_error("config: model '" + spec.id + "' has no parameter '" + it.key() + "'");
        if (!it.value().is_number())
            throw config_error("config: model parameter '" + it.key() + "' must be numeric");
        spec.params[it.key()] = it.value().get<double>();
    }
    return spec;
}

// Lindblad representation (squeezed_pair requires a Fock cutoff for it).
LindbladModel build_lindblad(const ModelSpec& spec) {
    if (spec.id == "two_spins_same") return two_spins_same(spec.at("h"), spec.at("gamma"));
    if (spec.id == "two_spins_inverse") return two_spins_inverse(spec.at("h"), spec.at("gamma"));
    if (spec.id == "two_spins_global") return two_spins_global(spec.at("gamma"));
    if (spec.id == "squeezed_pair") {
        if (!spec.has("cutoff"))
            throw config_error("squeezed_pair: Lindblad tasks need an explicit 'cutoff'");
        return squeezed_pair(spec.at("omega"), spec.at("g"), spec.at("gamma1"),
                             spec.at("gamma2"), static_cast<int>(spec.at("cutoff")));
    }
    throw config_error("model '" + spec.id + "' has no Lindblad representation");
}

bool is_gaussian_spec(const ModelSpec& spec) {
    return spec.id == "squeezed_pair" && !spec.has("cutoff");
}

// ----------------------------- CSV writing ----------------------------------

struct CsvWriter {
    std::ofstream out;

    CsvWriter(const std::string& path, const ModelSpec& spec, std::uint64_t seed) {
        out.open(path, std::ios::binary);  // fixed newlines keep reruns byte-identical
        if (!out) throw config_error("cannot open output file: " + path);
        out << "# version = " << kVersion << "\n";
        out << "# model = " << spec.id << "\n";
        for (const auto& [key, value] : spec.params)
            out << "# param " << key << " = " << fmt(value) << "\n";
        out << "# seed = " << seed << "\n";
    }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            out << (i ? "," : "") << cols[i];
        out << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out << (i ? "," : "") << cells[i];
        out << "\n";
    }
};

// ----------------------------- cumulant rows ---------------------------------

struct CumulantRow {
    int fixed_point;
    std::vector<double> kappas;
    double fano_paper;
    double fano_standard;
    bool transition;
};

std::vector<double> fano_pair(const std::vector<double>& kappas) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (kappas.size() < 2 || kappas[0] <= 1e-12) return {nan, nan};
    return {(kappas[1] + kappas[0] * kappas[0]) / kappas[0], kappas[1] / kappas[0]};
}

std::vector<CumulantRow> cumulant_rows(const ModelSpec& spec, int channel, int order,
                                       const PerFixedPointOptions& opts = {}) {
    std::vector<CumulantRow> rows;
    if (is_gaussian_spec(spec)) {
        const GaussianModel model = squeezed_pair_gaussian(spec.at("omega"), spec.at("g"),
                                                           spec.at("gamma1"), spec.at("gamma2"));
        const SigmaHierarchy h = sigma_hierarchy(model, channel, order - 1);
        CumulantRow row;
        row.fixed_point = 0;
        for (int k = 1; k <= order; ++k)
            row.kappas.push_back(gaussian_cumulant(model, channel, k, h));
        const auto f = fano_pair(row.kappas);
        row.fano_paper = f[0];
        row.fano_standard = f[1];
        row.transition = false;
        rows.push_back(std::move(row));
        return rows;
    }
    const LindbladModel model = build_lindblad(spec);
    const MultistableCumulants mc = cumulants_per_fixed_point(model, channel, order, opts);
    for (const CumulantResult& res : mc.per_fixed_point) {
        CumulantRow row;
        row.fixed_point = res.fixed_point_index;
        row.kappas = res.values;
        const auto f = fano_pair(row.kappas);
        row.fano_paper = f[0];
        row.fano_standard = f[1];
        row.transition = mc.first_order_transition;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> cumulant_columns(int order) {
    std::vector<std::string> cols;
    for (int k = 1; k <= order; ++k) cols.push_back("kappa_" + std::to_string(k));
    cols.push_back("fano_paper");
    cols.push_back("fano_standard");
    cols.push_back("phase_transition");
    cols.push_back("fixed_point");
    return cols;
}

std::vector<std::string> cumulant_cells(const CumulantRow& row) {
    std::vector<std::string> cells;
    for (double k : row.kappas) cells.push_back(fmt(k));
    cells.push_back(fmt(row.fano_paper));
    cells.push_back(fmt(row.fano_standard));
    cells.push_back(row.transition ? "1" : "0");
    cells.push_back(std::to_string(row.fixed_point));
    return cells;
}

// ----------------------------- tasks ----------------------------------------

struct RunSettings {
    std::string out_path;
    std::uint64_t seed;
    int jobs;
    int order;
    int channel;
    // Overridable defaults from the config's "tolerances" object.
    int theta_dim_cap = ThetaOptions{}.dim_cap;
    double null_tol = SteadyStateOptions{}.null_tol;
    double residual_tol = HierarchySolveOptions{}.residual_tol;

    PerFixedPointOptions fixed_point_options() const {
        PerFixedPointOptions o;
        o.steady.null_tol = null_tol;
        o.solve.residual_tol = residual_tol;
        return o;
    }
    ThetaOptions theta_options() const {
        ThetaOptions o;
        o.dim_cap = theta_dim_cap;
        return o;
    }
};

int task_cumulants(const json& cfg, const RunSettings& rs) {
    const ModelSpec spec = parse_model(cfg);
    CsvWriter csv(rs.out_path, spec, rs.seed);
    csv.header(cumulant_columns(rs.order));
    for (const CumulantRow& row :
         cumulant_rows(spec, rs.channel, rs.order, rs.fixed_point_options()))
        csv.row(cumulant_cells(row));
    return 0;
}

std::vector<double> grid_from(const json& j, const char* name) {
    if (!j.is_object()) throw config_error(std::string("config: '") + name + "' must be an object");
    const double lo = need_num(j, "min");
    const double hi = need_num(j, "max");
    const int steps = static_cast<int>(need_num(j, "steps"));
    if (steps < 2) throw config_error(std::string("config: '") + name + "' needs steps >= 2");
    std::vector<double> grid(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
    return grid;
}

int task_theta(const json& cfg, const RunSettings& rs) {
    const ModelSpec spec = parse_model(cfg);
    if (!cfg.contains("s_grid")) throw config_error("theta: config needs 's_grid'");
    const std::vector<double> s_values = grid_from(cfg["s_grid"], "s_grid");

    CsvWriter csv(rs.out_path, spec, rs.seed);
    const bool analytic = spec.id == "two_spins_global";
    if (is_gaussian_spec(spec)) {
        const GaussianModel model = squeezed_pair_gaussian(spec.at("omega"), spec.at("g"),
                                                           spec.at("gamma1"), spec.at("gamma2"));
        csv.header({"s", "theta"});
        for (double s : s_values)
            csv.row({fmt(s), fmt(riccati_theta(model, rs.channel, s))});
        return 0;
    }
    const LindbladModel model = build_lindblad(spec);
    csv.header(analytic ? std::vector<std::string>{"s", "theta", "theta_analytic"}
                        : std::vector<std::string>{"s", "theta"});
    std::vector<double> theta(s_values.size());
    std::atomic<std::size_t> next{0};
    int jobs = rs.jobs > 0 ? rs.jobs : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(s_values.size())));
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < s_values.size(); i = next.fetch_add(1)) {
                if (failed.load()) return;
                try {
                    theta[i] = theta_spectral(model, rs.channel, s_values[i], rs.theta_options());
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!failed.exchange(true)) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    for (std::size_t i = 0; i < s_values.size(); ++i) {
        if (analytic) {
            csv.row({fmt(s_values[i]), fmt(theta[i]),
                     fmt(theta_global_spins(spec.at("gamma"), s_values[i]))});
        } else {
            csv.row({fmt(s_values[i]), fmt(theta[i])});
        }
    }
    return 0;
}

int task_traj(const json& cfg, const RunSettings& rs) {
    const ModelSpec spec = parse_model(cfg);
    const LindbladModel model = build_lindblad(spec);
    if (!cfg.contains("trajectories"))
        throw config_error("traj: config needs a 'trajectories' object");
    const json& jt = cfg["trajectories"];
    const int n_traj = static_cast<int>(need_num(jt, "n"));
    const double t_final = need_num(jt, "t_final");
    const double dt = opt_num(jt, "dt", 0.01);

    TrajectoryBatch batch;
    if (jt.contains("basis_index")) {
        const int idx = static_cast<int>(need_num(jt, "basis_index"));
        if (idx < 0 || idx >= model.dim()) throw config_error("traj: basis_index out of range");
        Vector psi = Vector::Zero(model.dim());
        psi(idx) = 1.0;
        batch = run_trajectories(model, rs.channel, psi, t_final, dt, rs.seed, n_traj, rs.jobs);
    } else {
        const DensityMatrix rho = steady_states(build_liouvillian(model)).front();
        batch = run_trajectories(model, rs.channel, rho, t_final, dt, rs.seed, n_traj, rs.jobs);
    }
    const EmpiricalCumulants emp = empirical_cumulants(batch);

    CsvWriter csv(rs.out_path, spec, rs.seed);
    csv.header({"kappa1_hat", "kappa2_hat", "se1", "se2", "n_traj", "t_final"});
    csv.row({fmt(emp.kappa1_hat), fmt(emp.kappa2_hat), fmt(emp.se1), fmt(emp.se2),
             std::to_string(n_traj), fmt(t_final)});
    return 0;
}

int task_kerr(const json& cfg, const RunSettings& rs) {
    const ModelSpec spec = parse_model(cfg);
    if (spec.id != "kerr") throw config_error("kerr: model id must be 'kerr'");
    std::vector<double> intensities;
    if (cfg.contains("intensity_grid")) {
        intensities = grid_from(cfg["intensity_grid"], "intensity_grid");
    } else {
        intensities = {spec.at("intensity")};
    }

    CsvWriter csv(rs.out_path, spec, rs.seed);
    csv.header({"intensity", "n_minus", "n_plus", "n_roots", "root_1", "root_2", "root_3",
                "stable_1", "stable_2", "stable_3", "kappa1_count", "kappa1_low", "kappa1_high"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double intensity : intensities) {
        KerrParams p{spec.at("delta"), spec.at("gamma"), spec.at("g"), intensity};
        const KerrBranches br = kerr_branches(p);
        const std::vector<double> k1 = kerr_kappa1(p);
        std::vector<std::string> cells{fmt(intensity), fmt(br.n_minus), fmt(br.n_plus),
                                       std::to_string(br.roots.size())};
        for (std::size_t k = 0; k < 3; ++k)
            cells.push_back(k < br.roots.size() ? fmt(br.roots[k]) : fmt(nan));
        for (std::size_t k = 0; k < 3; ++k)
            cells.push_back(k < br.stable.size() ? (br.stable[k] ? "1" : "0") : "0");
        cells.push_back(std::to_string(k1.size()));
        cells.push_back(k1.empty() ? fmt(nan) : fmt(k1.front()));
        cells.push_back(k1.empty() ? fmt(nan) : fmt(k1.back()));
        csv.row(cells);
    }
    return 0;
}

struct SweepAxis {
    std::string param;
    std::vector<double> grid;
};

int task_sweep(const json& cfg, const RunSettings& rs) {
    ModelSpec spec = parse_model(cfg);
    if (!cfg.contains("sweep") || !cfg["sweep"].is_array() || cfg["sweep"].empty())
        throw config_error("sweep: config needs a non-empty 'sweep' array");
    std::vector<SweepAxis> axes;
    const auto& allowed = model_param_names().at(spec.id);
    for (const json& ja : cfg["sweep"]) {
        SweepAxis axis;
        if (!ja.contains("param") || !ja["param"].is_string())
            throw config_error("sweep: each axis needs a 'param' name");
        axis.param = ja["param"].get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), axis.param) == allowed.end())
            throw config_error("sweep: model '" + spec.id + "' has no parameter '" + axis.param + "'");
        axis.grid = grid_from(ja, "sweep axis");
        axes.push_back(std::move(axis));
    }

    std::size_t n_cells = 1;
    for (const SweepAxis& axis : axes) n_cells *= axis.grid.size();

    // Cell index -> coordinates, row-major with the first axis slowest.
    auto coords_of = [&](std::size_t cell) {
        std::vector<double> coords(axes.size());
        std::size_t rem = cell;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const std::size_t n = axes[a].grid.size();
            coords[a] = axes[a].grid[rem % n];
            rem /= n;
        }
        return coords;
    };

    std::vector<std::vector<CumulantRow>> results(n_cells);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    int jobs = rs.jobs > 0 ? rs.jobs : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n_cells)));
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&]() {
            for (std::size_t cell = next.fetch_add(1); cell < n_cells; cell = next.fetch_add(1)) {
                if (failed.load()) return;
                try {
                    ModelSpec local = spec;
                    const std::vector<double> coords = coords_of(cell);
                    for (std::size_t a = 0; a < axes.size(); ++a)
                        local.params[axes[a].param] = coords[a];
                    results[cell] = cumulant_rows(local, rs.channel, rs.order,
                                                  rs.fixed_point_options());
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!failed.exchange(true)) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);

    CsvWriter csv(rs.out_path, spec, rs.seed);
    std::vector<std::string> cols;
    for (const SweepAxis& axis : axes) cols.push_back(axis.param);
    for (const std::string& c : cumulant_columns(rs.order)) cols.push_back(c);
    csv.header(cols);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const std::vector<double> coords = coords_of(cell);
        for (const CumulantRow& row : results[cell]) {
            std::vector<std::string> cells;
            for (double c : coords) cells.push_back(fmt(c));
            for (const std::string& c : cumulant_cells(row)) cells.push_back(c);
            csv.row(cells);
        }
    }
    return 0;
}

int dispatch(const std::string& task, const std::string& config_path,
             const std::optional<std::string>& out_flag,
             const std::optional<std::uint64_t>& seed_flag, const std::optional<int>& jobs_flag,
             const std::optional<int>& order_flag) {
    const json cfg = load_config(config_path);

    RunSettings rs;
    rs.out_path = out_flag ? *out_flag
                           : (cfg.contains("output") ? cfg["output"].get<std::string>() : "out.csv");
    rs.seed = seed_flag ? *seed_flag : static_cast<std::uint64_t>(opt_num(cfg, "seed", 1));
    int jobs = jobs_flag ? *jobs_flag : static_cast<int>(opt_num(cfg, "jobs", 0));
    if (jobs <= 0) {
        if (const char* env = std::getenv("FCS_JOBS")) jobs = std::atoi(env);
    }
    rs.jobs = jobs;
    rs.order = order_flag ? *order_flag : static_cast<int>(opt_num(cfg, "order", 2));
    if (rs.order < 1) throw config_error("order must be >= 1");
    rs.channel = static_cast<int>(opt_num(cfg, "channel", 0));
    if (cfg.contains("tolerances")) {
        const json& jt = cfg["tolerances"];
        if (!jt.is_object()) throw config_error("config: 'tolerances' must be an object");
        rs.theta_dim_cap = static_cast<int>(opt_num(jt, "dim_cap", rs.theta_dim_cap));
        rs.null_tol = opt_num(jt, "null_tol", rs.null_tol);
        rs.residual_tol = opt_num(jt, "residual_tol", rs.residual_tol);
    }

    if (task == "cumulants") return task_cumulants(cfg, rs);
    if (task == "theta") return task_theta(cfg, rs);
    if (task == "traj") return task_traj(cfg, rs);
    if (task == "kerr") return task_kerr(cfg, rs);
    if (task == "sweep") return task_sweep(cfg, rs);
    throw config_error("unknown task: " + task);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counting statistics of excitation exchange for Markovian open quantum systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_flag;
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> jobs_flag;
    std::optional<int> order_flag;

    for (const char* name : {"cumulants", "theta", "traj", "kerr", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_flag, "output CSV path (overrides config)");
        sub->add_option("--seed", seed_flag, "RNG seed (overrides config)");
        sub->add_option("--jobs", jobs_flag, "worker threads (0 = hardware)");
        sub->add_option("--order", order_flag, "highest cumulant order");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return dispatch(app.get_subcommands().front()->get_name(), config_path, out_flag,
                        seed_flag, jobs_flag, order_flag);
    } catch (const fcs::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fcs::instability_error& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return 3;
    } catch (const fcs::solve_error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 4;
    } catch (const fcs::dimension_error& e) {
        std::cerr << "dimension cap: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

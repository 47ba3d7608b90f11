#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

TEST_SUITE_BEGIN("cli");

namespace {

namespace fs = std::filesystem;

struct Csv {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (std::size_t k = 0; k < columns.size(); ++k)
            if (columns[k] == name) return static_cast<int>(k);
        return -1;
    }
    double value(std::size_t row, const std::string& name) const {
        return std::stod(rows.at(row).at(static_cast<std::size_t>(col(name))));
    }
};

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "fcs_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FCS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int ret = std::system(cmd.c_str());
    return WEXITSTATUS(ret);
}

Csv parse_csv(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    Csv csv;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!have_header) {
            csv.columns = cells;
            have_header = true;
        } else {
            csv.rows.push_back(cells);
        }
    }
    return csv;
}

}  // namespace

TEST_CASE("cumulants task emits the Poisson-point row") {
    const fs::path cfg = work_dir() / "cum.json";
    const fs::path out = work_dir() / "cum.csv";
    write_file(cfg, R"({"model": {"id": "two_spins_same", "h": 0.0, "gamma": 2.0},
                       "channel": 0, "order": 2})");
    REQUIRE(run_cli("cumulants --config " + cfg.string() + " --out " + out.string()) == 0);
    const Csv csv = parse_csv(out);
    REQUIRE(csv.rows.size() == 1);
    CHECK(csv.value(0, "kappa_1") == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(csv.value(0, "fano_paper") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(csv.value(0, "fano_standard") == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(csv.rows[0][static_cast<std::size_t>(csv.col("phase_transition"))] == "0");
}

TEST_CASE("serialized floats round-trip exactly") {
    const fs::path cfg = work_dir() / "rt.json";
    const fs::path out = work_dir() / "rt.csv";
    write_file(cfg, R"({"model": {"id": "two_spins_inverse", "h": 0.7, "gamma": 1.3},
                       "order": 3})");
    REQUIRE(run_cli("cumulants --config " + cfg.string() + " --out " + out.string()) == 0);
    const Csv csv = parse_csv(out);
    for (const auto& row : csv.rows) {
        for (const std::string& cell : row) {
            // Reparse and reformat at 17 significant digits: bit-identical.
            const double x = std::stod(cell);
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            if (cell.find('.') != std::string::npos || cell.find('e') != std::string::npos ||
                cell.find("nan") != std::string::npos) {
                CHECK(std::stod(buf) == x);
            }
        }
    }
}

TEST_CASE("sweep is deterministic and ordered") {
    const fs::path cfg = work_dir() / "sweep.json";
    const fs::path out1 = work_dir() / "sweep1.csv";
    const fs::path out2 = work_dir() / "sweep2.csv";
    write_file(cfg, R"({"model": {"id": "two_spins_inverse", "h": 0.0, "gamma": 1.0},
                       "order": 2, "seed": 42,
                       "sweep": [{"param": "h", "min": 0.0, "max": 2.0, "steps": 3},
                                 {"param": "gamma", "min": 0.5, "max": 6.0, "steps": 4}]})");
    REQUIRE(run_cli("sweep --config " + cfg.string() + " --out " + out1.string() + " --jobs 4") == 0);
    REQUIRE(run_cli("sweep --config " + cfg.string() + " --out " + out2.string() + " --jobs 1") == 0);
    CHECK(read_file(out1) == read_file(out2));

    const Csv csv = parse_csv(out1);
    REQUIRE(csv.rows.size() == 12);
    // Rows sorted by sweep coordinates, first axis slowest.
    for (std::size_t r = 1; r < csv.rows.size(); ++r) {
        const double h_prev = csv.value(r - 1, "h"), h_cur = csv.value(r, "h");
        CHECK(h_prev <= h_cur + 1e-12);
        if (h_prev == h_cur) CHECK(csv.value(r - 1, "gamma") < csv.value(r, "gamma"));
    }
    // Closed form along the grid.
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const double gamma = csv.value(r, "gamma");
        CHECK(csv.value(r, "kappa_1") ==
              doctest::Approx(2.0 * gamma / (gamma * gamma + 4.0)).epsilon(1e-8));
    }
}

TEST_CASE("theta task on the globally damped pair shows the kink") {
    const fs::path cfg = work_dir() / "theta.json";
    const fs::path out = work_dir() / "theta.csv";
    write_file(cfg, R"({"model": {"id": "two_spins_global", "gamma": 0.1},
                       "s_grid": {"min": -1.5, "max": 0.5, "steps": 9}})");
    REQUIRE(run_cli("theta --config " + cfg.string() + " --out " + out.string()) == 0);
    const Csv csv = parse_csv(out);
    REQUIRE(csv.rows.size() == 9);
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const double s = csv.value(r, "s");
        const double theta = csv.value(r, "theta");
        const double analytic = csv.value(r, "theta_analytic");
        CHECK(std::abs(theta - analytic) < 1e-6);
        if (s < -1e-9) CHECK(theta > 0.0);
        if (s >= 0.0) CHECK(std::abs(theta) < 1e-8);
    }
}

TEST_CASE("kerr task flags the bistable window") {
    const fs::path cfg = work_dir() / "kerr.json";
    const fs::path out = work_dir() / "kerr.csv";
    write_file(cfg, R"({"model": {"id": "kerr", "delta": 1.0, "gamma": 0.5, "g": 0.01,
                                  "intensity": 0.0},
                       "intensity_grid": {"min": 0.5, "max": 11.5, "steps": 23}})");
    REQUIRE(run_cli("kerr --config " + cfg.string() + " --out " + out.string()) == 0);
    const Csv csv = parse_csv(out);
    REQUIRE(csv.rows.size() == 23);
    int two_branch_rows = 0;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const double n_count = csv.value(r, "kappa1_count");
        if (n_count == 2.0) ++two_branch_rows;
    }
    CHECK(two_branch_rows > 0);
    CHECK(two_branch_rows < 23);
}

TEST_CASE("traj task emits reproducible estimates") {
    const fs::path cfg = work_dir() / "traj.json";
    const fs::path out1 = work_dir() / "traj1.csv";
    const fs::path out2 = work_dir() / "traj2.csv";
    write_file(cfg, R"({"model": {"id": "two_spins_same", "h": 0.0, "gamma": 1.0},
                       "seed": 9, "trajectories": {"n": 200, "t_final": 100.0, "dt": 0.01}})");
    REQUIRE(run_cli("traj --config " + cfg.string() + " --out " + out1.string() + " --jobs 4") == 0);
    REQUIRE(run_cli("traj --config " + cfg.string() + " --out " + out2.string() + " --jobs 2") == 0);
    CHECK(read_file(out1) == read_file(out2));
    const Csv csv = parse_csv(out1);
    REQUIRE(csv.rows.size() == 1);
    CHECK(std::abs(csv.value(0, "kappa1_hat") - 0.4) < 10.0 * csv.value(0, "se1"));
}

TEST_CASE("distinct exit codes per failure class") {
    const fs::path missing = work_dir() / "does_not_exist.json";
    const std::string sink = " --out " + (work_dir() / "sink.csv").string();
    CHECK(run_cli("cumulants --config " + missing.string() + sink) == 2);

    const fs::path bad_model = work_dir() / "bad_model.json";
    write_file(bad_model, R"({"model": {"id": "no_such_model"}})");
    CHECK(run_cli("cumulants --config " + bad_model.string() + sink) == 2);

    const fs::path bad_param = work_dir() / "bad_param.json";
    write_file(bad_param, R"({"model": {"id": "two_spins_same", "hh": 1.0, "gamma": 1.0}})");
    CHECK(run_cli("cumulants --config " + bad_param.string() + sink) == 2);

    const fs::path unstable = work_dir() / "unstable.json";
    write_file(unstable, R"({"model": {"id": "squeezed_pair", "omega": 0.1, "g": 1.0,
                                       "gamma1": 0.1, "gamma2": 0.1}, "order": 1})");
    CHECK(run_cli("cumulants --config " + unstable.string() + sink) == 3);

    const fs::path too_big = work_dir() / "too_big.json";
    write_file(too_big, R"({"model": {"id": "squeezed_pair", "omega": 1.0, "g": 0.2,
                                      "gamma1": 1.0, "gamma2": 1.0, "cutoff": 9},
                           "s_grid": {"min": -0.2, "max": 0.0, "steps": 2}})");
    CHECK(run_cli("theta --config " + too_big.string() + sink) == 5);

    const fs::path tight_cap = work_dir() / "tight_cap.json";
    write_file(tight_cap, R"({"model": {"id": "two_spins_same", "h": 0.0, "gamma": 1.0},
                             "tolerances": {"dim_cap": 8},
                             "s_grid": {"min": -0.2, "max": 0.0, "steps": 2}})");
    CHECK(run_cli("theta --config " + tight_cap.string() + sink) == 5);

    const fs::path newton_fail = work_dir() / "newton.json";
    write_file(newton_fail, R"({"model": {"id": "squeezed_pair", "omega": 1.0, "g": 0.45,
                                          "gamma1": 0.4, "gamma2": 0.4},
                               "s_grid": {"min": -8.0, "max": -8.0, "steps": 2}})");
    CHECK(run_cli("theta --config " + newton_fail.string() + sink) == 4);
}

TEST_SUITE_END();

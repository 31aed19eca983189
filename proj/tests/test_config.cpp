#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbp/config.hpp"
#include "sbp/errors.hpp"
#include "sbp/groundstate.hpp"
#include "sbp/run.hpp"
#include "support.hpp"

using namespace sbp;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = "alpha = 6\nK = 2\np = 3\na = 1\neps_list = [0.1, 0.05]\n";

template <class E>
E caught(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const E& e) {
        return e;
    }
    FAIL("expected an exception");
    throw;
}

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("sbp_test_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_text(const std::string& text, const fs::path& out) {
    RunConfig cfg = parse_config_text(text + "output = " + out.string() + "\n");
    std::ostringstream log;
    return run(cfg, log);
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal file fills the exponents") {
    RunConfig c = parse_config_text(kMinimal);
    auto [lam, bet] = choose_exponents(6.0);
    CHECK(c.params.lambda == lam);
    CHECK(c.params.beta == bet);
    CHECK(c.params.lambda == doctest::Approx(3.6).epsilon(1e-12));
    CHECK(c.params.beta == doctest::Approx(1.2 / 7.0).epsilon(1e-12));
    CHECK(c.K == 2);
    CHECK(c.params.p == 3.0);
    CHECK(c.eps_list == std::vector<double>{0.1, 0.05});
    CHECK(c.params.eps == 0.1);
    CHECK(c.pot.is_radial());
}

TEST_CASE("window violations name the key") {
    ValidationError e = caught<ValidationError>("alpha = 5\neps = 0.1\n");
    CHECK(e.key == "alpha");
    CHECK(e.constraint == "> 3+sqrt(7) ≈ 5.6458");
    CHECK(std::string(e.what()) == "alpha must be > 3+sqrt(7) ≈ 5.6458");
    ValidationError k = caught<ValidationError>("K = 1\n");
    CHECK(k.key == "K");
    CHECK(k.constraint == ">= 2");
    CHECK(caught<ValidationError>("eps = 1.5\n").key == "eps");
    CHECK(caught<ValidationError>("lambda = 5\n").key == "lambda");
    CHECK(caught<ValidationError>("potential = spherical\n").key == "potential");
    CHECK(caught<ValidationError>("hess_diag = [1, 2]\n").key == "hess_diag");
    CHECK(caught<ValidationError>("grid_n = 33\n").key == "grid_n");
}

TEST_CASE("syntax errors carry the line") {
    ParseError u = caught<ParseError>("alpha = 6\n# note\nbogus = 1\n");
    CHECK(u.line == 3);
    CHECK(u.key == "bogus");
    ParseError n = caught<ParseError>("p = three\n");
    CHECK(n.line == 1);
    CHECK(n.key == "p");
    CHECK(caught<ParseError>("\nalpha 6\n").line == 2);
    CHECK(caught<ParseError>("command = plot\n").key == "command");
    CHECK_THROWS_AS(parse_config("/nonexistent/sbp.cfg"), ParseError);
}

TEST_CASE("repeated eps keys build the list; overrides revalidate") {
    RunConfig c = parse_config_text("# sweep\neps = 0.1   # first\neps = 0.05\n\nworkers = 3\n");
    CHECK(c.eps_list == std::vector<double>{0.1, 0.05});
    CHECK(c.workers == 3);
    apply_setting(c, "grid_n", "96");
    CHECK(c.grid_n == 96);
    CHECK_THROWS_AS(apply_setting(c, "workers", "0"), ValidationError);
    CHECK_THROWS_AS(apply_setting(c, "nonsense", "1"), ParseError);
}

TEST_CASE("potential keys") {
    RunConfig c = parse_config_text("potential = anisotropic\neps = 0.1\n");
    CHECK_FALSE(c.pot.is_radial());
    RunConfig d = parse_config_text("hess_diag = [2, 2, 2]\npotential_scale = 0.25\neps = 0.1\n");
    CHECK(d.pot.is_radial());
    CHECK(d.pot.scale == 0.25);
    RunConfig f = parse_config_text("potential = flat\neps = 0.1\n");
    CHECK(f.pot(Eigen::Vector3d(0.3, 0.0, 0.0)) == 1.0);
}

}

TEST_SUITE("run") {

TEST_CASE("ground-state writes the profile cache, constants and manifest") {
    fs::path out = scratch("gs");
    REQUIRE(run_text(std::string("command = ground-state\n") + kMinimal, out) == ExitCode::Ok);
    CHECK(slurp(out / "profile.sbpc").substr(0, 5) == "SBPC1");
    RadialProfile prof = load_profile((out / "profile.sbpc").string());
    CHECK(test::rel(prof.u0(), test::oracle_u0(3.0)) < 1e-6);
    std::ifstream cs(out / "constants.csv");
    std::string header, row;
    std::getline(cs, header);
    std::getline(cs, row);
    CHECK(header.rfind("p,K,u0,c0,c1,norm_l2_sq,norm_grad_sq,norm_lp1,norm_d1U_h1_sq", 0) == 0);
    GroundStateConstants gc = constants(prof, 2);
    CHECK(std::stod(row.substr(row.find(',', row.find(',', row.find(',') + 1) + 1) + 1)) ==
          doctest::Approx(gc.c0).epsilon(1e-14));
    nlohmann::json m = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(m["exit_code"] == 0);
    CHECK(m["command"] == "ground-state");
    CHECK(m["config"]["resolved"]["p"] == 3.0);
    CHECK(m.contains("wall_seconds"));
    CHECK(m["versions"].contains("fftw"));
    // second run reuses the cache
    REQUIRE(run_text(std::string("command = ground-state\n") + kMinimal, out) == ExitCode::Ok);
}

TEST_CASE("field-check rows all pass") {
    fs::path out = scratch("fc");
    REQUIRE(run_text("command = field-check\na = 1\neps = 0.1\n", out) == ExitCode::Ok);
    std::ifstream in(out / "field_check.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "index,rel_error,pass");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        double err = std::stod(line.substr(line.find(',') + 1));
        CHECK(err < 1e-3);
    }
    CHECK(rows == 10);
}

TEST_CASE("results table format round-trips") {
    CHECK(csv_header() ==
          "eps,K,p,a,alpha,lambda,beta,r_star,theta_star,phi_star,phi_eps,formula,error,n_norm,grad_norm,c_rad,"
          "c_azi,c_pol,boundary_flag,grid_n,grid_L,seconds");
    ResultRow r;
    r.eps = 0.1;
    r.K = 3;
    r.p = 2.5;
    r.r_star = 6.219980000000001;
    r.phi_eps = -0.123456789012345678;
    r.c_pol = 1e-300;
    r.boundary_flag = 1;
    r.grid_n = 96;
    r.grid_L = 19.75;
    r.seconds = 1.25;
    fs::path out = scratch("rows");
    fs::create_directories(out);
    {
        std::ofstream f(out / "results.csv");
        f << csv_header() << '\n' << format_row(r) << '\n';
    }
    auto rows = read_results((out / "results.csv").string());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].r_star == r.r_star);
    CHECK(rows[0].phi_eps == r.phi_eps);
    CHECK(rows[0].c_pol == r.c_pol);
    CHECK(rows[0].K == 3);
    CHECK(rows[0].grid_n == 96);
    CHECK(rows[0].boundary_flag == 1);
    {
        std::ofstream f(out / "bad.csv");
        f << csv_header() << '\n' << "0.1,2,x\n";
    }
    CHECK_THROWS_AS(read_results((out / "bad.csv").string()), ParseError);
}

TEST_CASE("exit codes") {
    fs::path e3 = scratch("e3");
    CHECK(run_text("command = solve\nalpha = 6\npotential_scale = 50\neps = 0.9\n", e3) == ExitCode::NoAdmissible);
    nlohmann::json m = nlohmann::json::parse(slurp(e3 / "manifest.json"));
    CHECK(m["exit_code"] == 3);
    CHECK(slurp(e3 / "results.csv").rfind(csv_header(), 0) == 0);

    fs::path e2 = scratch("e2");
    CHECK(run_text("command = solve\np = 2\na = 4\neps = 0.1\ngrid_n = 64\nmax_outer = 1\n", e2) ==
          ExitCode::NotConverged);

    fs::path e1 = scratch("e1");
    CHECK(run_text("command = solve\np = 2\na = 4\neps = 0.1\ngrid_L = 4\ngrid_n = 32\n", e1) ==
          ExitCode::InternalError);
}

}

#include "sbp/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sbp/errors.hpp"

namespace sbp {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(int line, const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ParseError(line, key, "expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw ParseError(line, key, "expected a number, got '" + v + "'");
    return x;
}

long long to_int(int line, const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ParseError(line, key, "expected an integer, got '" + v + "'");
    }
    if (used != v.size()) throw ParseError(line, key, "expected an integer, got '" + v + "'");
    return x;
}

std::vector<double> to_list(int line, const std::string& key, std::string v) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') throw ParseError(line, key, "expected [x, y, ...]");
    v = v.substr(1, v.size() - 2);
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ParseError(line, key, "empty list entry");
        out.push_back(to_double(line, key, item));
    }
    return out;
}

Command to_command(int line, const std::string& v) {
    static const std::map<std::string, Command> names{
        {"ground-state", Command::GroundState}, {"field-check", Command::FieldCheck},
        {"ansatz-check", Command::AnsatzCheck}, {"landscape", Command::Landscape},
        {"solve", Command::Solve},              {"verify-theorem", Command::VerifyTheorem},
        {"sweep", Command::Sweep}};
    auto it = names.find(v);
    if (it == names.end()) throw ParseError(line, "command", "unknown command '" + v + "'");
    return it->second;
}

void set_key(RunConfig& c, int line, const std::string& key, const std::string& v, bool& eps_seen) {
    ReductionParams& rp = c.params;
    if (key == "command") c.command = to_command(line, v);
    else if (key == "alpha") rp.alpha = to_double(line, key, v);
    else if (key == "p") rp.p = to_double(line, key, v);
    else if (key == "a") rp.a = to_double(line, key, v);
    else if (key == "lambda") rp.lambda = to_double(line, key, v);
    else if (key == "beta") rp.beta = to_double(line, key, v);
    else if (key == "K") c.K = static_cast<int>(to_int(line, key, v));
    else if (key == "eps") {
        if (!eps_seen) c.eps_list.clear();
        eps_seen = true;
        c.eps_list.push_back(to_double(line, key, v));
    } else if (key == "eps_list") {
        c.eps_list = to_list(line, key, v);
        eps_seen = true;
    } else if (key == "potential") c.potential = v;
    else if (key == "hess_diag") c.hess_diag = to_list(line, key, v);
    else if (key == "cap_floor") c.cap_floor = to_double(line, key, v);
    else if (key == "potential_scale") c.potential_scale = to_double(line, key, v);
    else if (key == "grid_L") c.grid_L = to_double(line, key, v);
    else if (key == "grid_n") c.grid_n = static_cast<int>(to_int(line, key, v));
    else if (key == "h_max") c.h_max = to_double(line, key, v);
    else if (key == "n_min") c.n_min = static_cast<int>(to_int(line, key, v));
    else if (key == "n_max") c.n_max = static_cast<int>(to_int(line, key, v));
    else if (key == "theta") c.theta = to_double(line, key, v);
    else if (key == "phi") c.phi = to_double(line, key, v);
    else if (key == "r") c.r = to_double(line, key, v);
    else if (key == "path") c.path = v;
    else if (key == "landscape_points") c.landscape_points = static_cast<int>(to_int(line, key, v));
    else if (key == "scan_points") c.scan_points = static_cast<int>(to_int(line, key, v));
    else if (key == "rel_tol") c.rel_tol = to_double(line, key, v);
    else if (key == "bp_coupling") rp.bp_coupling = to_double(line, key, v);
    else if (key == "bp_coarsen") rp.bp_coarsen = static_cast<int>(to_int(line, key, v));
    else if (key == "tol_aux") rp.tolerances.tol_aux = to_double(line, key, v);
    else if (key == "tol_krylov") rp.tolerances.tol_krylov = to_double(line, key, v);
    else if (key == "max_outer") rp.tolerances.max_outer = static_cast<int>(to_int(line, key, v));
    else if (key == "max_krylov") rp.tolerances.max_krylov = static_cast<int>(to_int(line, key, v));
    else if (key == "restarts") rp.tolerances.restarts = static_cast<int>(to_int(line, key, v));
    else if (key == "profile_rmax") c.profile_rmax = to_double(line, key, v);
    else if (key == "profile_tol") c.profile_tol = to_double(line, key, v);
    else if (key == "profile_h") c.profile_h = to_double(line, key, v);
    else if (key == "field_checks") c.field_checks = static_cast<int>(to_int(line, key, v));
    else if (key == "output") c.output_dir = v;
    else if (key == "workers") c.workers = static_cast<int>(to_int(line, key, v));
    else if (key == "seed") {
        long long s = to_int(line, key, v);
        if (s < 0) throw ParseError(line, key, "seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    } else
        throw ParseError(line, key, "unknown key");
}

void require(bool ok, const char* key, const char* constraint) {
    if (!ok) throw ValidationError(key, constraint);
}

RunConfig defaults() {
    RunConfig c;
    c.params.p = 2.0;
    c.params.a = 4.0;
    c.params.alpha = 6.0;
    c.params.lambda = 0.0;
    c.params.beta = 0.0;
    return c;
}

}  // namespace

const char* command_name(Command c) {
    switch (c) {
        case Command::GroundState: return "ground-state";
        case Command::FieldCheck: return "field-check";
        case Command::AnsatzCheck: return "ansatz-check";
        case Command::Landscape: return "landscape";
        case Command::Solve: return "solve";
        case Command::VerifyTheorem: return "verify-theorem";
        case Command::Sweep: return "sweep";
    }
    return "?";
}

void finalize_config(RunConfig& c) {
    ReductionParams& rp = c.params;
    require(std::isfinite(rp.alpha) && rp.alpha > 3.0 + std::sqrt(7.0), "alpha", "> 3+sqrt(7) ≈ 5.6458");
    require(c.K >= 2, "K", ">= 2");
    require(rp.p > 1.0 && rp.p < 5.0, "p", "in (1, 5)");
    require(rp.a > 0.0, "a", "> 0");
    require(!c.eps_list.empty(), "eps", "given at least once");
    for (double e : c.eps_list) require(e > 0.0 && e < 1.0, "eps", "in (0, 1)");
    auto [lam, bet] = choose_exponents(rp.alpha);
    if (rp.lambda <= 0.0) rp.lambda = lam;
    if (rp.beta <= 0.0) rp.beta = bet;
    double lo = 2.0 * (rp.alpha + 2.0) / (rp.alpha - 1.0), hi = std::min(2.0 * rp.alpha - 8.0, rp.alpha);
    require(rp.lambda > lo && rp.lambda < hi, "lambda", "in (2(alpha+2)/(alpha-1), min(2 alpha - 8, alpha))");
    require(rp.beta > 0.0 && rp.beta < (rp.alpha - rp.lambda) / (rp.alpha + 1.0), "beta",
            "in (0, (alpha - lambda)/(alpha + 1))");
    require(rp.bp_coupling >= 0.0 && std::isfinite(rp.bp_coupling), "bp_coupling", ">= 0");
    require(rp.bp_coarsen == 1 || rp.bp_coarsen == 2, "bp_coarsen", "1 or 2");
    require(rp.tolerances.max_outer >= 1, "max_outer", ">= 1");
    require(rp.tolerances.max_krylov >= 1, "max_krylov", ">= 1");
    require(rp.tolerances.restarts >= 0, "restarts", ">= 0");
    require(c.potential == "radial" || c.potential == "anisotropic" || c.potential == "flat", "potential",
            "one of radial, anisotropic, flat");
    require(c.hess_diag.empty() || c.hess_diag.size() == 3, "hess_diag", "a list of 3 entries");
    for (double d : c.hess_diag) require(d > 0.0 && std::isfinite(d), "hess_diag", "positive");
    require(c.cap_floor > 0.0 && c.cap_floor <= 1.0, "cap_floor", "in (0, 1]");
    require(c.potential_scale >= 0.0 && std::isfinite(c.potential_scale), "potential_scale",
            ">= 0 (0 picks the norm bound)");
    require(c.grid_L >= 0.0 && std::isfinite(c.grid_L), "grid_L", ">= 0 (0 picks L from the geometry)");
    require(c.grid_n == 0 || (c.grid_n >= 32 && c.grid_n % 2 == 0), "grid_n", "0 or an even number >= 32");
    require(rp.bp_coarsen == 1 || c.grid_n == 0 || c.grid_n % 4 == 0, "grid_n", "divisible by 4 when bp_coarsen = 2");
    require(c.h_max > 0.0, "h_max", "> 0");
    require(c.n_min >= 32 && c.n_min <= c.n_max, "n_min", "in [32, n_max]");
    require(std::isfinite(c.theta), "theta", "finite");
    require(std::isfinite(c.phi), "phi", "finite");
    require(c.r >= 0.0, "r", ">= 0 (0 picks the path radius)");
    require(c.path == "geometric" || c.path == "reference", "path", "geometric or reference");
    require(c.landscape_points >= 2, "landscape_points", ">= 2");
    require(c.scan_points >= 3, "scan_points", ">= 3");
    require(c.rel_tol > 0.0 && c.rel_tol < 1.0, "rel_tol", "in (0, 1)");
    require(c.profile_rmax >= 10.0, "profile_rmax", ">= 10");
    require(c.profile_tol > 0.0, "profile_tol", "> 0");
    require(c.profile_h > 0.0 && c.profile_h <= 0.05, "profile_h", "in (0, 0.05]");
    require(c.field_checks >= 1, "field_checks", ">= 1");
    require(c.workers >= 1, "workers", ">= 1");
    require(!c.output_dir.empty(), "output", "non-empty");

    rp.eps = c.eps_list.front();
    rp.validate();
    if (c.potential == "flat") {
        c.pot = PotentialSpec::constant_one();
        return;
    }
    Eigen::Vector3d d = c.potential == "radial" ? Eigen::Vector3d(1, 1, 1) : Eigen::Vector3d(1, 1.5, 2);
    if (!c.hess_diag.empty()) d = Eigen::Vector3d(c.hess_diag[0], c.hess_diag[1], c.hess_diag[2]);
    c.pot = PotentialSpec::make(rp.alpha, d.asDiagonal(), c.cap_floor);
    if (c.potential_scale > 0.0) c.pot.scale = c.potential_scale;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    bool eps_seen = false;
    set_key(cfg, 0, key, trim(value), eps_seen);
    cfg.echo.emplace_back(key, trim(value));
    finalize_config(cfg);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig c = defaults();
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool eps_seen = false;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::string s = trim(raw);
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(line, "", "expected key = value");
        std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError(line, "", "missing key");
        if (value.empty()) throw ParseError(line, key, "missing value");
        set_key(c, line, key, value, eps_seen);
        c.echo.emplace_back(key, value);
    }
    finalize_config(c);
    return c;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError(0, "", "cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace sbp

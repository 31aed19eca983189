#include "sbp/run.hpp"

#include <fftw3.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Core>
#include <json.hpp>

#include "sbp/bpfield.hpp"
#include "sbp/errors.hpp"
#include "sbp/kernels.hpp"
#include "sbp/reduction.hpp"

namespace sbp {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Result of one independent evaluation.
struct Outcome {
    std::vector<ResultRow> rows;
    std::vector<std::string> lines;  // free-form CSV lines for the auxiliary tables
    json info = json::object();
    int code = ExitCode::Ok;
    std::string error;
    double seconds = 0.0;
};

int code_of(const std::exception_ptr& ep, std::string& msg) {
    try {
        std::rethrow_exception(ep);
    } catch (const NoConvergence& e) {
        msg = e.what();
        return ExitCode::NotConverged;
    } catch (const EmptyAdmissible& e) {
        msg = e.what();
        return ExitCode::NoAdmissible;
    } catch (const std::exception& e) {
        msg = e.what();
        return ExitCode::InternalError;
    } catch (...) {
        msg = "unknown exception";
        return ExitCode::InternalError;
    }
}

// Runs work(i) for i < count on `workers` threads; sink(i, outcome) is called on this thread in index order.
void ordered_map(std::size_t count, int workers, const std::function<Outcome(std::size_t)>& work,
                 const std::function<void(std::size_t, Outcome&)>& sink) {
    std::vector<std::optional<Outcome>> slots(count);
    std::mutex m;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            auto t0 = std::chrono::steady_clock::now();
            Outcome out;
            try {
                out = work(i);
            } catch (...) {
                out = Outcome{};
                out.code = code_of(std::current_exception(), out.error);
            }
            out.seconds = seconds_since(t0);
            for (auto& r : out.rows) r.seconds = out.seconds;
            {
                std::lock_guard<std::mutex> lock(m);
                slots[i] = std::move(out);
            }
            cv.notify_all();
        }
    };
    int nthreads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::size_t i = 0; i < count; ++i) {
        Outcome out;
        {
            std::unique_lock<std::mutex> lock(m);
            cv.wait(lock, [&] { return slots[i].has_value(); });
            out = std::move(*slots[i]);
            slots[i].reset();
        }
        sink(i, out);
    }
    for (auto& t : pool) t.join();
}

std::shared_ptr<const RadialProfile> load_or_solve(const RunConfig& cfg, std::ostream& log) {
    fs::path path = fs::path(cfg.output_dir) / "profile.sbpc";
    const double p = cfg.params.p;
    if (fs::exists(path)) {
        try {
            RadialProfile prof = load_profile(path.string());
            if (prof.p == p && prof.r_max == cfg.profile_rmax && std::fabs(prof.spacing() - cfg.profile_h) < 1e-12) {
                log << "profile: loaded " << path.string() << '\n';
                return std::make_shared<const RadialProfile>(std::move(prof));
            }
        } catch (const Error&) {
        }
    }
    RadialProfile prof = solve_ground_state(p, cfg.profile_rmax, cfg.profile_tol, cfg.profile_h);
    save_profile(prof, path.string());
    log << "profile: solved p=" << p << ", U(0)=" << g17(prof.u0()) << '\n';
    return std::make_shared<const RadialProfile>(std::move(prof));
}

ReductionParams params_at(const RunConfig& cfg, double eps) {
    ReductionParams rp = cfg.params;
    rp.eps = eps;
    return rp;
}

std::pair<double, double> interval_or_throw(const ReductionParams& rp, const PotentialSpec& pot) {
    auto iv = admissible_interval(rp, pot);
    if (!iv) throw EmptyAdmissible("admissible interval is empty at eps = " + g17(rp.eps));
    return *iv;
}

double path_radius(const RunConfig& cfg, const ReductionParams& rp, std::pair<double, double> iv) {
    if (cfg.r > 0.0) return cfg.r;
    if (cfg.path == "reference") return rp.reference_radius();
    return std::sqrt(iv.first * iv.second);
}

// Grid covering a peak radius; nullopt when the point count would exceed n_max.
std::optional<UniformGrid> grid_for(const RunConfig& cfg, double radius, double eta) {
    double L = cfg.grid_L > 0.0 ? cfg.grid_L : radius + 12.0 / eta + 0.5;
    int n = cfg.grid_n > 0 ? cfg.grid_n : fft_friendly_n(L, cfg.h_max, cfg.n_min);
    if (n > cfg.n_max) return std::nullopt;
    return UniformGrid(L, n);
}

ResultRow base_row(const RunConfig& cfg, const ReductionParams& rp, const UniformGrid& grid) {
    ResultRow row;
    row.eps = rp.eps;
    row.K = cfg.K;
    row.p = rp.p;
    row.a = rp.a;
    row.alpha = rp.alpha;
    row.lambda = rp.lambda;
    row.beta = rp.beta;
    row.grid_n = grid.n;
    row.grid_L = grid.L;
    return row;
}

void fill_from(ResultRow& row, const PeakConfig& pc, double phi_eps, double formula, const AuxiliarySolution& aux) {
    row.r_star = pc.r;
    row.theta_star = pc.theta;
    row.phi_star = pc.phi;
    row.phi_eps = phi_eps;
    row.formula = formula;
    row.error = std::fabs(phi_eps - formula);
    row.n_norm = aux.n_norm;
    row.grad_norm = aux.full_gradient_norm;
    row.c_rad = aux.multipliers[0];
    row.c_azi = aux.multipliers[1];
    row.c_pol = aux.multipliers[2];
}

// A smooth random source: three Gaussian bumps of mixed sign.
ScalarField3D random_source(const UniformGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-g.L / 4.0, g.L / 4.0), width(0.8, 1.3), amp(-1.0, 1.0);
    struct Bump {
        Eigen::Vector3d c;
        double w, a;
    };
    std::vector<Bump> bumps;
    for (int b = 0; b < 3; ++b) {
        Eigen::Vector3d c;
        for (int d = 0; d < 3; ++d) c[d] = pos(rng);
        double w = width(rng), a = amp(rng);
        bumps.push_back({c, w, a});
    }
    return ScalarField3D::sample(g, [&](double x, double y, double z) {
        double s = 0.0;
        for (const auto& b : bumps) s += b.a * std::exp(-(Eigen::Vector3d(x, y, z) - b.c).squaredNorm() / (b.w * b.w));
        return s;
    });
}

class Runner {
public:
    Runner(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log) {}

    int execute() {
        auto t0 = std::chrono::steady_clock::now();
        manifest_["tool"] = {{"name", "sbp"}, {"version", kVersion}};
        manifest_["command"] = command_name(cfg_.command);
        manifest_["started"] = utc_now();
        json versions;
        versions["sbp"] = kVersion;
        versions["fftw"] = std::string(fftw_version);
        versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION);
        versions["compiler"] = std::string(__VERSION__);
        versions["kernels"] = &kernels::active() == kernels::avx2_table() ? "avx2" : "scalar";
        manifest_["versions"] = versions;
        manifest_["config"] = config_json();
        manifest_["tasks"] = json::array();
        manifest_["truncated_eps"] = json::array();
        int code = ExitCode::Ok;
        try {
            fs::create_directories(cfg_.output_dir);
            code = dispatch();
        } catch (...) {
            std::string msg;
            code = code_of(std::current_exception(), msg);
            manifest_["error"] = msg;
            log_ << "error: " << msg << '\n';
        }
        manifest_["exit_code"] = code;
        manifest_["wall_seconds"] = seconds_since(t0);
        manifest_["finished"] = utc_now();
        write_manifest();
        return code;
    }

private:
    json config_json() const {
        const ReductionParams& rp = cfg_.params;
        json echo = json::array();
        for (const auto& [k, v] : cfg_.echo) echo.push_back({k, v});
        return {{"echo", echo},
                {"resolved",
                 {{"command", command_name(cfg_.command)},
                  {"p", rp.p},
                  {"a", rp.a},
                  {"alpha", rp.alpha},
                  {"lambda", rp.lambda},
                  {"beta", rp.beta},
                  {"K", cfg_.K},
                  {"eps_list", cfg_.eps_list},
                  {"potential", cfg_.potential},
                  {"hess_diag", cfg_.hess_diag},
                  {"cap_floor", cfg_.cap_floor},
                  {"potential_scale", cfg_.pot.scale},
                  {"bp_coupling", rp.bp_coupling},
                  {"bp_coarsen", rp.bp_coarsen},
                  {"grid_L", cfg_.grid_L},
                  {"grid_n", cfg_.grid_n},
                  {"h_max", cfg_.h_max},
                  {"n_min", cfg_.n_min},
                  {"n_max", cfg_.n_max},
                  {"theta", cfg_.theta},
                  {"phi", cfg_.phi},
                  {"r", cfg_.r},
                  {"path", cfg_.path},
                  {"workers", cfg_.workers},
                  {"seed", cfg_.seed},
                  {"output", cfg_.output_dir}}}};
    }

    void write_manifest() {
        std::ofstream out(fs::path(cfg_.output_dir) / "manifest.json");
        out << manifest_.dump(2) << '\n';
    }

    int dispatch() {
        switch (cfg_.command) {
            case Command::GroundState: return ground_state();
            case Command::FieldCheck: return field_check();
            case Command::AnsatzCheck: return ansatz_check();
            case Command::Landscape:
            case Command::Solve:
            case Command::VerifyTheorem:
            case Command::Sweep: return results();
        }
        return ExitCode::InternalError;
    }

    int ground_state() {
        profile_ = load_or_solve(cfg_, log_);
        const RadialProfile& prof = *profile_;
        GroundStateConstants c = constants(prof, cfg_.K);
        const double p = prof.p;
        double nehari = (c.norm_grad_sq + c.norm_l2_sq - c.norm_lp1) / c.norm_lp1;
        double pohozaev = (0.5 * c.norm_grad_sq - 3.0 * (c.norm_lp1 / (p + 1.0) - 0.5 * c.norm_l2_sq)) / c.norm_grad_sq;
        std::ofstream out(fs::path(cfg_.output_dir) / "constants.csv");
        out << "p,K,u0,c0,c1,norm_l2_sq,norm_grad_sq,norm_lp1,norm_d1U_h1_sq,first_moment,eta_fit,nehari_rel,"
               "pohozaev_rel,ode_residual\n";
        out << g17(p) << ',' << cfg_.K << ',' << g17(prof.u0()) << ',' << g17(c.c0) << ',' << g17(c.c1) << ','
            << g17(c.norm_l2_sq) << ',' << g17(c.norm_grad_sq) << ',' << g17(c.norm_lp1) << ',' << g17(c.norm_d1U_h1_sq)
            << ',' << g17(c.first_moment) << ',' << g17(prof.eta_fit) << ',' << g17(nehari) << ',' << g17(pohozaev)
            << ',' << g17(ode_residual(prof)) << '\n';
        manifest_["constants"] = {{"u0", prof.u0()}, {"c0", c.c0}, {"c1", c.c1}, {"norm_d1U_h1_sq", c.norm_d1U_h1_sq},
                                  {"nehari_rel", nehari}, {"pohozaev_rel", pohozaev}};
        log_ << "ground-state: U(0)=" << g17(prof.u0()) << " C0=" << g17(c.c0) << " C1=" << g17(c.c1) << '\n';
        return ExitCode::Ok;
    }

    int field_check() {
        const UniformGrid grid(10.0, 32);
        const BPParams bp(cfg_.params.a, cfg_.eps_list.front());
        std::ofstream out(fs::path(cfg_.output_dir) / "field_check.csv");
        out << "index,rel_error,pass\n";
        int code = ExitCode::Ok;
        double worst = 0.0;
        ordered_map(
            static_cast<std::size_t>(cfg_.field_checks), cfg_.workers,
            [&](std::size_t i) {
                std::mt19937_64 rng(cfg_.seed * 1000003ULL + i);
                ScalarField3D src = random_source(grid, rng);
                ScalarField3D a = solve_potential_spectral(src, bp);
                ScalarField3D b = solve_potential_direct(src, bp);
                Outcome o;
                double err = norm_l2(a - b) / norm_l2(b);
                o.info = {{"index", i}, {"rel_error", err}};
                o.lines.push_back(std::to_string(i) + ',' + g17(err) + ',' + (err < 1e-3 ? "1" : "0"));
                return o;
            },
            [&](std::size_t, Outcome& o) {
                code = sink_lines(out, o, code);
                if (o.code == ExitCode::Ok) worst = std::max(worst, o.info["rel_error"].get<double>());
            });
        manifest_["max_rel_error"] = worst;
        log_ << "field-check: max relative error " << g17(worst) << '\n';
        return code;
    }

    int ansatz_check() {
        profile_ = load_or_solve(cfg_, log_);
        std::ofstream out(fs::path(cfg_.output_dir) / "ansatz_check.csv");
        out << "eps,r_lo,r_hi,r,gram_rad,gram_azi,gram_pol,overlap_12,grad_norm,energy_W,formula,grid_n,grid_L\n";
        int code = ExitCode::Ok;
        const GroundStateConstants gc = constants(*profile_, cfg_.K);
        ordered_map(
            cfg_.eps_list.size(), cfg_.workers,
            [&](std::size_t i) {
                Outcome o;
                ReductionParams rp = params_at(cfg_, cfg_.eps_list[i]);
                auto iv = interval_or_throw(rp, cfg_.pot);
                double r = path_radius(cfg_, rp, iv);
                auto grid = grid_for(cfg_, r, profile_->eta_fit);
                if (!grid) return truncated(rp.eps);
                EnergyContext ctx(rp, cfg_.pot, *grid, profile_);
                PeakConfig pc(r, cfg_.theta, cfg_.phi, cfg_.K);
                Eigen::Matrix3d G = gram_matrix(pc, *profile_, *grid);
                double ov = overlap(pc, *profile_, *grid, 1, 2);
                double gn = pseudo_critical_residual(pc, ctx);
                double eW = energy(ctx, build_W(pc, *profile_, *grid));
                double f = asymptotic_formula(pc, rp, cfg_.pot, gc);
                o.lines.push_back(g17(rp.eps) + ',' + g17(iv.first) + ',' + g17(iv.second) + ',' + g17(r) + ',' +
                                  g17(G(0, 0)) + ',' + g17(G(1, 1)) + ',' + g17(G(2, 2)) + ',' + g17(ov) + ',' +
                                  g17(gn) + ',' + g17(eW) + ',' + g17(f) + ',' + std::to_string(grid->n) + ',' +
                                  g17(grid->L));
                o.info = {{"eps", rp.eps}, {"grad_norm", gn}};
                return o;
            },
            [&](std::size_t, Outcome& o) { code = sink_lines(out, o, code); });
        return code;
    }

    Outcome truncated(double eps) {
        Outcome o;
        o.info = {{"eps", eps}, {"truncated", true}};
        return o;
    }

    int sink_lines(std::ostream& out, Outcome& o, int code) {
        for (const auto& l : o.lines) out << l << '\n';
        out.flush();
        record(o);
        return code == ExitCode::Ok ? o.code : code;
    }

    void record(const Outcome& o) {
        json t = o.info;
        t["seconds"] = o.seconds;
        if (o.code != ExitCode::Ok) {
            t["exit_code"] = o.code;
            t["error"] = o.error;
            log_ << "task failed (" << o.code << "): " << o.error << '\n';
        }
        if (t.contains("truncated")) {
            manifest_["truncated_eps"].push_back(t["eps"]);
            log_ << "eps " << g17(t["eps"].get<double>()) << " skipped: grid would exceed n_max\n";
        }
        manifest_["tasks"].push_back(t);
    }

    struct Job {
        double eps;
        double r;  // landscape only
        int index; // position on the landscape line
    };

    int results() {
        profile_ = load_or_solve(cfg_, log_);
        gc_ = constants(*profile_, cfg_.K);
        std::vector<Job> jobs;
        for (double eps : cfg_.eps_list) {
            if (cfg_.command != Command::Landscape) {
                jobs.push_back({eps, 0.0, 0});
                continue;
            }
            ReductionParams rp = params_at(cfg_, eps);
            auto iv = admissible_interval(rp, cfg_.pot);
            if (!iv) {
                jobs.push_back({eps, -1.0, 0});
                continue;
            }
            int m = cfg_.landscape_points;
            for (int j = 0; j < m; ++j) jobs.push_back({eps, iv->first + (iv->second - iv->first) * j / (m - 1), j});
        }
        std::ofstream out(fs::path(cfg_.output_dir) / "results.csv");
        out << csv_header() << '\n';
        out.flush();
        int code = ExitCode::Ok;
        ordered_map(
            jobs.size(), cfg_.workers, [&](std::size_t i) { return evaluate(jobs[i]); },
            [&](std::size_t, Outcome& o) {
                for (const auto& r : o.rows) out << format_row(r) << '\n';
                out.flush();
                record(o);
                if (code == ExitCode::Ok) code = o.code;
                for (const auto& r : o.rows)
                    log_ << command_name(cfg_.command) << ": eps=" << g17(r.eps) << " r=" << g17(r.r_star)
                         << " Phi=" << g17(r.phi_eps) << " |n|=" << g17(r.n_norm) << " (" << o.seconds << " s)\n";
                rows_.insert(rows_.end(), o.rows.begin(), o.rows.end());
            });
        summarize();
        return code;
    }

    Outcome evaluate(const Job& job) {
        ReductionParams rp = params_at(cfg_, job.eps);
        auto iv = interval_or_throw(rp, cfg_.pot);
        Outcome o;
        o.info = {{"eps", job.eps}, {"r_lo", iv.first}, {"r_hi", iv.second}};
        switch (cfg_.command) {
            case Command::Landscape: {
                auto grid = grid_for(cfg_, iv.second, profile_->eta_fit);
                if (!grid) return truncated(job.eps);
                EnergyContext ctx(rp, cfg_.pot, *grid, profile_);
                PeakConfig pc(job.r, cfg_.theta, cfg_.phi, cfg_.K);
                ReducedEvaluation ev = evaluate_reduced(pc, ctx, {}, false);
                ResultRow row = base_row(cfg_, rp, *grid);
                fill_from(row, pc, ev.phi, asymptotic_formula(pc, rp, cfg_.pot, gc_), ev.aux);
                row.boundary_flag = (job.index == 0 || job.index == cfg_.landscape_points - 1) ? 1 : 0;
                o.rows.push_back(row);
                break;
            }
            case Command::Solve: {
                double r = path_radius(cfg_, rp, iv);
                auto grid = grid_for(cfg_, r, profile_->eta_fit);
                if (!grid) return truncated(job.eps);
                EnergyContext ctx(rp, cfg_.pot, *grid, profile_);
                PeakConfig pc(r, cfg_.theta, cfg_.phi, cfg_.K);
                ReducedEvaluation ev = evaluate_reduced(pc, ctx, {}, false);
                VerifyReport vr = verify_solution(pc, ctx, &ev.aux);
                ResultRow row = base_row(cfg_, rp, *grid);
                fill_from(row, pc, ev.phi, asymptotic_formula(pc, rp, cfg_.pot, gc_), ev.aux);
                o.rows.push_back(row);
                o.info["verify_pass"] = vr.pass;
                o.info["iterations"] = ev.aux.iterations;
                o.info["orthogonality"] = ev.aux.orthogonality;
                break;
            }
            case Command::VerifyTheorem: {
                auto grid = grid_for(cfg_, iv.second, profile_->eta_fit);
                if (!grid) return truncated(job.eps);
                EnergyContext ctx(rp, cfg_.pot, *grid, profile_);
                MinimizeOptions mo;
                mo.K = cfg_.K;
                mo.theta = cfg_.theta;
                mo.phi = cfg_.phi;
                mo.rel_tol = cfg_.rel_tol;
                mo.scan_points = cfg_.scan_points;
                MinimizerResult mr = minimize_reduced(ctx, mo);
                VerifyReport vr = verify_solution(mr.cfg, ctx, &mr.aux);
                ResultRow row = base_row(cfg_, rp, *grid);
                fill_from(row, mr.cfg, mr.phi_value, asymptotic_formula(mr.cfg, rp, cfg_.pot, gc_), mr.aux);
                row.boundary_flag = mr.boundary ? 1 : 0;
                o.rows.push_back(row);
                o.info["verify_pass"] = vr.pass;
                o.info["thresholds"] = vr.thresholds;
                o.info["gradient_threshold"] = vr.gradient_threshold;
                o.info["evaluations"] = mr.evaluations;
                o.info["failed_evaluations"] = mr.failed;
                break;
            }
            case Command::Sweep: {
                double r = path_radius(cfg_, rp, iv);
                auto grid = grid_for(cfg_, r, profile_->eta_fit);
                if (!grid) return truncated(job.eps);
                EnergyContext ctx(rp, cfg_.pot, *grid, profile_);
                PeakConfig pc(r, cfg_.theta, cfg_.phi, cfg_.K);
                double pseudo = pseudo_critical_residual(pc, ctx);
                ReducedEvaluation ev = evaluate_reduced(pc, ctx, {}, false);
                ResultRow row = base_row(cfg_, rp, *grid);
                fill_from(row, pc, ev.phi, asymptotic_formula(pc, rp, cfg_.pot, gc_), ev.aux);
                row.grad_norm = pseudo;
                o.rows.push_back(row);
                o.info["orthogonality"] = ev.aux.orthogonality;
                break;
            }
            default: break;
        }
        return o;
    }

    void summarize() {
        if (cfg_.command == Command::Landscape || rows_.size() < 2) return;
        std::vector<double> e, err, n, g;
        for (const auto& r : rows_) {
            e.push_back(r.eps);
            err.push_back(std::max(r.error, 1e-300));
            n.push_back(r.n_norm);
            g.push_back(r.grad_norm);
        }
        manifest_["slopes"] = {{"error", loglog_slope(e, err)},
                               {"mu", loglog_slope(e, err) - 3.0},
                               {"n_norm", loglog_slope(e, n)},
                               {"grad_norm", loglog_slope(e, g)}};
        log_ << "slopes: error " << g17(loglog_slope(e, err)) << ", n " << g17(loglog_slope(e, n)) << '\n';
    }

    const RunConfig& cfg_;
    std::ostream& log_;
    json manifest_;
    std::shared_ptr<const RadialProfile> profile_;
    GroundStateConstants gc_;
    std::vector<ResultRow> rows_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

const std::string& csv_header() {
    static const std::string h =
        "eps,K,p,a,alpha,lambda,beta,r_star,theta_star,phi_star,phi_eps,formula,error,n_norm,grad_norm,c_rad,c_azi,"
        "c_pol,boundary_flag,grid_n,grid_L,seconds";
    return h;
}

std::string format_row(const ResultRow& r) {
    std::string s = g17(r.eps) + ',' + std::to_string(r.K);
    for (double x : {r.p, r.a, r.alpha, r.lambda, r.beta, r.r_star, r.theta_star, r.phi_star, r.phi_eps, r.formula,
                     r.error, r.n_norm, r.grad_norm, r.c_rad, r.c_azi, r.c_pol})
        s += ',' + g17(x);
    s += ',' + std::to_string(r.boundary_flag) + ',' + std::to_string(r.grid_n) + ',' + g17(r.grid_L);
    char buf[32];
    std::snprintf(buf, sizeof buf, ",%.3f", r.seconds);
    return s + buf;
}

std::vector<ResultRow> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "", "cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != csv_header()) throw ParseError(1, "header", "unexpected results header");
    std::vector<ResultRow> rows;
    int ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 22) throw ParseError(ln, "", "expected 22 fields");
        try {
            ResultRow r;
            std::size_t k = 0;
            r.eps = std::stod(f[k++]);
            r.K = std::stoi(f[k++]);
            for (double* x : {&r.p, &r.a, &r.alpha, &r.lambda, &r.beta, &r.r_star, &r.theta_star, &r.phi_star,
                              &r.phi_eps, &r.formula, &r.error, &r.n_norm, &r.grad_norm, &r.c_rad, &r.c_azi, &r.c_pol})
                *x = std::stod(f[k++]);
            r.boundary_flag = std::stoi(f[k++]);
            r.grid_n = std::stoi(f[k++]);
            r.grid_L = std::stod(f[k++]);
            r.seconds = std::stod(f[k++]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw ParseError(ln, "", "malformed number");
        }
    }
    return rows;
}

int run(const RunConfig& cfg, std::ostream& log) {
    Runner runner(cfg, log);
    return runner.execute();
}

}  // namespace sbp

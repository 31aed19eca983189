#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sbp/config.hpp"
#include "sbp/errors.hpp"
#include "sbp/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multi-peak bound states of the Schrodinger-Bopp-Podolsky system"};
    std::string config_path, output;
    int workers = 0, grid_n = 0;
    std::uint64_t seed = 0;
    double grid_L = 0.0;
    app.add_option("--config", config_path, "configuration file (key = value lines)")->required();
    auto* o_out = app.add_option("--output", output, "output directory");
    auto* o_workers = app.add_option("--workers", workers, "parallel evaluations")->check(CLI::PositiveNumber);
    auto* o_seed = app.add_option("--seed", seed, "seed for randomized checks");
    auto* o_n = app.add_option("--grid-n", grid_n, "grid points per axis");
    auto* o_L = app.add_option("--grid-L", grid_L, "grid half width");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    sbp::RunConfig cfg;
    try {
        cfg = sbp::parse_config(config_path);
        auto num = [](auto v) {
            std::ostringstream s;
            s.precision(17);
            s << v;
            return s.str();
        };
        if (*o_out) sbp::apply_setting(cfg, "output", output);
        if (*o_workers) sbp::apply_setting(cfg, "workers", num(workers));
        if (*o_seed) sbp::apply_setting(cfg, "seed", num(seed));
        if (*o_n) sbp::apply_setting(cfg, "grid_n", num(grid_n));
        if (*o_L) sbp::apply_setting(cfg, "grid_L", num(grid_L));
    } catch (const sbp::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    return sbp::run(cfg, std::cout);
}

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "frachill/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fractional Cahn-Hilliard tumor-growth simulator"};
    app.require_subcommand(1, 1);

    std::string config;
    frachill::CommandOptions opt;
    std::string out;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "flat key = value run configuration")->required();
        sub->add_option("--out", out, "output directory (overrides out.dir)");
    };
    auto* run = app.add_subcommand("run", "run and write series.csv and snapshots");
    auto* check = app.add_subcommand("check", "run, then evaluate the checks into checks.csv");
    auto* sh = app.add_subcommand("study-h", "time-step refinement study");
    auto* sl = app.add_subcommand("study-lambda", "Yosida-parameter refinement study");
    auto* pc = app.add_subcommand("probe-contraction", "Lipschitz probe of the per-step fixed-point map");
    for (auto* s : {run, check, sh, sl, pc}) add_common(s);
    for (auto* s : {sh, sl}) s->add_option("--levels", opt.levels, "number of refinement levels")->capture_default_str();
    pc->add_option("--pairs", opt.pairs, "number of random pairs")->capture_default_str();
    pc->add_option("--seed", opt.seed, "seed for the random pairs")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : frachill::exit_config;
    }
    if (!out.empty()) opt.out = out;
    return frachill::dispatch(app.get_subcommands().front()->get_name(), config, opt, std::cout, std::cerr);
}

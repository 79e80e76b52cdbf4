#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "vulcan/errors.hpp"
#include "vulcan/harness/commands.hpp"
#include "vulcan/version.hpp"

namespace h = vulcan::harness;

namespace {

// Flags that map onto RunConfig fields; only flags the user actually passed
// override the config file.
struct SharedFlags {
    std::string config_path;
    std::string domain, preset, delta, planner, f, budget, out, grid, penalties;
    int horizon = 0, replicates = 0, threads = 0;
    double gamma = 0.0, c = 0.0;
    std::uint64_t seed = 0;
    std::map<std::string, CLI::Option*> opts;

    void add(CLI::App& app, bool with_planner) {
        opts["config"] = app.add_option("--config", config_path, "JSON config file; flags override its keys");
        opts["domain"] = app.add_option("--domain", domain, "bandit | fig2 | gp | random");
        opts["preset"] = app.add_option("--preset", preset, "bandit machine preset (table1)");
        opts["horizon"] = app.add_option("--horizon", horizon, "number of actions n");
        opts["gamma"] = app.add_option("--gamma", gamma, "discount factor in [0,1] (default 1)");
        opts["delta"] = app.add_option("--delta", delta,
                                       "risk bound: constant:D | linear:A | saturating:A,B,C (default per domain)");
        if (with_planner) {
            opts["planner"] = app.add_option("--planner", planner, "vulcanfs | vulcan | oracle | penalty-sweep");
            opts["replicates"] = app.add_option("--replicates", replicates, "seeded replicates (seed + index)");
            opts["budget"] = app.add_option("--budget", budget, "Vulcan budget: samples:N | seconds:S");
            opts["penalties"] = app.add_option("--m", penalties, "penalty range a:b:step for penalty-sweep");
        }
        opts["f"] = app.add_option("--f", f, "history functional: g | f1 (default f1)");
        opts["c"] = app.add_option("--c", c, "UCT exploration constant (default sqrt 2)");
        opts["seed"] = app.add_option("--seed", seed, "base seed");
        opts["grid"] = app.add_option("--grid", grid, "gp grid size WxH (default 6x6)");
        opts["out"] = app.add_option("--out", out, "output directory (else $VULCAN_OUTPUT_DIR, else ./results)");
        opts["threads"] = app.add_option("--threads", threads, "worker threads, 0 = all cores");
    }

    bool given(const std::string& name) const {
        const auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }

    h::RunConfig build(h::RunConfig c) const {
        if (given("config")) h::merge(c, h::read_json_file(config_path));
        if (given("domain")) c.domain = domain;
        if (given("preset")) c.preset = preset;
        if (given("horizon")) c.horizon = horizon;
        if (given("gamma")) c.gamma = gamma;
        if (given("delta")) c.delta = delta;
        if (given("planner")) c.planner = planner;
        if (given("f")) c.functional = f;
        if (given("budget")) c.budget = budget;
        if (given("c")) c.c = this->c;
        if (given("seed")) c.seed = seed;
        if (given("replicates")) c.replicates = replicates;
        if (given("penalties")) c.penalties = penalties;
        if (given("grid")) std::tie(c.grid_width, c.grid_height) = h::parse_grid(grid);
        if (given("threads")) c.threads = threads;
        if (given("out")) c.out = out;
        c.out = h::output_dir(c, given("out"));
        return c;
    }
};

void print(const h::CommandResult& r) {
    std::cout << r.summary.dump(2) << "\n";
    for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-bounded planning for chance-constrained MDPs"};
    app.set_version_flag("--version", vulcan::kVersion);
    app.require_subcommand(1);

    SharedFlags run_flags, fig2_flags, sweep_flags, conv_flags;
    auto* run = app.add_subcommand("run", "run a planner on a domain and write per-replicate JSON + summary CSV");
    run_flags.add(*run, true);

    auto* fig2 = app.add_subcommand("fig2", "penalty-method counterexample report on the three-action example model");
    fig2_flags.add(*fig2, false);
    std::string fig2_penalties = "0:300:1";
    fig2->add_option("--m", fig2_penalties, "penalty range a:b:step");

    auto* sweep = app.add_subcommand("sweep-alpha", "oracle vs vulcanfs over Linear(alpha) bounds");
    sweep_flags.add(*sweep, false);
    std::string alpha_range = "0.0005:0.003:0.000125";
    sweep->add_option("--alpha", alpha_range, "alpha range a:b:step");

    auto* conv = app.add_subcommand("convergence", "Vulcan error and policy match vs sample budget");
    conv_flags.add(*conv, false);
    std::string budgets = "1000,3000,10000,30000,100000";
    int conv_replicates = 60;
    conv->add_option("--budgets", budgets, "comma-separated sample budgets");
    conv->add_option("--replicates", conv_replicates, "seeded runs per budget");

    auto* verify = app.add_subcommand("verify", "randomized property suites; exit 4 on any failure");
    h::VerifyOptions vopt;
    std::string verify_out;
    bool verify_out_given = false;
    verify->add_option("--suite", vopt.suite, "all | lemma1 | lemma2 | theorem1 | counts | dominance");
    verify->add_option("--seed", vopt.seed, "base seed");
    verify->add_option("--instances", vopt.instances, "random instances per suite");
    std::string verify_budget = "samples:100000";
    verify->add_option("--budget", verify_budget, "Vulcan budget for theorem1 (samples:N)");
    verify->add_flag("--mutant-ser", vopt.mutant_ser, "use ser without its denominator (should fail lemma2)");
    verify->add_option("--threads", vopt.threads, "worker threads, 0 = all cores");
    auto* vout = verify->add_option("--out", verify_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : h::kExitConfig;
    }

    try {
        h::CommandResult result;
        if (run->parsed()) {
            const auto cfg = run_flags.build({});
            result = h::cmd_run(cfg, cfg.out);
        } else if (fig2->parsed()) {
            auto cfg = fig2_flags.build({});
            cfg.penalties = fig2_penalties;
            result = h::cmd_fig2(cfg, cfg.out);
        } else if (sweep->parsed()) {
            h::RunConfig base;
            base.horizon = 4;
            auto cfg = sweep_flags.build(base);
            result = h::cmd_sweep_alpha(cfg, h::parse_range(alpha_range), cfg.out);
        } else if (conv->parsed()) {
            h::RunConfig base;
            base.horizon = 5;
            auto cfg = conv_flags.build(base);
            result = h::cmd_convergence(cfg, h::parse_budget_list(budgets), conv_replicates, cfg.out);
        } else if (verify->parsed()) {
            const auto b = vulcan::SampleBudget::parse(verify_budget);
            if (b.mode != vulcan::SampleBudget::Mode::Samples) throw vulcan::InvalidConfig("verify takes samples:N");
            vopt.budget = static_cast<std::uint64_t>(b.limit);
            verify_out_given = vout->count() > 0;
            h::RunConfig dummy;
            dummy.out = verify_out_given ? verify_out : dummy.out;
            result = h::cmd_verify(vopt, h::output_dir(dummy, verify_out_given));
        }
        print(result);
        return result.exit_code;
    } catch (const vulcan::InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return h::kExitConfig;
    } catch (const vulcan::NoSolution& e) {
        std::cerr << "no solution: " << e.what() << "\n";
        return h::kExitNoSolution;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return h::kExitInternal;
    }
}

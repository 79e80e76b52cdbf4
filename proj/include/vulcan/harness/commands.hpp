#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vulcan/errors.hpp"
#include "vulcan/harness/config.hpp"
#include "vulcan/harness/instances.hpp"
#include "vulcan/harness/pool.hpp"
#include "vulcan/harness/records.hpp"
#include "vulcan/oracle.hpp"
#include "vulcan/planners/forward_search.hpp"
#include "vulcan/planners/mcts.hpp"
#include "vulcan/risk.hpp"
#include "vulcan/version.hpp"

namespace vulcan::harness {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitNoSolution = 3,
    kExitVerification = 4,
};

/// Tolerance of the harness-level check er <= Delta(E[g]).
inline constexpr double kFeasibilityTolerance = 1e-9;

struct CommandResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
    Json summary;
};

inline Json record_header(const RunConfig& c, const std::string& command) {
    Json j{{"schema_version", kSchemaVersion}, {"library_version", kVersion}, {"command", command}};
    j["config"] = to_json(c);
    Json meta{{"gamma", c.gamma},
              {"exploration_constant", c.c},
              {"rng", "mt19937_64; replicate i uses seed + i"}};
    if (c.domain == "bandit") meta["end_reward_convention"] = "undiscounted lump at the transition";
    j["metadata"] = std::move(meta);
    return j;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// run

struct ReplicateOutcome {
    Json record;
    std::vector<std::string> row;
    bool solved = false;
    bool infeasible = false;  ///< complete policy failed the exact feasibility check
};

inline std::vector<std::string> run_csv_header() {
    return {"replicate", "seed",        "domain",          "planner",        "horizon", "delta",
            "f",         "budget",      "c",               "status",         "root_value", "complete",
            "expected_reward", "execution_risk", "bound", "feasible",       "seconds", "samples",
            "deletions", "nodes",       "explored_histories"};
}

template <CcmdpModel M>
ReplicateOutcome run_replicate(const M& model, const RunConfig& cfg, std::size_t index) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = cfg.seed + index;
    std::string status = "no_solution";
    std::optional<double> root_value;
    bool complete = false;
    PolicyTree policy;
    policy.horizon = model.horizon();
    Json stats = Json::object();
    const Functional f = parse_functional(cfg.functional);

    if (cfg.planner == "vulcanfs") {
        ForwardSearchOptions o;
        o.functional = f;
        auto r = vulcanfs(model, o);
        if (r.has_solution()) status = "solved";
        root_value = r.root_value;
        complete = r.has_solution();
        policy = std::move(r.policy);
        stats["explored_histories"] = r.explored_history_count;
    } else if (cfg.planner == "vulcan") {
        VulcanOptions o;
        o.functional = f;
        o.budget = SampleBudget::parse(cfg.budget);
        o.exploration = cfg.c;
        o.seed = seed;
        auto r = run_vulcan(model, o);
        status = r.status == VulcanResult::Status::Solved       ? "solved"
                 : r.status == VulcanResult::Status::NoSolution ? "no_solution"
                                                                : "empty";
        root_value = r.root_value;
        complete = r.complete;
        policy = std::move(r.policy);
        stats = Json{{"samples", r.stats.samples},
                     {"deletions", r.stats.deletions},
                     {"max_depth", r.stats.max_depth},
                     {"nodes", r.stats.nodes},
                     {"search_seconds", r.stats.seconds}};
    } else if (cfg.planner == "oracle") {
        if (auto r = optimal_policy(model)) {
            status = "solved";
            root_value = r->evaluation.expected_reward;
            complete = true;
            policy = std::move(r->policy);
        }
    } else {
        throw InvalidConfig("planner '" + cfg.planner + "' does not produce replicates");
    }

    ReplicateOutcome out;
    out.solved = status == "solved";
    Json rec = record_header(cfg, "run");
    rec["replicate"] = index;
    rec["seed"] = seed;
    rec["status"] = status;
    rec["root_value"] = number_or_null(root_value);
    rec["complete"] = complete;
    std::optional<PolicyEvaluation> evaluation;
    if (out.solved && complete) {
        evaluation = evaluate_policy(model, policy);
        out.infeasible = evaluation->execution_risk > evaluation->bound + kFeasibilityTolerance;
        rec["evaluation"] = evaluation_json(*evaluation);
        rec["feasibility_check"] = out.infeasible ? "fail" : "pass";
    } else {
        rec["evaluation"] = nullptr;
        rec["feasibility_check"] = out.solved ? "skipped: incomplete policy" : "skipped: no policy";
    }
    rec["policy"] = out.solved ? policy_json(model, policy) : Json(nullptr);
    const double seconds = seconds_since(start);
    rec["timing"] = Json{{"seconds", seconds}};
    rec["stats"] = stats;

    auto stat = [&](const char* key) { return stats.contains(key) ? stats[key].dump() : std::string(); };
    out.row = {std::to_string(index),
               std::to_string(seed),
               cfg.domain,
               cfg.planner,
               std::to_string(model.horizon()),
               cfg.delta,
               cfg.functional,
               cfg.budget,
               format_number(cfg.c),
               status,
               root_value ? format_number(*root_value) : "",
               complete ? "true" : "false",
               evaluation ? format_number(evaluation->expected_reward) : "",
               evaluation ? format_number(evaluation->execution_risk) : "",
               evaluation ? format_number(evaluation->bound) : "",
               evaluation ? (evaluation->feasible ? "true" : "false") : "",
               format_number(seconds),
               stat("samples"),
               stat("deletions"),
               stat("nodes"),
               stat("explored_histories")};
    out.record = std::move(rec);
    return out;
}

// ---------------------------------------------------------------------------
// penalty method

struct PenaltyRow {
    double penalty = 0.0;
    Action root_action;
    std::string action_name;
    PolicyEvaluation evaluation;
};

struct PenaltyReport {
    std::vector<PenaltyRow> rows;
    std::vector<std::string> never_selected;  ///< root actions no penalty selects
    std::optional<std::string> optimal_action;
    std::optional<std::string> vulcanfs_action;
};

template <CcmdpModel M>
PenaltyReport penalty_report(const M& model, const std::vector<double>& penalties, Functional f) {
    PenaltyReport report;
    std::set<Action> seen;
    for (auto& s : penalty_sweep(model, penalties)) {
        PenaltyRow row;
        row.penalty = s.penalty;
        row.root_action = s.policy.root.action.value_or(Action{-1});
        row.action_name = s.policy.root.action ? action_label(model, row.root_action) : "";
        row.evaluation = evaluate_policy(model, s.policy);
        seen.insert(row.root_action);
        report.rows.push_back(std::move(row));
    }
    const auto root = root_history(model);
    if (root.t() < model.horizon()) {
        for (Action a : model.actions(root)) {
            if (!seen.contains(a)) report.never_selected.push_back(action_label(model, a));
        }
    }
    if (auto opt = optimal_policy(model); opt && opt->policy.root.action) {
        report.optimal_action = action_label(model, *opt->policy.root.action);
    }
    if (auto fs = vulcanfs(model, f); fs.has_solution() && fs.policy.root.action) {
        report.vulcanfs_action = action_label(model, *fs.policy.root.action);
    }
    return report;
}

/// Maximal runs of consecutive penalties choosing the same root action.
inline Json penalty_intervals(const PenaltyReport& r) {
    Json out = Json::array();
    for (std::size_t i = 0; i < r.rows.size();) {
        std::size_t j = i;
        while (j + 1 < r.rows.size() && r.rows[j + 1].root_action == r.rows[i].root_action) ++j;
        out.push_back(Json{{"action", r.rows[i].action_name},
                           {"from", r.rows[i].penalty},
                           {"to", r.rows[j].penalty}});
        i = j + 1;
    }
    return out;
}

inline CsvTable penalty_table(const PenaltyReport& r) {
    CsvTable t({"M", "root_action", "action_name", "expected_reward", "execution_risk", "bound", "feasible"});
    for (const auto& row : r.rows) {
        t.add({format_number(row.penalty), std::to_string(row.root_action.id), row.action_name,
               format_number(row.evaluation.expected_reward), format_number(row.evaluation.execution_risk),
               format_number(row.evaluation.bound), row.evaluation.feasible ? "true" : "false"});
    }
    return t;
}

inline Json penalty_json(const PenaltyReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        rows.push_back(Json{{"M", row.penalty},
                            {"root_action", row.root_action.id},
                            {"action_name", row.action_name},
                            {"evaluation", evaluation_json(row.evaluation)}});
    }
    Json j;
    j["penalty_sweep"] = std::move(rows);
    j["intervals"] = penalty_intervals(r);
    j["never_selected"] = r.never_selected;
    j["optimal_action"] = r.optimal_action ? Json(*r.optimal_action) : Json(nullptr);
    j["vulcanfs_action"] = r.vulcanfs_action ? Json(*r.vulcanfs_action) : Json(nullptr);
    Json report = Json::array();
    for (const auto& name : r.never_selected) report.push_back(name + " never optimal");
    j["report"] = std::move(report);
    return j;
}

inline CommandResult write_penalty_report(const RunConfig& cfg, const std::string& command,
                                          const std::filesystem::path& dir, const std::string& stem) {
    const auto penalties = parse_range(cfg.penalties);
    const auto report = with_model(cfg, [&](const auto& model) {
        return penalty_report(model, penalties, parse_functional(cfg.functional));
    });
    Json j = record_header(cfg, command);
    j.update(penalty_json(report));
    CommandResult result;
    result.files = {dir / (stem + ".json"), dir / (stem + ".csv")};
    write_json(result.files[0], j);
    write_text(result.files[1], penalty_table(report).str());
    result.summary = Json{{"never_selected", j["never_selected"]},
                          {"intervals", j["intervals"]},
                          {"optimal_action", j["optimal_action"]},
                          {"vulcanfs_action", j["vulcanfs_action"]},
                          {"report", j["report"]}};
    return result;
}

/**
 * Runs the configured planner for every replicate, writes one JSON record per
 * replicate and a summary CSV. Exit code 4 if a complete policy fails the
 * exact feasibility check, 3 if any replicate found no policy.
 */
inline CommandResult cmd_run(RunConfig cfg, const std::filesystem::path& dir) {
    cfg = resolve(cfg);
    const std::string stem = "run-" + cfg.domain + "-" + cfg.planner;
    if (cfg.planner == "penalty-sweep") return write_penalty_report(cfg, "run", dir, stem);

    const auto outcomes = with_model(cfg, [&](const auto& model) {
        return parallel_map<ReplicateOutcome>(static_cast<std::size_t>(cfg.replicates), cfg.threads,
                                              [&](std::size_t i) { return run_replicate(model, cfg, i); });
    });
    CommandResult result;
    CsvTable table(run_csv_header());
    bool any_infeasible = false, any_unsolved = false;
    Json rows = Json::array();
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        char name[32];
        std::snprintf(name, sizeof name, "-%04zu.json", i);
        result.files.push_back(dir / (stem + name));
        write_json(result.files.back(), o.record);
        table.add(o.row);
        any_infeasible = any_infeasible || o.infeasible;
        any_unsolved = any_unsolved || !o.solved;
        rows.push_back(Json{{"replicate", i},
                            {"status", o.record["status"]},
                            {"root_value", o.record["root_value"]},
                            {"complete", o.record["complete"]},
                            {"feasibility_check", o.record["feasibility_check"]}});
    }
    result.files.push_back(dir / (stem + "-summary.csv"));
    write_text(result.files.back(), table.str());
    result.summary = Json{{"replicates", std::move(rows)}};
    result.exit_code = any_infeasible ? kExitVerification : any_unsolved ? kExitNoSolution : kExitOk;
    return result;
}

/// Penalty-method counterexample report on the two-level example MDP.
inline CommandResult cmd_fig2(RunConfig cfg, const std::filesystem::path& dir) {
    cfg.domain = "fig2";
    cfg.horizon = 1;
    cfg = resolve(cfg);
    return write_penalty_report(cfg, "fig2", dir, "fig2");
}

// ---------------------------------------------------------------------------
// verify

struct SuiteReport {
    std::string suite;
    std::size_t instances = 0;
    std::size_t checks = 0;
    std::size_t failures = 0;
    double max_residual = 0.0;
    std::vector<std::string> notes;

    bool passed() const { return failures == 0 && checks > 0; }
};

struct VerifyOptions {
    std::string suite = "all";  ///< all | lemma1 | lemma2 | theorem1 | counts | dominance
    std::uint64_t seed = 0;
    int instances = 100;
    std::uint64_t budget = 100'000;  ///< Vulcan samples for theorem1
    bool mutant_ser = false;         ///< replace ser by 1 - prod(1 - r) to show the suites can fail
    double tolerance = 1e-9;
    int threads = 0;
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"lemma1", "lemma2", "theorem1", "counts", "dominance"};
    return names;
}

namespace detail {

struct InstanceCheck {
    std::size_t checks = 0;
    std::size_t failures = 0;
    double max_residual = 0.0;
    std::vector<std::string> notes;

    void record(double residual, double tolerance, const std::string& what) {
        ++checks;
        max_residual = std::max(max_residual, residual);
        if (!(residual <= tolerance)) {
            ++failures;
            if (notes.size() < 5) notes.push_back(what + " residual " + format_number(residual));
        }
    }
};

inline double mutant_ser(std::span<const double> risks) {
    double survival = 1.0;
    for (double r : risks) survival *= 1.0 - r;
    return 1.0 - survival;
}

template <CcmdpModel M>
void for_each_policy_history(const M& model, const PolicyNode& node, const History<StateOf<M>>& h,
                             const std::function<void(const PolicyNode&, const History<StateOf<M>>&)>& fn) {
    fn(node, h);
    if (h.t() >= model.horizon() || !node.action) return;
    const auto outs = model.outcomes(h, *node.action);
    for (std::size_t i = 0; i < outs.safe.size() && i < node.children.size(); ++i) {
        for_each_policy_history(model, node.children[i], h.then(*node.action, static_cast<int>(i), outs), fn);
    }
}

inline InstanceCheck check_instance(const std::string& suite, const VerifyOptions& opt, std::size_t index) {
    const auto model = verification_instance(opt.seed, index);
    const std::string tag = "instance " + std::to_string(index);
    InstanceCheck c;
    Rng rng = Rng::stream(opt.seed ^ 0x9e3779b97f4a7c15ULL, index);
    if (suite == "lemma1" || suite == "lemma2") {
        for (int k = 0; k < 3; ++k) {
            const auto policy = random_policy(model, rng);
            for_each_policy_history(model, policy.root, root_history(model), [&](const PolicyNode& node, const auto& h) {
                if (suite == "lemma1") {
                    c.record(std::abs(lemma1_sum(model, node, h, 500) - 1.0), opt.tolerance, tag + " " + h.key());
                } else {
                    const double er = execution_risk_exact(model, node, h);
                    const double e = opt.mutant_ser ? ser_expectation(model, node, h, mutant_ser, 500)
                                                    : ser_expectation(model, node, h, 500);
                    c.record(std::abs(e - er), opt.tolerance, tag + " " + h.key());
                }
            });
        }
    } else if (suite == "theorem1") {
        auto check = [&](const PolicyTree& p, const char* who) {
            const auto ev = evaluate_policy(model, p);
            c.record(std::max(0.0, ev.execution_risk - ev.bound), opt.tolerance, tag + " " + who);
        };
        if (auto fs = vulcanfs(model, Functional::F1); fs.has_solution()) check(fs.policy, "vulcanfs");
        VulcanOptions o;
        o.budget = SampleBudget::samples(opt.budget);
        o.seed = opt.seed + index;
        if (auto v = run_vulcan(model, o); v.complete) check(v.policy, "vulcan");
    } else if (suite == "counts") {
        VulcanOptions o;
        o.seed = opt.seed + index;
        VulcanPlanner<domains::RandomCcmdp> planner(model, o);
        const std::uint64_t samples = 200 + rng.below(2000);
        bool alive = true;
        for (std::uint64_t s = 0; s < samples && alive; ++s) {
            alive = planner.sample_once();
            c.record(static_cast<double>(planner.count_inconsistencies()), 0.0, tag + " sample " + std::to_string(s));
        }
        if (alive) {
            planner.cleanup();
            c.record(static_cast<double>(planner.count_inconsistencies()), 0.0, tag + " cleanup");
        }
    } else if (suite == "dominance") {
        const auto fs = vulcanfs(model, Functional::F1);
        const auto opt_policy = optimal_policy(model);
        if (fs.has_solution()) {
            const double best = opt_policy ? opt_policy->evaluation.expected_reward
                                           : -std::numeric_limits<double>::infinity();
            c.record(std::max(0.0, *fs.root_value - best), opt.tolerance, tag + " oracle >= vulcanfs");
        }
        if (count_policies(model, 2e4) <= 2e4) {
            double best = -std::numeric_limits<double>::infinity();
            bool any = false;
            for (const auto& p : enumerate_policies(model, 20'000)) {
                const auto ev = evaluate_policy(model, p);
                if (ev.feasible) {
                    best = std::max(best, ev.expected_reward);
                    any = true;
                }
            }
            const bool frontier_any = opt_policy.has_value();
            c.record(any == frontier_any ? 0.0 : 1.0, 0.0, tag + " feasibility agreement");
            if (any && frontier_any) {
                c.record(std::abs(best - opt_policy->evaluation.expected_reward), opt.tolerance,
                         tag + " frontier optimum vs enumeration");
            }
        }
    } else {
        throw InvalidConfig("unknown verification suite '" + suite + "'");
    }
    return c;
}

}  // namespace detail

inline SuiteReport run_suite(const std::string& suite, const VerifyOptions& opt) {
    if (opt.instances < 1) throw InvalidConfig("instance count must be positive");
    const auto n = static_cast<std::size_t>(opt.instances);
    const auto checks = parallel_map<detail::InstanceCheck>(
        n, opt.threads, [&](std::size_t i) { return detail::check_instance(suite, opt, i); });
    SuiteReport r;
    r.suite = suite;
    r.instances = n;
    for (const auto& c : checks) {
        r.checks += c.checks;
        r.failures += c.failures;
        r.max_residual = std::max(r.max_residual, c.max_residual);
        for (const auto& note : c.notes) {
            if (r.notes.size() < 10) r.notes.push_back(note);
        }
    }
    return r;
}

inline std::vector<SuiteReport> run_verification(const VerifyOptions& opt) {
    std::vector<SuiteReport> out;
    if (opt.suite == "all") {
        for (const auto& s : suite_names()) out.push_back(run_suite(s, opt));
    } else {
        out.push_back(run_suite(opt.suite, opt));
    }
    return out;
}

inline CommandResult cmd_verify(const VerifyOptions& opt, const std::filesystem::path& dir) {
    if (opt.suite != "all" &&
        std::find(suite_names().begin(), suite_names().end(), opt.suite) == suite_names().end()) {
        throw InvalidConfig("unknown verification suite '" + opt.suite + "'");
    }
    const auto reports = run_verification(opt);
    CsvTable table({"suite", "instances", "checks", "failures", "max_residual", "pass"});
    Json suites = Json::array();
    bool ok = true;
    for (const auto& r : reports) {
        ok = ok && r.passed();
        table.add({r.suite, std::to_string(r.instances), std::to_string(r.checks), std::to_string(r.failures),
                   format_number(r.max_residual), r.passed() ? "true" : "false"});
        suites.push_back(Json{{"suite", r.suite},
                              {"instances", r.instances},
                              {"checks", r.checks},
                              {"failures", r.failures},
                              {"max_residual", r.max_residual},
                              {"pass", r.passed()},
                              {"notes", r.notes}});
    }
    Json j{{"schema_version", kSchemaVersion}, {"library_version", kVersion}, {"command", "verify"}};
    j["options"] = Json{{"suite", opt.suite},       {"seed", opt.seed},
                        {"instances", opt.instances}, {"budget", "samples:" + std::to_string(opt.budget)},
                        {"mutant_ser", opt.mutant_ser}, {"tolerance", opt.tolerance}};
    j["suites"] = suites;
    CommandResult result;
    result.files = {dir / "verify.json", dir / "verify.csv"};
    write_json(result.files[0], j);
    write_text(result.files[1], table.str());
    result.summary = Json{{"suites", suites}};
    result.exit_code = ok ? kExitOk : kExitVerification;
    return result;
}

// ---------------------------------------------------------------------------
// sweep-alpha

struct AlphaRow {
    double alpha = 0.0;
    std::string status = "ok";  ///< ok | no_solution | budget_exceeded
    double optimal = 0.0;
    double vulcanfs = 0.0;
    double optimal_risk = 0.0;
    double vulcanfs_risk = 0.0;

    double suboptimality_pct() const { return optimal > 0.0 ? 100.0 * (optimal - vulcanfs) / optimal : 0.0; }
};

struct AlphaSweep {
    std::vector<AlphaRow> rows;

    /// Rows whose suboptimality exceeds `eps` percent.
    std::vector<const AlphaRow*> nonzero(double eps = 1e-9) const {
        std::vector<const AlphaRow*> out;
        for (const auto& r : rows) {
            if (r.status == "ok" && r.suboptimality_pct() > eps) out.push_back(&r);
        }
        return out;
    }
    double mean_nonzero_pct() const {
        const auto nz = nonzero();
        if (nz.empty()) return 0.0;
        double s = 0.0;
        for (const auto* r : nz) s += r->suboptimality_pct();
        return s / static_cast<double>(nz.size());
    }
    bool endpoints_zero(double eps = 1e-9) const {
        return !rows.empty() && rows.front().status == "ok" && rows.back().status == "ok" &&
               rows.front().suboptimality_pct() <= eps && rows.back().suboptimality_pct() <= eps;
    }
    bool vulcanfs_nondecreasing(double eps = 1e-12) const {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].status == "ok" && rows[i - 1].status == "ok" && rows[i].vulcanfs < rows[i - 1].vulcanfs - eps) {
                return false;
            }
        }
        return true;
    }
    /// Number of distinct vulcanfs values (piecewise-constant steps).
    std::size_t vulcanfs_levels(double eps = 1e-12) const {
        std::size_t levels = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == 0 || std::abs(rows[i].vulcanfs - rows[i - 1].vulcanfs) > eps) ++levels;
        }
        return levels;
    }
};

/// Oracle optimum and vulcanfs value under Linear(alpha) for each alpha.
inline AlphaSweep alpha_sweep(RunConfig cfg, const std::vector<double>& alphas) {
    cfg = resolve(cfg);
    AlphaSweep sweep;
    sweep.rows = parallel_map<AlphaRow>(alphas.size(), cfg.threads, [&](std::size_t i) {
        RunConfig c = cfg;
        c.delta = RiskBound::linear(alphas[i]).to_string();
        AlphaRow row;
        row.alpha = alphas[i];
        try {
            with_model(c, [&](const auto& model) {
                const auto opt = optimal_policy(model);
                const auto fs = vulcanfs(model, parse_functional(c.functional));
                if (!opt || !fs.has_solution()) {
                    row.status = "no_solution";
                    return;
                }
                const auto ev = evaluate_policy(model, fs.policy);
                row.optimal = opt->evaluation.expected_reward;
                row.optimal_risk = opt->evaluation.execution_risk;
                row.vulcanfs = ev.expected_reward;
                row.vulcanfs_risk = ev.execution_risk;
            });
        } catch (const BudgetExceeded&) {
            row.status = "budget_exceeded";
        }
        return row;
    });
    return sweep;
}

inline CommandResult cmd_sweep_alpha(RunConfig cfg, const std::vector<double>& alphas,
                                     const std::filesystem::path& dir) {
    cfg = resolve(cfg);
    const auto sweep = alpha_sweep(cfg, alphas);
    CsvTable table({"alpha", "status", "optimal_expected_reward", "vulcanfs_expected_reward", "suboptimality_pct",
                    "optimal_execution_risk", "vulcanfs_execution_risk"});
    Json rows = Json::array();
    for (const auto& r : sweep.rows) {
        table.add({format_number(r.alpha), r.status, format_number(r.optimal), format_number(r.vulcanfs),
                   format_number(r.suboptimality_pct()), format_number(r.optimal_risk),
                   format_number(r.vulcanfs_risk)});
        rows.push_back(Json{{"alpha", r.alpha},
                            {"status", r.status},
                            {"optimal_expected_reward", r.optimal},
                            {"vulcanfs_expected_reward", r.vulcanfs},
                            {"suboptimality_pct", r.suboptimality_pct()}});
    }
    Json summary{{"endpoints_zero", sweep.endpoints_zero()},
                 {"nonzero_rows", sweep.nonzero().size()},
                 {"mean_nonzero_suboptimality_pct", sweep.mean_nonzero_pct()},
                 {"vulcanfs_nondecreasing", sweep.vulcanfs_nondecreasing()},
                 {"vulcanfs_levels", sweep.vulcanfs_levels()}};
    Json j = record_header(cfg, "sweep-alpha");
    j["rows"] = rows;
    j["summary"] = summary;
    CommandResult result;
    result.files = {dir / "sweep-alpha.json", dir / "sweep-alpha.csv"};
    write_json(result.files[0], j);
    write_text(result.files[1], table.str());
    result.summary = summary;
    return result;
}

// ---------------------------------------------------------------------------
// convergence

struct ConvergenceRow {
    std::uint64_t budget = 0;
    std::size_t replicates = 0;
    double mean_error = 0.0;  ///< mean |Q~(root) - V_fs| / |V_fs|; runs without a policy count as 1
    double stderr_error = 0.0;
    double policy_match_rate = 0.0;
    double root_action_match_rate = 0.0;
    double complete_rate = 0.0;
    double mean_seconds = 0.0;
};

struct ConvergenceTable {
    double reference_value = 0.0;
    std::vector<ConvergenceRow> rows;

    /// Each mean error is at most the previous one plus two combined standard errors.
    bool nonincreasing_within_noise() const {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double slack = 2.0 * std::hypot(rows[i].stderr_error, rows[i - 1].stderr_error);
            if (rows[i].mean_error > rows[i - 1].mean_error + slack) return false;
        }
        return true;
    }
};

inline ConvergenceTable convergence_table(RunConfig cfg, const std::vector<std::uint64_t>& budgets, int replicates) {
    cfg = resolve(cfg);
    if (replicates < 1) throw InvalidConfig("replicates must be positive");
    return with_model(cfg, [&](const auto& model) {
        const Functional f = parse_functional(cfg.functional);
        const auto fs = vulcanfs(model, f);
        if (!fs.has_solution()) throw NoSolution("vulcanfs found no policy, so there is no reference value");
        ConvergenceTable table;
        table.reference_value = *fs.root_value;
        const double scale = std::max(std::abs(table.reference_value), 1e-300);
        struct Run {
            double error;
            bool match, root_match, complete;
            double seconds;
        };
        for (std::uint64_t b : budgets) {
            const auto runs = parallel_map<Run>(static_cast<std::size_t>(replicates), cfg.threads, [&](std::size_t i) {
                VulcanOptions o;
                o.functional = f;
                o.budget = SampleBudget::samples(b);
                o.exploration = cfg.c;
                o.seed = cfg.seed + i;
                const auto r = run_vulcan(model, o);
                Run out{1.0, false, false, r.complete, r.stats.seconds};
                if (r.has_solution()) {
                    out.error = std::abs(*r.root_value - table.reference_value) / scale;
                    out.match = r.policy.same_decisions(fs.policy);
                    out.root_match = r.policy.root.action == fs.policy.root.action;
                }
                return out;
            });
            ConvergenceRow row;
            row.budget = b;
            row.replicates = runs.size();
            const double n = static_cast<double>(runs.size());
            for (const auto& r : runs) {
                row.mean_error += r.error / n;
                row.policy_match_rate += r.match / n;
                row.root_action_match_rate += r.root_match / n;
                row.complete_rate += r.complete / n;
                row.mean_seconds += r.seconds / n;
            }
            double var = 0.0;
            for (const auto& r : runs) var += (r.error - row.mean_error) * (r.error - row.mean_error);
            row.stderr_error = runs.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
            table.rows.push_back(row);
        }
        return table;
    });
}

inline CommandResult cmd_convergence(RunConfig cfg, const std::vector<std::uint64_t>& budgets, int replicates,
                                     const std::filesystem::path& dir) {
    cfg = resolve(cfg);
    const auto table = convergence_table(cfg, budgets, replicates);
    CsvTable csv({"budget", "replicates", "mean_relative_error", "stderr_relative_error", "policy_match_rate",
                  "root_action_match_rate", "complete_rate", "mean_seconds"});
    Json rows = Json::array();
    for (const auto& r : table.rows) {
        csv.add({std::to_string(r.budget), std::to_string(r.replicates), format_number(r.mean_error),
                 format_number(r.stderr_error), format_number(r.policy_match_rate),
                 format_number(r.root_action_match_rate), format_number(r.complete_rate),
                 format_number(r.mean_seconds)});
        rows.push_back(Json{{"budget", r.budget},
                            {"replicates", r.replicates},
                            {"mean_relative_error", r.mean_error},
                            {"stderr_relative_error", r.stderr_error},
                            {"policy_match_rate", r.policy_match_rate},
                            {"root_action_match_rate", r.root_action_match_rate},
                            {"complete_rate", r.complete_rate},
                            {"mean_seconds", r.mean_seconds}});
    }
    Json summary{{"reference_value", table.reference_value},
                 {"nonincreasing_within_noise", table.nonincreasing_within_noise()}};
    if (!table.rows.empty()) {
        summary["final_mean_relative_error"] = table.rows.back().mean_error;
        summary["final_policy_match_rate"] = table.rows.back().policy_match_rate;
    }
    Json j = record_header(cfg, "convergence");
    j["rows"] = rows;
    j["summary"] = summary;
    CommandResult result;
    result.files = {dir / "convergence.json", dir / "convergence.csv"};
    write_json(result.files[0], j);
    write_text(result.files[1], csv.str());
    result.summary = summary;
    return result;
}

}  // namespace vulcan::harness

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "vulcan/errors.hpp"
#include "vulcan/functionals.hpp"
#include "vulcan/planners/mcts.hpp"
#include "vulcan/risk_bound.hpp"

namespace vulcan::harness {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kOutputDirEnv = "VULCAN_OUTPUT_DIR";

/// Everything needed to reproduce one command invocation.
struct RunConfig {
    std::string domain = "bandit";  ///< bandit | fig2 | gp | random
    std::string preset = "table1";
    int horizon = 3;
    double gamma = 1.0;
    std::string delta;  ///< empty: domain default
    std::string planner = "vulcanfs";  ///< vulcanfs | vulcan | oracle | penalty-sweep
    std::string functional = "f1";
    std::string budget = "samples:10000";
    double c = std::numbers::sqrt2;
    std::uint64_t seed = 0;
    int replicates = 1;
    std::string out = "results";
    std::string penalties = "0:300:1";
    int grid_width = 6;
    int grid_height = 6;
    int threads = 0;  ///< 0: one per hardware thread
};

inline std::string default_delta(const std::string& domain) {
    if (domain == "bandit") return "linear:0.002";
    if (domain == "fig2") return "linear:0.004";
    if (domain == "gp") return "saturating:0.4,0.015,0.001";
    if (domain == "random") return "linear:0.005";
    throw InvalidConfig("unknown domain '" + domain + "'");
}

/// Fills derived defaults and rejects inconsistent settings.
inline RunConfig resolve(RunConfig c) {
    if (c.delta.empty()) c.delta = default_delta(c.domain);
    else default_delta(c.domain);
    c.delta = RiskBound::parse(c.delta).to_string();
    parse_functional(c.functional);
    c.budget = SampleBudget::parse(c.budget).to_string();
    if (c.planner != "vulcanfs" && c.planner != "vulcan" && c.planner != "oracle" && c.planner != "penalty-sweep") {
        throw InvalidConfig("unknown planner '" + c.planner + "'");
    }
    if (c.horizon < 0) throw InvalidConfig("horizon must be nonnegative");
    if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw InvalidConfig("gamma must lie in [0,1]");
    if (!(c.c >= 0.0)) throw InvalidConfig("exploration constant must be >= 0");
    if (c.replicates < 1) throw InvalidConfig("replicates must be positive");
    if (c.grid_width < 1 || c.grid_height < 1) throw InvalidConfig("grid must be at least 1x1");
    if (c.threads < 0) throw InvalidConfig("threads must be nonnegative");
    if (c.domain == "bandit" && c.preset != "table1") throw InvalidConfig("unknown bandit preset '" + c.preset + "'");
    return c;
}

inline Json to_json(const RunConfig& c) {
    return Json{
        {"domain", c.domain},       {"preset", c.preset},
        {"horizon", c.horizon},     {"gamma", c.gamma},
        {"delta", c.delta},         {"planner", c.planner},
        {"f", c.functional},        {"budget", c.budget},
        {"c", c.c},                 {"seed", c.seed},
        {"replicates", c.replicates}, {"out", c.out},
        {"penalties", c.penalties}, {"grid", std::to_string(c.grid_width) + "x" + std::to_string(c.grid_height)},
        {"threads", c.threads},
    };
}

/// "WxH" grid size.
inline std::pair<int, int> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    try {
        if (x != std::string::npos) {
            std::size_t a = 0, b = 0;
            const int w = std::stoi(text.substr(0, x), &a);
            const int h = std::stoi(text.substr(x + 1), &b);
            if (a == x && b == text.size() - x - 1) return {w, h};
        }
    } catch (const std::exception&) {
    }
    throw InvalidConfig("grid must look like 6x6, got '" + text + "'");
}

/// Applies the keys present in `j` on top of `c`; unknown keys are errors.
inline void merge(RunConfig& c, const Json& j) {
    if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "domain") c.domain = v.get<std::string>();
            else if (key == "preset") c.preset = v.get<std::string>();
            else if (key == "horizon") c.horizon = v.get<int>();
            else if (key == "gamma") c.gamma = v.get<double>();
            else if (key == "delta") c.delta = v.get<std::string>();
            else if (key == "planner") c.planner = v.get<std::string>();
            else if (key == "f") c.functional = v.get<std::string>();
            else if (key == "budget") c.budget = v.get<std::string>();
            else if (key == "c") c.c = v.get<double>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "replicates") c.replicates = v.get<int>();
            else if (key == "out") c.out = v.get<std::string>();
            else if (key == "penalties") c.penalties = v.get<std::string>();
            else if (key == "grid") std::tie(c.grid_width, c.grid_height) = parse_grid(v.get<std::string>());
            else if (key == "threads") c.threads = v.get<int>();
            else throw InvalidConfig("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("bad config value: ") + e.what());
    }
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file '" + path + "'");
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

/// Output directory: an explicit flag wins, then the environment, then the config value.
inline std::string output_dir(const RunConfig& c, bool flag_given) {
    if (flag_given) return c.out;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return c.out;
}

/// Inclusive "a:b:step" range; the step must be positive.
inline std::vector<double> parse_range(const std::string& text) {
    std::vector<double> parts;
    std::size_t pos = 0;
    try {
        while (pos <= text.size()) {
            const auto next = text.find(':', pos);
            const std::string piece = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            std::size_t used = 0;
            parts.push_back(std::stod(piece, &used));
            if (used != piece.size()) throw std::invalid_argument(piece);
            if (next == std::string::npos) break;
            pos = next + 1;
        }
    } catch (const std::exception&) {
        throw InvalidConfig("bad range '" + text + "'");
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
        throw InvalidConfig("range must be a:b:step with a <= b and step > 0, got '" + text + "'");
    }
    const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    std::vector<double> out;
    for (long i = 0; i < count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
    return out;
}

/// Comma-separated sample budgets, e.g. "1000,10000".
inline std::vector<std::uint64_t> parse_budget_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto next = text.find(',', pos);
        const std::string piece = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        const auto b = SampleBudget::parse(piece.find(':') == std::string::npos ? "samples:" + piece : piece);
        if (b.mode != SampleBudget::Mode::Samples) throw InvalidConfig("budget lists take sample counts");
        out.push_back(static_cast<std::uint64_t>(b.limit));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

}  // namespace vulcan::harness

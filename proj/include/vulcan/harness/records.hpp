#pragma once

#include <cmath>
#include <concepts>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vulcan/harness/config.hpp"
#include "vulcan/model.hpp"
#include "vulcan/oracle.hpp"
#include "vulcan/policy.hpp"

namespace vulcan::harness {

/// Shortest text that reads back to the same double.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline Json number_or_null(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

template <class M>
std::string action_label(const M& model, Action a) {
    if constexpr (requires { { model.action_name(a) } -> std::convertible_to<std::string>; }) {
        return model.action_name(a);
    } else {
        return std::to_string(a.id);
    }
}

namespace detail {

template <CcmdpModel M>
Json policy_json(const M& model, const PolicyNode& node, const std::string& key) {
    Json j{{"key", key}};
    if (!node.action) {
        j["action"] = nullptr;
        j["visits"] = node.visits;
        return j;
    }
    j["action"] = node.action->id;
    j["action_name"] = action_label(model, *node.action);
    j["q"] = node.value;
    j["visits"] = node.visits;
    Json children = Json::array();
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        const std::string prefix = key.empty() ? "" : key + ".";
        children.push_back(policy_json(model, node.children[i], prefix + std::to_string(node.action->id) + "." +
                                                                    std::to_string(i)));
    }
    j["children"] = std::move(children);
    return j;
}

}  // namespace detail

/// Nested policy tree; keys are "action.outcome" index paths from the root ("" at the root).
template <CcmdpModel M>
Json policy_json(const M& model, const PolicyTree& policy) {
    return detail::policy_json(model, policy.root, "");
}

inline Json evaluation_json(const PolicyEvaluation& e) {
    return Json{{"expected_reward", e.expected_reward},
                {"execution_risk", e.execution_risk},
                {"bound", e.bound},
                {"feasible", e.feasible}};
}

/// Minimal CSV table: fields with commas or quotes are quoted. A trailing
/// schema_version column is added to every table.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
        header_.push_back("schema_version");
    }

    void add(std::vector<std::string> row) {
        if (row.size() + 1 != header_.size()) throw Error("CSV row width does not match the header");
        row.push_back(std::to_string(kSchemaVersion));
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    std::string str() const {
        std::string out = line(header_);
        for (const auto& r : rows_) out += line(r);
        return out;
    }

private:
    static std::string quote(const std::string& field) {
        if (field.find_first_of(",\"\n") == std::string::npos) return field;
        std::string q = "\"";
        for (char ch : field) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + '"';
    }
    static std::string line(const std::vector<std::string>& fields) {
        std::string out;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += quote(fields[i]);
        }
        return out + '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Parses a table written by CsvTable (quoted fields supported).
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
        } else {
            field += ch;
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace vulcan::harness

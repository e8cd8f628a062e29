#pragma once

// Run configuration, verification suites and report serialization behind the
// command-line tool and the Python bindings.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spraylab/zoo.hpp"

namespace spraylab {

inline constexpr const char* kVersion = "0.3.0";

enum class OutputFormat { Text, Json };

struct RunConfig {
    std::string family = "flat";
    Params params;
    std::optional<std::string> file;
    std::vector<std::string> sigmas;  // empty: command default
    int points = 0;                  // 0: command default
    std::uint64_t seed = 1;
    int order = kDefaultOrder;
    std::optional<double> tol_global;
    std::map<std::string, double> tol_overrides;
    OutputFormat format = OutputFormat::Text;
    std::optional<std::string> out;
};

// "name" or "name:key=value,key=value".
void parse_spray_spec(const std::string& spec, RunConfig& cfg);
// "1e-6" or "row_id=1e-6".
void parse_tolerance(const std::string& spec, RunConfig& cfg);

SprayChart load_spray(const RunConfig& cfg);

enum class RowStatus { Pass, Fail, NotApplicable };
const char* to_string(RowStatus s);

struct Row {
    std::string id;
    std::string eq_tag;
    std::string quote;
    double tolerance = 0.0;
    int order = 0;  // spray-coefficient jet order the row needs
    RowStatus status = RowStatus::NotApplicable;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    int worst_point = -1;
    int evaluated = 0;
    std::string note;
};

struct Report {
    std::string command;
    nlohmann::json config;
    std::vector<Row> rows;
    nlohmann::json points = nlohmann::json::array();
    nlohmann::json extra = nlohmann::json::object();
    double seconds = 0.0;  // wall clock, kept out of the JSON document

    int failed() const;
    int exit_code() const { return failed() > 0 ? 1 : 0; }
};

std::string cmd_list();
nlohmann::json list_json();
Report cmd_evaluate(const RunConfig& cfg);
Report cmd_verify(const RunConfig& cfg);

// Canonical document: sorted keys, numbers with 17 significant digits.
nlohmann::json to_json(const Report& r);
std::string canonical_dump(const nlohmann::json& j);
std::string render_text(const Report& r);
std::string render(const Report& r, OutputFormat f);

// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace spraylab

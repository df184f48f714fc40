#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace bgf::config {

enum class ParamType { real, count, choice, real_list };

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::real;
    std::string default_value;
    std::vector<std::string> choices;  ///< allowed values for ParamType::choice
    std::string help;
};

using Value = std::variant<double, std::uint64_t, std::string, std::vector<double>>;

/// Parsed experiment configuration. Text form:
///
///   [experiment]
///   id = gf-cumulant
///   seed = 20240611
///   replicates = 20000
///   output_dir = out/gf-cumulant
///
///   [params]
///   p = 2.5
///   levels = 0.5, 1, 2
struct ExperimentConfig {
    std::string id;
    std::uint64_t master_seed = 1;
    std::size_t replicates = 1;
    std::string output_dir;
    std::map<std::string, Value> params;

    double real(const std::string& key) const;
    std::uint64_t count(const std::string& key) const;
    const std::string& choice(const std::string& key) const;
    const std::vector<double>& reals(const std::string& key) const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Raw sections of a key = value file; '#' and ';' start comments.
using Sections = std::map<std::string, std::map<std::string, std::string>>;
Sections parse_sections(const std::string& text);

/// Types every [params] entry against the schema, fills defaults and rejects unknown keys.
ExperimentConfig parse_config(const std::string& text, const std::vector<ParamSpec>& schema);
/// Reads only the id from the [experiment] section.
std::string peek_id(const std::string& text);

/// Lossless text form (reals printed in shortest round-trip form).
std::string to_text(const ExperimentConfig& c, const std::vector<ParamSpec>& schema);

/// Default configuration from a schema.
ExperimentConfig defaults(const std::string& id, const std::vector<ParamSpec>& schema, std::uint64_t seed,
                          std::size_t replicates);

Value parse_value(const ParamSpec& spec, const std::string& raw);
std::string format_value(const Value& v);
std::string format_real(double x);

std::string read_file(const std::string& path);

}  // namespace bgf::config

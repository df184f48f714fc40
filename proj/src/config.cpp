#include "bgf/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "bgf/errors.hpp"

namespace bgf::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& raw) {
    double x = 0.0;
    const auto s = trim(raw);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw ConfigError("'" + key + "': expected a real number, got '" + raw + "'");
    return x;
}

std::uint64_t to_count(const std::string& key, const std::string& raw) {
    const auto s = trim(raw);
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec == std::errc() && p == s.data() + s.size() && !s.empty()) return x;
    // allow 1e4-style counts when they are exact integers
    const double d = to_real(key, s);
    if (d < 0.0 || d != static_cast<double>(static_cast<std::uint64_t>(d)))
        throw ConfigError("'" + key + "': expected a nonnegative integer, got '" + raw + "'");
    return static_cast<std::uint64_t>(d);
}

}  // namespace

double ExperimentConfig::real(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end() || !std::holds_alternative<double>(it->second))
        throw ConfigError("missing real parameter '" + key + "'");
    return std::get<double>(it->second);
}

std::uint64_t ExperimentConfig::count(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end() || !std::holds_alternative<std::uint64_t>(it->second))
        throw ConfigError("missing count parameter '" + key + "'");
    return std::get<std::uint64_t>(it->second);
}

const std::string& ExperimentConfig::choice(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end() || !std::holds_alternative<std::string>(it->second))
        throw ConfigError("missing choice parameter '" + key + "'");
    return std::get<std::string>(it->second);
}

const std::vector<double>& ExperimentConfig::reals(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end() || !std::holds_alternative<std::vector<double>>(it->second))
        throw ConfigError("missing list parameter '" + key + "'");
    return std::get<std::vector<double>>(it->second);
}

Sections parse_sections(const std::string& text) {
    Sections out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (out.count(section)) throw ConfigError("duplicate section [" + section + "]");
            out[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside a section");
        const auto key = trim(line.substr(0, eq));
        if (out[section].count(key)) throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
        out[section][key] = trim(line.substr(eq + 1));
    }
    return out;
}

Value parse_value(const ParamSpec& spec, const std::string& raw) {
    switch (spec.type) {
        case ParamType::real: return to_real(spec.name, raw);
        case ParamType::count: return to_count(spec.name, raw);
        case ParamType::choice: {
            const auto v = trim(raw);
            if (std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end()) {
                std::string allowed;
                for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : ", ") + c;
                throw ConfigError("'" + spec.name + "': '" + v + "' is not one of {" + allowed + "}");
            }
            return v;
        }
        case ParamType::real_list: {
            std::vector<double> xs;
            std::istringstream in(raw);
            std::string item;
            while (std::getline(in, item, ','))
                if (!trim(item).empty()) xs.push_back(to_real(spec.name, item));
            return xs;
        }
    }
    throw ConfigError("unknown parameter type");
}

std::string format_real(double x) {
    char buf[40];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

std::string format_value(const Value& v) {
    if (auto d = std::get_if<double>(&v)) return format_real(*d);
    if (auto n = std::get_if<std::uint64_t>(&v)) return std::to_string(*n);
    if (auto s = std::get_if<std::string>(&v)) return *s;
    std::string out;
    for (double x : std::get<std::vector<double>>(v)) out += (out.empty() ? "" : ", ") + format_real(x);
    return out;
}

ExperimentConfig defaults(const std::string& id, const std::vector<ParamSpec>& schema, std::uint64_t seed,
                          std::size_t replicates) {
    ExperimentConfig c;
    c.id = id;
    c.master_seed = seed;
    c.replicates = replicates;
    for (const auto& p : schema) c.params[p.name] = parse_value(p, p.default_value);
    return c;
}

std::string peek_id(const std::string& text) {
    const auto sections = parse_sections(text);
    auto it = sections.find("experiment");
    if (it == sections.end() || !it->second.count("id")) throw ConfigError("config has no [experiment] id");
    return it->second.at("id");
}

ExperimentConfig parse_config(const std::string& text, const std::vector<ParamSpec>& schema) {
    const auto sections = parse_sections(text);
    for (const auto& [name, _] : sections)
        if (name != "experiment" && name != "params") throw ConfigError("unknown section [" + name + "]");
    ExperimentConfig c;
    auto exp = sections.find("experiment");
    if (exp == sections.end()) throw ConfigError("missing [experiment] section");
    for (const auto& [key, raw] : exp->second) {
        if (key == "id")
            c.id = raw;
        else if (key == "seed")
            c.master_seed = to_count(key, raw);
        else if (key == "replicates")
            c.replicates = to_count(key, raw);
        else if (key == "output_dir")
            c.output_dir = raw;
        else
            throw ConfigError("unknown key '" + key + "' in [experiment]");
    }
    if (c.id.empty()) throw ConfigError("missing experiment id");
    for (const auto& p : schema) c.params[p.name] = parse_value(p, p.default_value);
    auto par = sections.find("params");
    if (par != sections.end()) {
        for (const auto& [key, raw] : par->second) {
            auto spec = std::find_if(schema.begin(), schema.end(), [&](const ParamSpec& s) { return s.name == key; });
            if (spec == schema.end()) throw ConfigError("unknown parameter '" + key + "' for experiment " + c.id);
            c.params[key] = parse_value(*spec, raw);
        }
    }
    return c;
}

std::string to_text(const ExperimentConfig& c, const std::vector<ParamSpec>& schema) {
    std::ostringstream out;
    out << "[experiment]\n";
    out << "id = " << c.id << "\n";
    out << "seed = " << c.master_seed << "\n";
    out << "replicates = " << c.replicates << "\n";
    if (!c.output_dir.empty()) out << "output_dir = " << c.output_dir << "\n";
    out << "\n[params]\n";
    for (const auto& p : schema) {
        auto it = c.params.find(p.name);
        if (it == c.params.end()) continue;
        if (!p.help.empty()) out << "# " << p.help << "\n";
        out << p.name << " = " << format_value(it->second) << "\n";
    }
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace bgf::config

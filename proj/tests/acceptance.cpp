#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "bgf/config.hpp"
#include "bgf/errors.hpp"
#include "bgf/experiments.hpp"

using namespace bgf;
namespace fs = std::filesystem;

namespace {

std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::set<int> selected() {
    std::set<int> out;
    if (const char* env = std::getenv("BGF_ACCEPTANCE_ONLY")) {
        std::istringstream in(env);
        std::string item;
        while (std::getline(in, item, ',')) out.insert(std::stoi(item));
    }
    return out;
}

}  // namespace

int main() {
    const fs::path config_dir = BGF_CONFIG_DIR;
    if (!std::getenv("BGF_OUTPUT_ROOT")) ::setenv("BGF_OUTPUT_ROOT", "acceptance-out", 1);
    const auto only = selected();
    int failures = 0;
    for (const auto& spec : experiments::registry()) {
        if (spec.criterion == 0 || (!only.empty() && !only.count(spec.criterion))) continue;
        const fs::path path = config_dir / (spec.id + ".ini");
        std::string line = "criterion " + std::to_string(spec.criterion) + " " + spec.id + ": ";
        try {
            const auto c = fs::exists(path) ? experiments::load_config(config::read_file(path.string()))
                                            : experiments::default_config(spec.id);
            experiments::Report rep;
            const int code = experiments::run_experiment(c, &rep);
            std::string worst;
            for (const auto& g : rep.gates)
                if (!g.passed && worst.empty())
                    worst = g.name + " = " + short_num(g.value) + ", target " + short_num(g.target) + " +- " +
                            short_num(g.tolerance);
            if (spec.informational) {
                line += "INFO (not a gate)";
            } else if (code == 0) {
                line += "PASS (" + std::to_string(rep.gates.size()) + " gates)";
            } else {
                line += "FAIL (" + worst + ")";
                ++failures;
            }
            line += " [" + short_num(rep.wall_seconds) + " s]";
        } catch (const Error& e) {
            line += std::string("FAIL (error: ") + e.what() + ")";
            if (!spec.informational) ++failures;
        }
        std::cout << line << std::endl;
    }
    std::cout << (failures == 0 ? "all gated criteria pass" : std::to_string(failures) + " gated criteria fail")
              << std::endl;
    return failures == 0 ? 0 : 1;
}

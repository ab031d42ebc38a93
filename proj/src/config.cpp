#include "pitik/config.hpp"

#include "pitik/grid.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pitik {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw Error("config: key '" + key + "' expects a number, got '" + v + "'");
}

}  // namespace

const std::vector<std::string>& Config::known_keys() {
    static const std::vector<std::string> keys = {
        "domain.d", "domain.n",
        "operator.kind", "operator.decay_a", "operator.kernel_file", "operator.background",
        "source.family", "source.nu", "source.p", "source.scale", "source.seed", "source.omega_decay", "source.margin",
        "phi.family", "phi.C", "phi.kappa", "phi.p", "phi.tau_max",
        "penalty.kind", "penalty.u0_file", "penalty.box_lo", "penalty.box_hi",
        "fidelity.sigma",
        "solver.max_iterations", "solver.rel_tolerance", "solver.backtracking", "solver.acceleration",
        "experiment.t_grid", "experiment.replicates", "experiment.seed", "experiment.trim",
        "lepskii.r", "lepskii.tau", "lepskii.s",
        "concentration.s", "concentration.R", "concentration.J", "concentration.t_grid",
        "concentration.replicates", "concentration.rho_grid", "concentration.calibration",
        "simulate.t", "solve.alpha", "solve.points_file", "conjugate.s_grid",
        "output.dir",
    };
    return keys;
}

void Config::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw Error("config: unknown key '" + key + "'");
    kv_[key] = value;
}

Config Config::parse(std::istream& is) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config " + path);
    return parse(is);
}

std::optional<std::string> Config::raw(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return raw(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    auto v = raw(key);
    return v ? to_double(key, *v) : fallback;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    const double x = to_double(key, *v);
    if (x != static_cast<double>(static_cast<long long>(x))) throw Error("config: key '" + key + "' expects an integer");
    return static_cast<long long>(x);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw Error("config: key '" + key + "' expects a boolean");
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    if (out.empty()) throw Error("config: key '" + key + "' expects a comma-separated list");
    return out;
}

}  // namespace pitik

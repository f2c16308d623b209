#include "volind/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "volind/error.hpp"

namespace volind {

namespace {

struct KeyDefault {
    const char* key;
    const char* value;
};

// "auto" leaves the library default in place.
constexpr KeyDefault kKeys[] = {
    {"geometry.n", "64"},
    {"geometry.delta0", "desk"},
    {"geometry.delta1", "thin_shell"},
    {"geometry.desk_lambda", "0.33333333333333331"},
    {"geometry.shell_leak", "1e-6"},
    {"calibration.a_min", "1"},
    {"calibration.a_max", "auto"},
    {"calibration.b_min", "auto"},
    {"calibration.b_max", "auto"},
    {"calibration.kappa", "0.69314718055994529"},
    {"calibration.grid_size", "512"},
    {"calibration.check_grid", "256"},
    {"calibration.target", "cap_height"},
    {"calibration.target_a", "4"},
    {"calibration.target_b", "0"},
    {"calibration.cap_bend", "0.05"},
    {"calibration.quadratic_scale", "5"},
    {"calibration.tol_fit", "1e-8"},
    {"calibration.tol_pair", "1e-6"},
    {"calibration.max_newton", "100"},
    {"experiment.seed", "1"},
    {"experiment.N", "256"},
    {"experiment.M", "200"},
    {"experiment.distinguishers", "likelihood_ratio,max_radius"},
    {"experiment.volume_bodies", "200"},
    {"experiment.volume_samples", "10000"},
    {"experiment.max_attempts", "auto"},
    {"experiment.histogram_bins", "50"},
    {"diagnostics.enabled", "true"},
    {"diagnostics.density_bodies", "10000"},
    {"diagnostics.density_radii", "10"},
    {"diagnostics.mutual_pairs", "200"},
    {"diagnostics.mutual_samples", "500"},
    {"diagnostics.factorization_bodies", "100000"},
    {"output.dir", "out"},
};

bool known_key(const std::string& key) {
    return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyDefault& k) { return key == k.key; });
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected a non-negative integer, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    const std::uint64_t x = parse_u64(key, v);
    if (x > 1000000000ULL) throw ConfigError("config key " + key + ": value too large");
    return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string env_name(const std::string& key) {
    std::string out = "VOLIND_";
    for (char c : key) {
        out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    ConfigMap out;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config key '" + section + "' lies outside any section");
        for (const auto& [key, node] : body) {
            const std::string full = section + "." + key;
            if (!known_key(full)) throw ConfigError("unknown config key '" + full + "'");
            out[full] = trim(node.get_value<std::string>());
        }
    }
    return out;
}

ConfigMap read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_env_overrides(ConfigMap& raw) {
    for (const KeyDefault& k : kKeys) {
        if (const char* v = std::getenv(env_name(k.key).c_str())) raw[k.key] = trim(v);
    }
}

LoadedConfig resolve_config(const ConfigMap& raw_in) {
    ConfigMap raw;
    for (const KeyDefault& k : kKeys) raw[k.key] = k.value;
    for (const auto& [key, value] : raw_in) {
        if (!known_key(key)) throw ConfigError("unknown config key '" + key + "'");
        raw[key] = value;
    }
    auto num = [&](const char* key) { return parse_double(key, raw.at(key)); };
    auto is_auto = [&](const char* key) { return raw.at(key) == "auto"; };

    LoadedConfig lc;
    ExperimentConfig& e = lc.experiment;
    CalibrationConfig& c = e.calibration;

    c.n = parse_int("geometry.n", raw.at("geometry.n"));
    if (c.n < 3) throw ConfigError("geometry.n must be at least 3");
    const double n = c.n;
    c.target_a = num("calibration.target_a");
    c.target_b = num("calibration.target_b");

    const std::string d1 = raw.at("geometry.delta1");
    if (d1 == "paper") {
        c.delta1 = std::pow(n, -0.99);
    } else if (d1 == "thin_shell") {
        const double leak = num("geometry.shell_leak");
        if (!(leak > 0.0 && leak < 1.0)) throw ConfigError("geometry.shell_leak must lie in (0, 1)");
        c.delta1 = std::min(0.4, std::max(std::pow(n, -0.99), -std::expm1(std::log(leak) / n)));
    } else {
        c.delta1 = parse_double("geometry.delta1", d1);
    }
    const std::string d0 = raw.at("geometry.delta0");
    if (d0 == "paper") {
        c.delta0 = std::pow(n, -0.25);
    } else if (d0 == "desk") {
        const double lambda = num("geometry.desk_lambda");
        if (!(lambda > 0.0)) throw ConfigError("geometry.desk_lambda must be positive");
        c.delta0 = std::sqrt(lambda / (n * c.delta1 * c.target_a));
    } else {
        c.delta0 = parse_double("geometry.delta0", d0);
    }

    c.a_min = num("calibration.a_min");
    if (!is_auto("calibration.a_max")) c.a_max = num("calibration.a_max");
    if (is_auto("calibration.b_min") != is_auto("calibration.b_max")) {
        throw ConfigError("calibration.b_min and calibration.b_max must both be set or both be auto");
    }
    if (!is_auto("calibration.b_min")) {
        c.b_min = num("calibration.b_min");
        c.b_max = num("calibration.b_max");
    }
    c.kappa = num("calibration.kappa");
    c.grid_size = parse_int("calibration.grid_size", raw.at("calibration.grid_size"));
    c.check_grid = parse_int("calibration.check_grid", raw.at("calibration.check_grid"));
    const std::string target = raw.at("calibration.target");
    if (target == "cap_height") {
        c.target = TargetShape::cap_height;
    } else if (target == "quadratic") {
        c.target = TargetShape::quadratic;
    } else {
        throw ConfigError("calibration.target must be cap_height or quadratic");
    }
    c.cap_bend = num("calibration.cap_bend");
    c.quadratic_scale = num("calibration.quadratic_scale");
    c.tol_fit = num("calibration.tol_fit");
    c.tol_pair = num("calibration.tol_pair");
    c.max_newton = parse_int("calibration.max_newton", raw.at("calibration.max_newton"));

    e.seed = parse_u64("experiment.seed", raw.at("experiment.seed"));
    e.N = parse_u64("experiment.N", raw.at("experiment.N"));
    e.M = parse_u64("experiment.M", raw.at("experiment.M"));
    e.distinguishers = split_list(raw.at("experiment.distinguishers"));
    e.volume_bodies = parse_u64("experiment.volume_bodies", raw.at("experiment.volume_bodies"));
    e.volume_samples = parse_u64("experiment.volume_samples", raw.at("experiment.volume_samples"));
    if (!is_auto("experiment.max_attempts")) {
        e.max_attempts = parse_u64("experiment.max_attempts", raw.at("experiment.max_attempts"));
    }
    e.histogram_bins = parse_int("experiment.histogram_bins", raw.at("experiment.histogram_bins"));

    DiagnosticsConfig& g = e.diagnostics;
    g.enabled = parse_bool("diagnostics.enabled", raw.at("diagnostics.enabled"));
    g.density_bodies = parse_u64("diagnostics.density_bodies", raw.at("diagnostics.density_bodies"));
    g.density_radii = parse_int("diagnostics.density_radii", raw.at("diagnostics.density_radii"));
    g.mutual_pairs = parse_u64("diagnostics.mutual_pairs", raw.at("diagnostics.mutual_pairs"));
    g.mutual_samples = parse_u64("diagnostics.mutual_samples", raw.at("diagnostics.mutual_samples"));
    g.factorization_bodies = parse_u64("diagnostics.factorization_bodies", raw.at("diagnostics.factorization_bodies"));

    lc.output_dir = raw.at("output.dir");

    try {
        validate(e);
    } catch (const DomainError& err) {
        throw ConfigError(err.what());
    }

    // Resolved numbers replace rule names so equivalent documents hash alike.
    ConfigMap& eff = lc.effective;
    eff = raw;
    eff.erase("output.dir");
    eff["geometry.delta0"] = format_double(c.delta0);
    eff["geometry.delta1"] = format_double(c.delta1);
    for (const char* key : {"geometry.desk_lambda", "geometry.shell_leak", "calibration.a_min", "calibration.kappa",
                            "calibration.target_a", "calibration.target_b", "calibration.cap_bend",
                            "calibration.quadratic_scale", "calibration.tol_fit", "calibration.tol_pair"}) {
        eff[key] = format_double(num(key));
    }
    eff["calibration.a_max"] = format_double(c.resolved_a_max());
    eff["calibration.b_min"] = format_double(c.resolved_b_min());
    eff["calibration.b_max"] = format_double(c.resolved_b_max());
    for (const char* key : {"geometry.n", "calibration.grid_size", "calibration.check_grid", "calibration.max_newton",
                            "experiment.seed", "experiment.N", "experiment.M", "experiment.volume_bodies",
                            "experiment.volume_samples", "experiment.histogram_bins", "diagnostics.density_bodies",
                            "diagnostics.density_radii", "diagnostics.mutual_pairs", "diagnostics.mutual_samples",
                            "diagnostics.factorization_bodies"}) {
        eff[key] = std::to_string(parse_u64(key, raw.at(key)));
    }
    eff["diagnostics.enabled"] = g.enabled ? "true" : "false";
    std::string list;
    for (const std::string& d : e.distinguishers) list += (list.empty() ? "" : ",") + d;
    eff["experiment.distinguishers"] = list;
    eff["experiment.max_attempts"] = e.max_attempts == 0 ? "auto" : std::to_string(e.max_attempts);
    lc.hash = sha256_hex(canonical_config(eff));
    return lc;
}

LoadedConfig load_config(const std::string& path, const ConfigMap& overrides) {
    ConfigMap raw = read_config_file(path);
    apply_env_overrides(raw);
    for (const auto& [k, v] : overrides) raw[k] = v;
    return resolve_config(raw);
}

std::string canonical_config(const ConfigMap& effective) {
    std::string out;
    for (const auto& [k, v] : effective) out += k + "=" + v + "\n";
    return out;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace volind

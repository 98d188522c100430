#include "wgreen/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "wgreen/errors.hpp"
#include "wgreen/parallel.hpp"

namespace wgreen::run {

namespace {

enum class ValueType { real, integer, word };

const std::map<std::string, ValueType>& known_keys() {
    static const std::map<std::string, ValueType> keys = {
        {"run", ValueType::word},
        {"threads", ValueType::integer},
        {"quad.tol", ValueType::real},
        {"profile.k", ValueType::real},
        {"profile.h", ValueType::real},
        {"profile.n_co", ValueType::real},
        {"profile.n_cl", ValueType::real},
        {"weight.a", ValueType::real},
        {"grid.src.x_min", ValueType::real},
        {"grid.src.x_max", ValueType::real},
        {"grid.src.nx", ValueType::integer},
        {"grid.src.z_min", ValueType::real},
        {"grid.src.z_max", ValueType::real},
        {"grid.src.nz", ValueType::integer},
        {"grid.out.x_min", ValueType::real},
        {"grid.out.x_max", ValueType::real},
        {"grid.out.nx", ValueType::integer},
        {"grid.out.z_min", ValueType::real},
        {"grid.out.z_max", ValueType::real},
        {"grid.out.nz", ValueType::integer},
        {"source.amplitude", ValueType::real},
        {"source.x0", ValueType::real},
        {"source.z0", ValueType::real},
        {"source.width", ValueType::real},
        {"map.S.amplitude", ValueType::real},
        {"map.S.center", ValueType::real},
        {"map.S.half_width", ValueType::real},
        {"map.T.amplitude", ValueType::real},
        {"map.T.center", ValueType::real},
        {"map.T.half_width", ValueType::real},
        {"map.eps", ValueType::real},
        {"map.eps0_fraction", ValueType::real},
        {"map.rhs_formula", ValueType::word},
        {"mode.parity", ValueType::word},
        {"mode.index", ValueType::integer},
        {"picard.max_iter", ValueType::integer},
        {"picard.tol", ValueType::real},
        {"probe.x", ValueType::real},
        {"probe.z", ValueType::real},
    };
    return keys;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a real number, got '" + value + "'");
    }
    if (pos != value.size() || !std::isfinite(v)) {
        throw ConfigError(key, "expected a finite real number, got '" + value + "'");
    }
    return v;
}

long parse_integer(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
    if (pos != value.size()) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
    return v;
}

} // namespace

Scenario Scenario::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open scenario file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Scenario Scenario::parse(const std::string& text) {
    Scenario sc;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool src_given = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = known_keys().find(key);
        if (it == known_keys().end()) throw ConfigError(key, "unknown key");
        if (value.empty()) throw ConfigError(key, "empty value");
        std::string canonical = value;
        if (it->second == ValueType::real) canonical = format_real(parse_real(key, value));
        if (it->second == ValueType::integer) {
            canonical = std::to_string(parse_integer(key, value));
        }
        if (!sc.kv_.emplace(key, canonical).second) {
            throw ConfigError(key, "duplicate key");
        }
    }

    auto get_real = [&](const char* key, double& slot) {
        const auto it = sc.kv_.find(key);
        if (it != sc.kv_.end()) slot = parse_real(key, it->second);
        return it != sc.kv_.end();
    };
    auto get_int = [&](const char* key, int& slot) {
        const auto it = sc.kv_.find(key);
        if (it != sc.kv_.end()) {
            const long v = parse_integer(key, it->second);
            slot = static_cast<int>(v);
        }
        return it != sc.kv_.end();
    };

    if (const auto it = sc.kv_.find("run"); it != sc.kv_.end()) {
        const std::string& v = it->second;
        if (v == "modes") sc.kind = RunKind::modes;
        else if (v == "green") sc.kind = RunKind::green_probe;
        else if (v == "field") sc.kind = RunKind::field;
        else if (v == "perturb") sc.kind = RunKind::perturb;
        else if (v == "picard") sc.kind = RunKind::picard;
        else if (v == "estimates") sc.kind = RunKind::estimates;
        else throw ConfigError("run", "expected one of modes|green|field|perturb|picard|estimates");
    } else {
        throw ConfigError("run", "missing run kind");
    }

    int threads = 0;
    if (get_int("threads", threads)) {
        if (threads < 0) throw ConfigError("threads", "must be >= 0");
        sc.threads = static_cast<unsigned>(threads);
    }
    get_real("quad.tol", sc.tol);
    if (!(sc.tol > 1e-12 && sc.tol < 1e-2)) {
        throw ConfigError("quad.tol", "must lie in (1e-12, 1e-2)");
    }

    get_real("profile.k", sc.k);
    get_real("profile.h", sc.h);
    get_real("profile.n_co", sc.n_co);
    get_real("profile.n_cl", sc.n_cl);
    try {
        (void)sc.profile();
    } catch (const DomainError& e) {
        throw ConfigError("profile", e.what());
    }

    get_real("weight.a", sc.weight_a);
    if (!(sc.weight_a > 1.0)) throw ConfigError("weight.a", "must exceed 1");

    auto load_grid = [&](const char* prefix, GridSpec& spec) {
        const std::string p(prefix);
        bool any = false;
        any |= get_real((p + ".x_min").c_str(), spec.x_min);
        any |= get_real((p + ".x_max").c_str(), spec.x_max);
        any |= get_int((p + ".nx").c_str(), spec.nx);
        any |= get_real((p + ".z_min").c_str(), spec.z_min);
        any |= get_real((p + ".z_max").c_str(), spec.z_max);
        any |= get_int((p + ".nz").c_str(), spec.nz);
        try {
            (void)spec.grid();
        } catch (const DomainError& e) {
            throw ConfigError(prefix, e.what());
        }
        return any;
    };
    src_given = load_grid("grid.src", sc.src_spec);
    (void)src_given;
    sc.out_given = load_grid("grid.out", sc.out_spec);
    if (!sc.out_given) {
        // Default observation grid: source grid staggered +dz/2.
        sc.out_spec = sc.src_spec;
        const double dz = sc.src_spec.grid().dz();
        sc.out_spec.z_min += 0.5 * dz;
        sc.out_spec.z_max += 0.5 * dz;
    }

    get_real("source.amplitude", sc.source_amplitude);
    get_real("source.x0", sc.source_x0);
    get_real("source.z0", sc.source_z0);
    get_real("source.width", sc.source_width);
    if (!(sc.source_width > 0.0)) throw ConfigError("source.width", "must be positive");

    sc.has_map = sc.kv_.count("map.S.amplitude") > 0 || sc.kv_.count("map.T.amplitude") > 0 ||
                 sc.kv_.count("map.eps") > 0 || sc.kv_.count("map.eps0_fraction") > 0;
    get_real("map.S.amplitude", sc.S.amplitude);
    get_real("map.S.center", sc.S.center);
    get_real("map.S.half_width", sc.S.half_width);
    get_real("map.T.amplitude", sc.T.amplitude);
    get_real("map.T.center", sc.T.center);
    get_real("map.T.half_width", sc.T.half_width);
    if (!(sc.S.half_width > 0.0)) throw ConfigError("map.S.half_width", "must be positive");
    if (!(sc.T.half_width > 0.0)) throw ConfigError("map.T.half_width", "must be positive");
    const bool eps_given = get_real("map.eps", sc.eps);
    const bool frac_given = get_real("map.eps0_fraction", sc.eps_fraction);
    if (eps_given && frac_given) {
        throw ConfigError("map.eps0_fraction", "give either map.eps or map.eps0_fraction");
    }
    sc.eps_is_fraction = frac_given;
    if (eps_given && !(sc.eps >= 0.0)) throw ConfigError("map.eps", "must be >= 0");
    if (frac_given && !(sc.eps_fraction > 0.0)) {
        throw ConfigError("map.eps0_fraction", "must be positive");
    }
    if (const auto it = sc.kv_.find("map.rhs_formula"); it != sc.kv_.end()) {
        if (it->second == "derived") sc.formula = perturb::RhsFormula::derived;
        else if (it->second == "ss_variant") sc.formula = perturb::RhsFormula::ss_variant;
        else throw ConfigError("map.rhs_formula", "expected derived|ss_variant");
    }
    if (sc.has_map && !sc.eps_is_fraction) {
        try {
            sc.pmap().require_invertible(sc.eps);
        } catch (const DomainError& e) {
            throw ConfigError("map.eps", e.what());
        }
    }

    if (const auto it = sc.kv_.find("mode.parity"); it != sc.kv_.end()) {
        if (it->second == "symmetric" || it->second == "s") {
            sc.mode_parity = modal::Parity::symmetric;
        } else if (it->second == "antisymmetric" || it->second == "a") {
            sc.mode_parity = modal::Parity::antisymmetric;
        } else {
            throw ConfigError("mode.parity", "expected symmetric|antisymmetric");
        }
    }
    get_int("mode.index", sc.mode_index);
    if (sc.mode_index < 1) throw ConfigError("mode.index", "must be >= 1");

    get_int("picard.max_iter", sc.picard_max_iter);
    if (sc.picard_max_iter < 1) throw ConfigError("picard.max_iter", "must be >= 1");
    get_real("picard.tol", sc.picard_tol);
    if (!(sc.picard_tol > 0.0)) throw ConfigError("picard.tol", "must be positive");

    get_real("probe.x", sc.probe_x);
    get_real("probe.z", sc.probe_z);

    // Cross-grid preconditions of the Green-integral runs, checked at load.
    if (sc.kind == RunKind::field || sc.kind == RunKind::perturb || sc.kind == RunKind::picard) {
        const field::Grid2D src = sc.src_spec.grid();
        const field::Grid2D out = sc.out_spec.grid();
        if (std::abs(out.dz() - src.dz()) > 1e-9 * src.dz()) {
            throw ConfigError("grid.out", "z spacing must match grid.src");
        }
        const double off = 2.0 * (out.z_min - src.z_min) / src.dz();
        const double rounded = std::round(off);
        if (std::abs(off - rounded) > 1e-9 ||
            (static_cast<long long>(rounded) & 1LL) == 0LL) {
            throw ConfigError("grid.out.z_min",
                              "must be offset an odd multiple of dz/2 from grid.src.z_min");
        }
    }
    if (sc.kind == RunKind::green_probe) {
        const field::Grid2D out = sc.out_spec.grid();
        const double rel = std::abs((sc.probe_z - out.z_min) / out.dz() -
                                    std::round((sc.probe_z - out.z_min) / out.dz()));
        if (rel < 1e-6) {
            throw ConfigError("probe.z", "probe must not lie on an observation z plane");
        }
    }

    return sc;
}

std::string Scenario::canonical_text() const {
    std::string out;
    for (const auto& [key, value] : kv_) {
        out += key;
        out += " = ";
        out += value;
        out += "\n";
    }
    return out;
}

std::string Scenario::hash_hex() const {
    const std::string text = canonical_text();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

modal::WaveguideProfile Scenario::profile() const {
    return modal::WaveguideProfile(k, h, n_co, n_cl);
}

estimates::WeightSpec Scenario::weight() const { return estimates::WeightSpec(weight_a); }

perturb::PerturbationMap Scenario::pmap() const {
    return perturb::PerturbationMap::product(S, T, formula);
}

unsigned Scenario::effective_threads() const {
    return threads == 0 ? default_threads() : threads;
}

} // namespace wgreen::run

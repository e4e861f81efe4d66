#pragma once

// Scenario configuration files (YAML).
//
// Top level: `scenario` (required), `seed` (optional) and one section per
// parameter group used by that scenario. Unknown keys and every broken
// invariant are collected with their key paths before anything runs.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <yaml-cpp/yaml.h>

#include "mcqed/cqed.hpp"
#include "mcqed/errors.hpp"
#include "mcqed/qops.hpp"

namespace mcqed::cli {

enum class ScenarioKind {
    evolve_majorana,
    evolve_dirac,
    validate_rwa,
    composite,
    measure_helicity,
    readout_spectrum,
    sweep
};

inline const std::map<std::string, ScenarioKind>& scenario_names() {
    static const std::map<std::string, ScenarioKind> names{
        {"evolve-majorana", ScenarioKind::evolve_majorana},
        {"evolve-dirac", ScenarioKind::evolve_dirac},
        {"validate-rwa", ScenarioKind::validate_rwa},
        {"composite", ScenarioKind::composite},
        {"measure-helicity", ScenarioKind::measure_helicity},
        {"readout-spectrum", ScenarioKind::readout_spectrum},
        {"sweep", ScenarioKind::sweep},
    };
    return names;
}

inline std::string to_string(ScenarioKind k) {
    for (const auto& [name, kind] : scenario_names()) {
        if (kind == k) return name;
    }
    return "?";
}

/// Subcommand that runs a scenario kind.
inline std::string subcommand_for(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::evolve_majorana:
    case ScenarioKind::evolve_dirac: return "evolve";
    case ScenarioKind::validate_rwa: return "validate-rwa";
    case ScenarioKind::composite: return "composite";
    case ScenarioKind::measure_helicity: return "measure-helicity";
    case ScenarioKind::readout_spectrum: return "readout";
    case ScenarioKind::sweep: return "sweep";
    }
    return "?";
}

class ConfigError : public ValidationError {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : ValidationError(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "invalid configuration:";
        for (const auto& x : p) s += "\n  " + x;
        return s;
    }
    std::vector<std::string> problems_;
};

// ---------------------------------------------------------------------------
// Parameter groups (defaults are the documented ones)

struct FieldSection {
    double m = 1.0;
    double c = 1.0;
    std::size_t n_points = 256;
    double length = 40.0;
};

struct PacketSection {
    double x0 = 0.0;
    double p0 = 1.0;
    double width = 2.0;
    Eigen::Vector2cd spinor{1.0, 0.0};
};

struct EvolveSection {
    double t_end = 10.0;
    std::size_t samples = 11;
    bool compare_oracle = false;
    double oracle_tolerance = 1e-10;
};

struct RwaSection {
    cqed::EffectiveKind kind = cqed::EffectiveKind::jc;
    double g = 0.05;
    double Omega = 1.0;
    double phi = 0.0;
    double longitudinal_ratio = 0.1;
    int n_max = 15;
    int qubit = 1;    // 0 = up, 1 = down
    int photons = 1;  // initial Fock number
    double horizon = kPi;  // in units of 1/g
    std::size_t samples = 201;
    double tolerance = 1e-9;
};

struct CompositeSection {
    // reference level scheme in GHz, g and the strong-drive splittings free
    double g = 0.0058;
    double Omega_3 = 5.0;
    double Omega_4 = 5.0;
    std::map<std::string, double> overrides;  // any SchemeParams field, GHz
    int n_max = 10;
    double periods = 1.0;  // exchange periods
    std::size_t samples = 101;
    double tolerance = 1e-8;
    std::vector<std::array<int, 2>> basis_states{{1, 1}, {0, 1}};
    std::vector<Eigen::Vector2cd> spinors{Eigen::Vector2cd(1.0, cplx(0.0, 1.0)) / std::sqrt(2.0)};
};

struct MeasureSection {
    std::size_t random_states = 0;  // 0: use the packet section
    std::vector<double> times{0.0, 1.0, 2.0, 3.0, 4.0};
    double step = 1e-3;
    int order = 2;
};

struct ReadoutSection {
    // all in MHz; angular values are 2 pi times these
    std::optional<double> g;
    double detuning_1 = 600.0;
    double detuning_2 = 300.0;
    double kappa = 6.25;
    double interval_1 = 29.6;
    double drive_detuning = 0.0;  // omega_r - omega_d
    double span = 60.0;
    std::size_t points = 601;
};

struct SweepSection {
    std::vector<cqed::EffectiveKind> kinds{cqed::EffectiveKind::jc, cqed::EffectiveKind::anti_jc,
                                           cqed::EffectiveKind::longitudinal};
    std::vector<double> ratios{0.2, 0.1, 0.05, 0.02};
    double Omega = 1.0;
    int n_max = 15;
    double horizon = kPi;
    std::size_t samples = 201;
    double tolerance = 1e-9;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::evolve_majorana;
    std::uint64_t seed = 0;
    FieldSection field;
    PacketSection packet;
    EvolveSection evolve;
    RwaSection rwa;
    CompositeSection composite;
    MeasureSection measure;
    ReadoutSection readout;
    SweepSection sweep;

    cqed::SchemeParams scheme() const;
};

inline const std::vector<std::string>& scheme_field_names() {
    static const std::vector<std::string> names{
        "omega_1", "omega_2", "omega_r1", "omega_r2", "omega_d1", "omega_d2", "omega_d3",
        "omega_d4", "phi_1", "phi_2", "phi_3", "phi_4", "Omega_1", "Omega_2", "Delta"};
    return names;
}

/// Reference scheme with overrides applied (frequencies in GHz -> rad/ns).
inline cqed::SchemeParams ScenarioConfig::scheme() const {
    auto s = cqed::reference_scheme(composite.g, composite.Omega_3, composite.Omega_4);
    const double w = 2.0 * kPi;
    std::map<std::string, double*> slot{
        {"omega_1", &s.omega_1}, {"omega_2", &s.omega_2},   {"omega_r1", &s.omega_r1},
        {"omega_r2", &s.omega_r2}, {"omega_d1", &s.omega_d1}, {"omega_d2", &s.omega_d2},
        {"omega_d3", &s.omega_d3}, {"omega_d4", &s.omega_d4}, {"phi_1", &s.phi_1},
        {"phi_2", &s.phi_2},     {"phi_3", &s.phi_3},       {"phi_4", &s.phi_4},
        {"Omega_1", &s.Omega_1}, {"Omega_2", &s.Omega_2},   {"Delta", &s.Delta}};
    for (const auto& [key, value] : composite.overrides) {
        const bool angle = key.rfind("phi_", 0) == 0;
        *slot.at(key) = angle ? value : w * value;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Reading

namespace detail {

class Section {
public:
    Section(YAML::Node node, std::string path, std::vector<std::string>& problems)
        : node_(std::move(node)), path_(std::move(path)), problems_(problems) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            problems_.push_back(path_ + ": expected a mapping");
            usable_ = false;
        }
    }

    std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const {
        return usable_ && node_ && node_.IsMap() && std::as_const(node_)[key];
    }

    template <class T>
    void read(const std::string& key, T& out) {
        used_.insert(key);
        if (!has(key)) return;
        try {
            out = std::as_const(node_)[key].template as<T>();
        } catch (const YAML::Exception&) {
            problems_.push_back(key_path(key) + ": cannot read value '" + scalar(key) + "'");
        }
    }

    YAML::Node raw(const std::string& key) {
        used_.insert(key);
        return has(key) ? std::as_const(node_)[key] : YAML::Node();
    }

    void reject_unknown() const {
        if (!usable_ || !node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto k = kv.first.as<std::string>();
            if (!used_.count(k)) problems_.push_back(key_path(k) + ": unknown key");
        }
    }

    std::vector<std::string>& problems() { return problems_; }

private:
    std::string scalar(const std::string& key) const {
        const auto n = std::as_const(node_)[key];
        return n.IsScalar() ? n.Scalar() : std::string("<non-scalar>");
    }

    YAML::Node node_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> used_;
    bool usable_ = true;
};

inline void require(bool ok, std::vector<std::string>& problems, const std::string& path,
                    const std::string& what) {
    if (!ok) problems.push_back(path + ": " + what);
}

inline Eigen::Vector2cd read_spinor(const YAML::Node& n, const std::string& path,
                                    std::vector<std::string>& problems) {
    // [re1, im1, re2, im2]
    try {
        const auto v = n.as<std::vector<double>>();
        if (v.size() == 4) {
            Eigen::Vector2cd s(cplx(v[0], v[1]), cplx(v[2], v[3]));
            if (s.norm() > 0.0) return s;
            problems.push_back(path + ": spinor must be nonzero");
            return {1.0, 0.0};
        }
    } catch (const YAML::Exception&) {
    }
    problems.push_back(path + ": expected [re1, im1, re2, im2]");
    return {1.0, 0.0};
}

inline void read_field(Section& s, FieldSection& f) {
    s.read("m", f.m);
    s.read("c", f.c);
    s.read("n_points", f.n_points);
    s.read("length", f.length);
    auto& p = s.problems();
    require(f.m >= 0.0, p, s.key_path("m"), "must be >= 0");
    require(f.c > 0.0, p, s.key_path("c"), "must be > 0");
    require(f.n_points >= 16 && (f.n_points & (f.n_points - 1)) == 0, p,
            s.key_path("n_points"), "must be a power of two >= 16");
    require(f.length > 0.0, p, s.key_path("length"), "must be > 0");
    s.reject_unknown();
}

inline void read_packet(Section& s, PacketSection& k) {
    s.read("x0", k.x0);
    s.read("p0", k.p0);
    s.read("width", k.width);
    if (auto n = s.raw("spinor"); s.has("spinor")) {
        k.spinor = read_spinor(n, s.key_path("spinor"), s.problems());
    }
    require(k.width > 0.0, s.problems(), s.key_path("width"), "must be > 0");
    s.reject_unknown();
}

inline void read_evolve(Section& s, EvolveSection& e) {
    s.read("t_end", e.t_end);
    s.read("samples", e.samples);
    s.read("compare_oracle", e.compare_oracle);
    s.read("oracle_tolerance", e.oracle_tolerance);
    auto& p = s.problems();
    require(e.t_end > 0.0, p, s.key_path("t_end"), "must be > 0");
    require(e.samples >= 2, p, s.key_path("samples"), "must be >= 2");
    require(e.oracle_tolerance > 0.0 && e.oracle_tolerance <= 1e-3, p,
            s.key_path("oracle_tolerance"), "must lie in (0, 1e-3]");
    s.reject_unknown();
}

inline cqed::EffectiveKind read_kind(const YAML::Node& n, const std::string& path,
                                     std::vector<std::string>& problems) {
    try {
        return cqed::parse_effective_kind(n.as<std::string>());
    } catch (const std::exception&) {
        problems.push_back(path + ": expected jc | anti-jc | longitudinal");
        return cqed::EffectiveKind::jc;
    }
}

inline void read_rwa(Section& s, RwaSection& r) {
    if (auto n = s.raw("kind"); s.has("kind")) {
        r.kind = read_kind(n, s.key_path("kind"), s.problems());
    }
    s.read("g", r.g);
    s.read("Omega", r.Omega);
    s.read("phi", r.phi);
    s.read("longitudinal_ratio", r.longitudinal_ratio);
    s.read("n_max", r.n_max);
    s.read("qubit", r.qubit);
    s.read("photons", r.photons);
    s.read("horizon", r.horizon);
    s.read("samples", r.samples);
    s.read("tolerance", r.tolerance);
    auto& p = s.problems();
    require(r.g >= 0.0, p, s.key_path("g"), "must be >= 0");
    require(r.Omega > 0.0, p, s.key_path("Omega"), "must be > 0");
    require(r.longitudinal_ratio > 0.0, p, s.key_path("longitudinal_ratio"), "must be > 0");
    require(r.n_max >= 1, p, s.key_path("n_max"), "must be >= 1");
    require(r.qubit == 0 || r.qubit == 1, p, s.key_path("qubit"), "must be 0 (up) or 1 (down)");
    require(r.photons >= 0 && r.photons <= r.n_max, p, s.key_path("photons"),
            "must lie in [0, n_max]");
    require(r.horizon > 0.0, p, s.key_path("horizon"), "must be > 0");
    require(r.samples >= 2, p, s.key_path("samples"), "must be >= 2");
    require(r.tolerance > 0.0 && r.tolerance <= 1e-3, p, s.key_path("tolerance"),
            "must lie in (0, 1e-3]");
    if (r.g == 0.0) p.push_back(s.key_path("g") + ": horizon is in units of 1/g, g must be > 0");
    s.reject_unknown();
}

inline void read_composite(Section& s, CompositeSection& c) {
    s.read("g", c.g);
    s.read("Omega_3", c.Omega_3);
    s.read("Omega_4", c.Omega_4);
    s.read("n_max", c.n_max);
    s.read("periods", c.periods);
    s.read("samples", c.samples);
    s.read("tolerance", c.tolerance);
    auto& p = s.problems();
    if (auto n = s.raw("scheme"); s.has("scheme")) {
        Section sch(n, s.key_path("scheme"), p);
        for (const auto& name : scheme_field_names()) {
            if (sch.has(name)) {
                double v = 0.0;
                sch.read(name, v);
                c.overrides[name] = v;
            }
        }
        sch.reject_unknown();
    }
    if (auto n = s.raw("basis_states"); s.has("basis_states")) {
        try {
            c.basis_states.clear();
            for (const auto& item : n) {
                const auto v = item.as<std::vector<int>>();
                if (v.size() != 2 || (v[0] != 0 && v[0] != 1) || (v[1] != 0 && v[1] != 1)) {
                    throw YAML::Exception(YAML::Mark::null_mark(), "bad label");
                }
                c.basis_states.push_back({v[0], v[1]});
            }
        } catch (const YAML::Exception&) {
            p.push_back(s.key_path("basis_states") + ": expected a list of [q1, q2] with 0/1 entries");
        }
    }
    if (auto n = s.raw("spinors"); s.has("spinors")) {
        c.spinors.clear();
        if (!n.IsSequence()) {
            p.push_back(s.key_path("spinors") + ": expected a list of spinors");
        } else {
            for (std::size_t i = 0; i < n.size(); ++i) {
                c.spinors.push_back(
                    read_spinor(n[i], s.key_path("spinors") + "[" + std::to_string(i) + "]", p));
                c.spinors.back().normalize();
            }
        }
    }
    require(c.g > 0.0, p, s.key_path("g"), "must be > 0");
    require(c.Omega_3 > 0.0, p, s.key_path("Omega_3"), "must be > 0");
    require(c.Omega_4 > 0.0, p, s.key_path("Omega_4"), "must be > 0");
    require(c.n_max >= 1, p, s.key_path("n_max"), "must be >= 1");
    require(c.periods > 0.0, p, s.key_path("periods"), "must be > 0");
    require(c.samples >= 2, p, s.key_path("samples"), "must be >= 2");
    require(c.tolerance > 0.0 && c.tolerance <= 1e-3, p, s.key_path("tolerance"),
            "must lie in (0, 1e-3]");
    require(!c.basis_states.empty() || !c.spinors.empty(), p, s.key_path("basis_states"),
            "no initial states given");
    s.reject_unknown();
}

inline void read_measure(Section& s, MeasureSection& m) {
    s.read("random_states", m.random_states);
    s.read("times", m.times);
    s.read("step", m.step);
    s.read("order", m.order);
    auto& p = s.problems();
    require(!m.times.empty(), p, s.key_path("times"), "must not be empty");
    for (std::size_t i = 0; i < m.times.size(); ++i) {
        require(m.times[i] >= 0.0 && (i == 0 || m.times[i] >= m.times[i - 1]), p,
                s.key_path("times"), "must be non-negative and non-decreasing");
    }
    require(m.step > 0.0, p, s.key_path("step"), "must be > 0");
    require(m.order == 2 || m.order == 4, p, s.key_path("order"), "must be 2 or 4");
    s.reject_unknown();
}

inline void read_readout(Section& s, ReadoutSection& r) {
    if (s.has("g")) {
        double g = 0.0;
        s.read("g", g);
        r.g = g;
        require(g > 0.0, s.problems(), s.key_path("g"), "must be > 0");
    }
    s.read("detuning_1", r.detuning_1);
    s.read("detuning_2", r.detuning_2);
    s.read("kappa", r.kappa);
    s.read("interval_1", r.interval_1);
    s.read("drive_detuning", r.drive_detuning);
    s.read("span", r.span);
    s.read("points", r.points);
    auto& p = s.problems();
    require(r.detuning_1 > 0.0, p, s.key_path("detuning_1"), "must be > 0");
    require(r.detuning_2 > 0.0, p, s.key_path("detuning_2"), "must be > 0");
    require(r.kappa > 0.0, p, s.key_path("kappa"), "must be > 0");
    require(r.interval_1 > 0.0, p, s.key_path("interval_1"), "must be > 0");
    require(r.span > 0.0, p, s.key_path("span"), "must be > 0");
    require(r.points >= 2, p, s.key_path("points"), "must be >= 2");
    s.reject_unknown();
}

inline void read_sweep(Section& s, SweepSection& w) {
    if (auto n = s.raw("kinds"); s.has("kinds")) {
        w.kinds.clear();
        if (!n.IsSequence()) {
            s.problems().push_back(s.key_path("kinds") + ": expected a list");
        } else {
            for (std::size_t i = 0; i < n.size(); ++i) {
                w.kinds.push_back(read_kind(n[i], s.key_path("kinds"), s.problems()));
            }
        }
    }
    s.read("ratios", w.ratios);
    s.read("Omega", w.Omega);
    s.read("n_max", w.n_max);
    s.read("horizon", w.horizon);
    s.read("samples", w.samples);
    s.read("tolerance", w.tolerance);
    auto& p = s.problems();
    require(!w.kinds.empty(), p, s.key_path("kinds"), "must not be empty");
    require(!w.ratios.empty(), p, s.key_path("ratios"), "must not be empty");
    for (double r : w.ratios) require(r > 0.0, p, s.key_path("ratios"), "entries must be > 0");
    require(w.Omega > 0.0, p, s.key_path("Omega"), "must be > 0");
    require(w.n_max >= 1, p, s.key_path("n_max"), "must be >= 1");
    require(w.horizon > 0.0, p, s.key_path("horizon"), "must be > 0");
    require(w.samples >= 2, p, s.key_path("samples"), "must be >= 2");
    require(w.tolerance > 0.0 && w.tolerance <= 1e-3, p, s.key_path("tolerance"),
            "must lie in (0, 1e-3]");
    s.reject_unknown();
}

inline std::vector<std::string> sections_for(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::evolve_majorana:
    case ScenarioKind::evolve_dirac: return {"field", "packet", "evolve"};
    case ScenarioKind::validate_rwa: return {"rwa"};
    case ScenarioKind::composite: return {"composite"};
    case ScenarioKind::measure_helicity: return {"field", "packet", "measure"};
    case ScenarioKind::readout_spectrum: return {"readout"};
    case ScenarioKind::sweep: return {"sweep"};
    }
    return {};
}

} // namespace detail

/// Parses and validates a YAML document. Throws ConfigError listing every
/// problem with its key path.
inline ScenarioConfig parse_config_node(const YAML::Node& root) {
    std::vector<std::string> problems;
    ScenarioConfig cfg;
    detail::Section top(root, "", problems);
    if (!root || !root.IsMap()) throw ConfigError({"config: expected a mapping at top level"});

    std::string name;
    top.read("scenario", name);
    if (name.empty()) {
        problems.push_back("scenario: required (one of evolve-majorana, evolve-dirac, "
                           "validate-rwa, composite, measure-helicity, readout-spectrum, sweep)");
        top.reject_unknown();
        throw ConfigError(problems);
    }
    const auto it = scenario_names().find(name);
    if (it == scenario_names().end()) {
        throw ConfigError({"scenario: unknown scenario '" + name + "'"});
    }
    cfg.kind = it->second;
    top.read("seed", cfg.seed);

    for (const auto& sec : detail::sections_for(cfg.kind)) {
        detail::Section s(top.raw(sec), sec, problems);
        if (sec == "field") detail::read_field(s, cfg.field);
        if (sec == "packet") detail::read_packet(s, cfg.packet);
        if (sec == "evolve") detail::read_evolve(s, cfg.evolve);
        if (sec == "rwa") detail::read_rwa(s, cfg.rwa);
        if (sec == "composite") detail::read_composite(s, cfg.composite);
        if (sec == "measure") detail::read_measure(s, cfg.measure);
        if (sec == "readout") detail::read_readout(s, cfg.readout);
        if (sec == "sweep") detail::read_sweep(s, cfg.sweep);
    }
    top.reject_unknown();

    if (cfg.kind == ScenarioKind::composite && problems.empty()) {
        for (const auto& v : cfg.scheme().violations()) problems.push_back("composite.scheme: " + v);
    }
    if (!problems.empty()) throw ConfigError(problems);
    return cfg;
}

inline ScenarioConfig parse_config_string(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError({std::string("config: ") + e.what()});
    }
    return parse_config_node(root);
}

inline ScenarioConfig parse_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ConfigError({"config: file not found: " + path.string()});
    }
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError({std::string("config: ") + e.what()});
    }
    return parse_config_node(root);
}

} // namespace mcqed::cli

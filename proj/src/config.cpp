#include "savflow/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace savflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    if (line > 0)
        throw ConfigError("config line " + std::to_string(line) + ": " + msg);
    throw ConfigError("config override: " + msg);
}

double to_double(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        fail(line, key + ": expected a number, got '" + v + "'");
    }
}

long to_long(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return n;
    } catch (const std::exception&) {
        fail(line, key + ": expected an integer, got '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return n;
    } catch (const std::exception&) {
        fail(line, key + ": expected an unsigned integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(line, key + ": expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(v);
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (!v.empty() && v.back() == ',') out.push_back("");
    return out;
}

std::vector<double> to_dlist(const std::string& v, int line, const std::string& key) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    for (const auto& item : split_list(v)) out.push_back(to_double(item, line, key));
    return out;
}

std::vector<int> to_ilist(const std::string& v, int line, const std::string& key) {
    std::vector<int> out;
    if (trim(v).empty()) return out;
    for (const auto& item : split_list(v))
        out.push_back(static_cast<int>(to_long(item, line, key)));
    return out;
}

std::string fmt_double(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

std::string join_dlist(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt_double(v[i]);
    }
    return s;
}

std::string join_ilist(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"model.kind", [](RunConfig& c, const std::string& v, int ln) {
             try { c.model = model_from_name(v); } catch (const ConfigError& e) { fail(ln, e.what()); }
         }},
        {"model.M", [](RunConfig& c, const std::string& v, int ln) { c.params.M = to_double(v, ln, "M"); }},
        {"model.alpha0", [](RunConfig& c, const std::string& v, int ln) { c.params.alpha0 = to_double(v, ln, "alpha0"); }},
        {"model.eps", [](RunConfig& c, const std::string& v, int ln) { c.params.eps = to_double(v, ln, "eps"); }},
        {"model.beta", [](RunConfig& c, const std::string& v, int ln) { c.params.beta = to_double(v, ln, "beta"); }},
        {"model.nu", [](RunConfig& c, const std::string& v, int ln) { c.params.nu = to_double(v, ln, "nu"); }},
        {"model.ic", [](RunConfig& c, const std::string& v, int ln) {
             try { c.ic = ic_from_name(v); } catch (const ConfigError& e) { fail(ln, e.what()); }
         }},
        {"model.forcing", [](RunConfig& c, const std::string& v, int ln) {
             if (v != "auto" && v != "none" && v != "manufactured")
                 fail(ln, "forcing: expected auto|none|manufactured, got '" + v + "'");
             c.forcing = v;
         }},
        {"model.ic_alpha", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.alpha = to_double(v, ln, "ic_alpha"); }},
        {"model.ic_r0", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.r0 = to_double(v, ln, "ic_r0"); }},
        {"model.ic_eps", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.eps = to_double(v, ln, "ic_eps"); }},
        {"model.ic_phi_bar", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.phi_bar = to_double(v, ln, "ic_phi_bar"); }},
        {"model.ic_c1", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.c1 = to_double(v, ln, "ic_c1"); }},
        {"model.ic_c2", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.c2 = to_double(v, ln, "ic_c2"); }},
        {"model.ic_rho", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.rho = to_double(v, ln, "ic_rho"); }},
        {"model.ic_perturb", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.perturb = to_double(v, ln, "ic_perturb"); }},
        {"model.ic_amp", [](RunConfig& c, const std::string& v, int ln) { c.ic_params.amp = to_double(v, ln, "ic_amp"); }},

        {"grid.dim", [](RunConfig& c, const std::string& v, int ln) { c.dim = static_cast<int>(to_long(v, ln, "dim")); }},
        {"grid.modes", [](RunConfig& c, const std::string& v, int ln) { c.modes = to_ilist(v, ln, "modes"); }},
        {"grid.extents", [](RunConfig& c, const std::string& v, int ln) { c.extents = to_dlist(v, ln, "extents"); }},

        {"scheme.name", [](RunConfig& c, const std::string& v, int ln) {
             try { c.scheme = scheme_from_name(v); } catch (const ConfigError& e) { fail(ln, e.what()); }
         }},
        {"scheme.k", [](RunConfig& c, const std::string& v, int ln) { c.k = static_cast<int>(to_long(v, ln, "k")); }},
        {"scheme.dt", [](RunConfig& c, const std::string& v, int ln) { c.dt = to_double(v, ln, "dt"); }},
        {"scheme.T", [](RunConfig& c, const std::string& v, int ln) { c.T = to_double(v, ln, "T"); }},
        {"scheme.t0", [](RunConfig& c, const std::string& v, int ln) { c.t0 = to_double(v, ln, "t0"); }},
        {"scheme.C", [](RunConfig& c, const std::string& v, int ln) { c.C = to_double(v, ln, "C"); }},
        {"scheme.C0", [](RunConfig& c, const std::string& v, int ln) { c.C0 = to_double(v, ln, "C0"); }},
        {"scheme.eta", [](RunConfig& c, const std::string& v, int ln) { c.eta = to_double(v, ln, "eta"); }},
        {"scheme.exponent_override", [](RunConfig& c, const std::string& v, int ln) {
             c.exponent_override = static_cast<int>(to_long(v, ln, "exponent_override"));
         }},
        {"scheme.dealias", [](RunConfig& c, const std::string& v, int ln) {
             if (v == "none") c.dealias = DealiasRule::none;
             else if (v == "two_thirds") c.dealias = DealiasRule::two_thirds;
             else fail(ln, "dealias: expected none|two_thirds, got '" + v + "'");
         }},
        {"scheme.startup", [](RunConfig& c, const std::string& v, int ln) {
             if (v == "cold_bdf1_substeps") c.startup = StartupMethod::cold_bdf1_substeps;
             else if (v == "exact_history") c.startup = StartupMethod::exact_history;
             else fail(ln, "startup: expected cold_bdf1_substeps|exact_history, got '" + v + "'");
         }},
        {"scheme.startup_substeps", [](RunConfig& c, const std::string& v, int ln) {
             c.startup_substeps = static_cast<int>(to_long(v, ln, "startup_substeps"));
         }},
        {"scheme.sav_denominator", [](RunConfig& c, const std::string& v, int ln) {
             if (v == "extrapolated") c.sav_denominator = SavDenominator::extrapolated;
             else if (v == "bdf") c.sav_denominator = SavDenominator::bdf;
             else fail(ln, "sav_denominator: expected extrapolated|bdf, got '" + v + "'");
         }},

        {"output.dir", [](RunConfig& c, const std::string& v, int) { c.out_dir = v; }},
        {"output.csv", [](RunConfig& c, const std::string& v, int) { c.csv = v; }},
        {"output.snapshot_times", [](RunConfig& c, const std::string& v, int ln) {
             c.snapshot_times = to_dlist(v, ln, "snapshot_times");
         }},
        {"output.snapshot_format", [](RunConfig& c, const std::string& v, int ln) {
             if (v != "savf1") fail(ln, "snapshot_format: only 'savf1' is supported");
             c.snapshot_format = v;
         }},
        {"output.plot_scripts", [](RunConfig& c, const std::string& v, int ln) {
             c.plot_scripts = to_bool(v, ln, "plot_scripts");
         }},
        {"output.seed", [](RunConfig& c, const std::string& v, int ln) { c.seed = to_u64(v, ln, "seed"); }},
    };
    return table;
}

} // namespace

std::string to_string(ModelKind k) {
    switch (k) {
    case ModelKind::allen_cahn: return "allen_cahn";
    case ModelKind::cahn_hilliard: return "cahn_hilliard";
    case ModelKind::pfc: return "pfc";
    case ModelKind::navier_stokes: return "navier_stokes";
    }
    return "?";
}

std::string to_string(SchemeKind k) {
    switch (k) {
    case SchemeKind::sav_bdf: return "sav_bdf";
    case SchemeKind::rsav_cn: return "rsav_cn";
    case SchemeKind::eop_sav_cn: return "eop_sav_cn";
    case SchemeKind::gsav_bdf: return "gsav_bdf";
    case SchemeKind::eop_gsav: return "eop_gsav";
    case SchemeKind::ns_eop_gsav: return "ns_eop_gsav";
    }
    return "?";
}

std::string to_string(IcTag t) {
    switch (t) {
    case IcTag::manufactured: return "manufactured";
    case IcTag::star: return "star";
    case IcTag::circle_array: return "circle_array";
    case IcTag::crystallites: return "crystallites";
    case IcTag::shear_layer: return "shear_layer";
    case IcTag::uniform_random: return "uniform_random";
    }
    return "?";
}

std::string to_string(DealiasRule r) {
    return r == DealiasRule::two_thirds ? "two_thirds" : "none";
}

std::string to_string(StartupMethod s) {
    return s == StartupMethod::exact_history ? "exact_history" : "cold_bdf1_substeps";
}

std::string to_string(SavDenominator d) {
    return d == SavDenominator::bdf ? "bdf" : "extrapolated";
}

ModelKind model_from_name(const std::string& s) {
    if (s == "allen_cahn") return ModelKind::allen_cahn;
    if (s == "cahn_hilliard") return ModelKind::cahn_hilliard;
    if (s == "pfc") return ModelKind::pfc;
    if (s == "navier_stokes") return ModelKind::navier_stokes;
    throw ConfigError("unknown model kind '" + s + "'");
}

SchemeKind scheme_from_name(const std::string& s) {
    if (s == "sav_bdf") return SchemeKind::sav_bdf;
    if (s == "rsav_cn") return SchemeKind::rsav_cn;
    if (s == "eop_sav_cn") return SchemeKind::eop_sav_cn;
    if (s == "gsav_bdf") return SchemeKind::gsav_bdf;
    if (s == "eop_gsav") return SchemeKind::eop_gsav;
    if (s == "ns_eop_gsav") return SchemeKind::ns_eop_gsav;
    throw ConfigError("unknown scheme '" + s + "'");
}

IcTag ic_from_name(const std::string& s) {
    if (s == "manufactured") return IcTag::manufactured;
    if (s == "star") return IcTag::star;
    if (s == "circle_array") return IcTag::circle_array;
    if (s == "crystallites") return IcTag::crystallites;
    if (s == "shear_layer") return IcTag::shear_layer;
    if (s == "uniform_random") return IcTag::uniform_random;
    throw ConfigError("unknown initial condition '" + s + "'");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;
    static const std::set<std::string> sections = {"model", "grid", "scheme", "output"};

    std::istringstream in(text);
    std::string raw;
    int ln = 0;
    while (std::getline(in, raw)) {
        ++ln;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(ln, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section)) fail(ln, "unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(ln, "expected key = value");
        if (section.empty()) fail(ln, "key before any [section] header");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::string full = section + "." + key;
        auto it = setters().find(full);
        if (it == setters().end()) fail(ln, "unknown key '" + key + "' in [" + section + "]");
        if (!seen.insert(full).second) fail(ln, "duplicate key '" + full + "'");
        it->second(cfg, value, ln);
    }
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& spec) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + spec + "': expected section.key=value");
    std::string full = trim(spec.substr(0, eq));
    std::string value = trim(spec.substr(eq + 1));
    auto it = setters().find(full);
    if (it == setters().end())
        throw ConfigError("override: unknown key '" + full + "'");
    it->second(cfg, value, -1);
}

ForcingKind resolved_forcing(const RunConfig& cfg) {
    if (cfg.forcing == "none") return ForcingKind::none;
    if (cfg.forcing == "manufactured") return ForcingKind::manufactured;
    return cfg.ic == IcTag::manufactured ? ForcingKind::manufactured
                                         : ForcingKind::none;
}

long total_steps(const RunConfig& cfg) {
    double n = cfg.T / cfg.dt;
    long ln = std::lround(n);
    if (ln < 1 || std::abs(n - static_cast<double>(ln)) > 1e-9 * std::max(1.0, n))
        throw ConfigError("T must be a positive integer multiple of dt");
    return ln;
}

void validate_config(const RunConfig& cfg) {
    if (cfg.dim < 1 || cfg.dim > 3) throw ConfigError("grid.dim must be 1, 2, or 3");
    if (static_cast<int>(cfg.modes.size()) != cfg.dim)
        throw ConfigError("grid.modes needs one entry per axis");
    if (static_cast<int>(cfg.extents.size()) != cfg.dim)
        throw ConfigError("grid.extents needs one entry per axis");
    if (!(cfg.dt > 0.0)) throw ConfigError("scheme.dt must be positive");
    if (!(cfg.T > 0.0)) throw ConfigError("scheme.T must be positive");
    total_steps(cfg);
    if (!(cfg.eta > 0.0) || cfg.eta > 1.0) throw ConfigError("scheme.eta must lie in (0, 1]");
    if (cfg.exponent_override < 0 || cfg.exponent_override > 8)
        throw ConfigError("scheme.exponent_override out of range 0..8");
    if (cfg.startup_substeps < 0 || cfg.startup_substeps > 16)
        throw ConfigError("scheme.startup_substeps out of range 0..16");
    if (cfg.C && !(*cfg.C >= 0.0)) throw ConfigError("scheme.C must be >= 0");
    if (cfg.C0 && !(*cfg.C0 >= 0.0)) throw ConfigError("scheme.C0 must be >= 0");

    const bool ns_model = cfg.model == ModelKind::navier_stokes;
    if ((cfg.scheme == SchemeKind::ns_eop_gsav) != ns_model)
        throw ConfigError("ns_eop_gsav pairs with navier_stokes only (and vice versa)");
    if (cfg.scheme == SchemeKind::sav_bdf && (cfg.k < 1 || cfg.k > 2))
        throw ConfigError("sav_bdf supports k = 1, 2");
    if ((cfg.scheme == SchemeKind::rsav_cn || cfg.scheme == SchemeKind::eop_sav_cn) && cfg.k != 2)
        throw ConfigError("cn schemes are fixed at order 2 (set k = 2)");
    if (cfg.k < 1 || cfg.k > 4) throw ConfigError("scheme.k out of range 1..4");

    if (ns_model) {
        if (cfg.ic != IcTag::manufactured && cfg.ic != IcTag::shear_layer)
            throw ConfigError("navier_stokes needs ic manufactured or shear_layer");
    } else if (cfg.ic == IcTag::shear_layer) {
        throw ConfigError("shear_layer is a velocity initial condition");
    }
    if (cfg.forcing == "manufactured" && cfg.ic != IcTag::manufactured)
        throw ConfigError("manufactured forcing needs ic = manufactured");
    if (resolved_forcing(cfg) == ForcingKind::manufactured && cfg.model == ModelKind::pfc)
        throw ConfigError("no manufactured solution is defined for pfc");
    if (resolved_forcing(cfg) == ForcingKind::manufactured && cfg.dim != 2)
        throw ConfigError("the manufactured solutions are two-dimensional");
    if (cfg.startup == StartupMethod::exact_history &&
        resolved_forcing(cfg) != ForcingKind::manufactured)
        throw ConfigError("exact_history startup needs the manufactured solution");
    if (cfg.out_dir.empty()) throw ConfigError("output.dir must not be empty");
    if (cfg.csv.empty()) throw ConfigError("output.csv must not be empty");
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[model]\n";
    out << "kind = " << to_string(cfg.model) << "\n";
    out << "M = " << fmt_double(cfg.params.M) << "\n";
    out << "alpha0 = " << fmt_double(cfg.params.alpha0) << "\n";
    out << "eps = " << fmt_double(cfg.params.eps) << "\n";
    out << "beta = " << fmt_double(cfg.params.beta) << "\n";
    out << "nu = " << fmt_double(cfg.params.nu) << "\n";
    out << "ic = " << to_string(cfg.ic) << "\n";
    out << "forcing = " << cfg.forcing << "\n";
    out << "ic_alpha = " << fmt_double(cfg.ic_params.alpha) << "\n";
    out << "ic_r0 = " << fmt_double(cfg.ic_params.r0) << "\n";
    out << "ic_eps = " << fmt_double(cfg.ic_params.eps) << "\n";
    out << "ic_phi_bar = " << fmt_double(cfg.ic_params.phi_bar) << "\n";
    out << "ic_c1 = " << fmt_double(cfg.ic_params.c1) << "\n";
    out << "ic_c2 = " << fmt_double(cfg.ic_params.c2) << "\n";
    out << "ic_rho = " << fmt_double(cfg.ic_params.rho) << "\n";
    out << "ic_perturb = " << fmt_double(cfg.ic_params.perturb) << "\n";
    out << "ic_amp = " << fmt_double(cfg.ic_params.amp) << "\n";
    out << "\n[grid]\n";
    out << "dim = " << cfg.dim << "\n";
    out << "modes = " << join_ilist(cfg.modes) << "\n";
    out << "extents = " << join_dlist(cfg.extents) << "\n";
    out << "\n[scheme]\n";
    out << "name = " << to_string(cfg.scheme) << "\n";
    out << "k = " << cfg.k << "\n";
    out << "dt = " << fmt_double(cfg.dt) << "\n";
    out << "T = " << fmt_double(cfg.T) << "\n";
    out << "t0 = " << fmt_double(cfg.t0) << "\n";
    if (cfg.C) out << "C = " << fmt_double(*cfg.C) << "\n";
    if (cfg.C0) out << "C0 = " << fmt_double(*cfg.C0) << "\n";
    out << "eta = " << fmt_double(cfg.eta) << "\n";
    out << "exponent_override = " << cfg.exponent_override << "\n";
    out << "dealias = " << to_string(cfg.dealias) << "\n";
    out << "startup = " << to_string(cfg.startup) << "\n";
    out << "startup_substeps = " << cfg.startup_substeps << "\n";
    out << "sav_denominator = " << to_string(cfg.sav_denominator) << "\n";
    out << "\n[output]\n";
    out << "dir = " << cfg.out_dir << "\n";
    out << "csv = " << cfg.csv << "\n";
    out << "snapshot_times = " << join_dlist(cfg.snapshot_times) << "\n";
    out << "snapshot_format = " << cfg.snapshot_format << "\n";
    out << "plot_scripts = " << (cfg.plot_scripts ? "true" : "false") << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

} // namespace savflow

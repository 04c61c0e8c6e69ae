#include "dvw/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace dvw {

namespace {

enum class Kind { number, integer, boolean, text, numbers, integers };

struct Value {
    bool quoted = false;
    std::string raw;  // text inside the quotes, or the bare token
};

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string where(const std::string& section, const std::string& key) {
    return "[" + section + "] " + key;
}

double to_number(const std::string& tok, const std::string& loc) {
    double v = 0.0;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e || tok.empty())
        throw ConfigError(loc + ": expected a number, got '" + tok + "'");
    return v;
}

int to_int(const std::string& tok, const std::string& loc) {
    int v = 0;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e || tok.empty())
        throw ConfigError(loc + ": expected an integer, got '" + tok + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += f(v[i]);
    }
    return s;
}

struct Field {
    const char* section;
    const char* key;
    Kind kind;
    std::function<void(RunConfig&, const Value&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;  // serialized value
};

Field num(const char* sec, const char* key, double RunConfig::*m) {
    return {sec, key, Kind::number,
            [m](RunConfig& c, const Value& v, const std::string& loc) {
                c.*m = to_number(v.raw, loc);
            },
            [m](const RunConfig& c) { return fmt(c.*m); }};
}

Field integer(const char* sec, const char* key, int RunConfig::*m) {
    return {sec, key, Kind::integer,
            [m](RunConfig& c, const Value& v, const std::string& loc) {
                c.*m = to_int(v.raw, loc);
            },
            [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Field text(const char* sec, const char* key, std::string RunConfig::*m) {
    return {sec, key, Kind::text,
            [m](RunConfig& c, const Value& v, const std::string&) { c.*m = v.raw; },
            [m](const RunConfig& c) { return "\"" + c.*m + "\""; }};
}

const std::vector<Field>& schema() {
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        f.push_back(integer("domain", "dim", &RunConfig::dim));
        f.push_back(num("domain", "x_min", &RunConfig::x_min));
        f.push_back(num("domain", "x_max", &RunConfig::x_max));
        f.push_back(num("domain", "y_min", &RunConfig::y_min));
        f.push_back(num("domain", "y_max", &RunConfig::y_max));
        f.push_back(integer("domain", "n", &RunConfig::n));

        f.push_back(text("materials", "alpha", &RunConfig::alpha));
        f.push_back(text("materials", "beta", &RunConfig::beta));
        f.push_back(text("materials", "gamma", &RunConfig::gamma));

        f.push_back({"bc", "kind", Kind::text,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         if (v.raw == "dirichlet")
                             c.bc = BcKind::dirichlet;
                         else if (v.raw == "neumann")
                             c.bc = BcKind::neumann;
                         else
                             throw ConfigError(loc + ": expected \"dirichlet\" or \"neumann\"");
                     },
                     [](const RunConfig& c) { return "\"" + to_string(c.bc) + "\""; }});
        f.push_back(text("bc", "data", &RunConfig::bc_data));

        f.push_back(num("time", "T", &RunConfig::T));
        f.push_back({"time", "rule", Kind::text,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         try {
                             c.rule = dt_rule_from_string(v.raw);
                         } catch (const std::exception& e) {
                             throw ConfigError(loc + ": " + e.what());
                         }
                     },
                     [](const RunConfig& c) { return "\"" + to_string(c.rule) + "\""; }});
        f.push_back(num("time", "c_visc", &RunConfig::c_visc));
        f.push_back(num("time", "c_hyp", &RunConfig::c_hyp));
        f.push_back(num("time", "dt", &RunConfig::dt));
        f.push_back(num("time", "dt_max", &RunConfig::dt_max));
        f.push_back({"time", "snapshots", Kind::numbers,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         c.snapshots.clear();
                         for (auto& t : split_list(v.raw)) c.snapshots.push_back(to_number(t, loc));
                     },
                     [](const RunConfig& c) {
                         return join<double>(c.snapshots, [](const double& x) { return fmt(x); });
                     }});
        f.push_back({"time", "record_energy", Kind::boolean,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         if (v.raw == "true")
                             c.record_energy = true;
                         else if (v.raw == "false")
                             c.record_energy = false;
                         else
                             throw ConfigError(loc + ": expected true or false");
                     },
                     [](const RunConfig& c) { return std::string(c.record_energy ? "true" : "false"); }});

        f.push_back(integer("discretization", "order", &RunConfig::order));
        f.push_back({"discretization", "sat_variant", Kind::text,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         if (v.raw == "standard")
                             c.variant = SatVariant::standard;
                         else if (v.raw == "fully_compatible")
                             c.variant = SatVariant::fully_compatible;
                         else
                             throw ConfigError(loc +
                                               ": expected \"standard\" or \"fully_compatible\"");
                     },
                     [](const RunConfig& c) { return "\"" + to_string(c.variant) + "\""; }});
        f.push_back(num("discretization", "penalty_safety", &RunConfig::penalty_safety));
        f.push_back({"discretization", "penalty_limit", Kind::text,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         if (v.raw == "borrowing")
                             c.penalty_limit = PenaltyLimit::borrowing;
                         else if (v.raw == "sharp")
                             c.penalty_limit = PenaltyLimit::sharp;
                         else
                             throw ConfigError(loc + ": expected \"borrowing\" or \"sharp\"");
                     },
                     [](const RunConfig& c) { return "\"" + to_string(c.penalty_limit) + "\""; }});

        f.push_back(text("study", "exact_solution", &RunConfig::exact_solution));
        f.push_back(text("study", "forcing", &RunConfig::forcing));
        f.push_back(text("study", "initial_value", &RunConfig::initial_value));
        f.push_back(text("study", "initial_rate", &RunConfig::initial_rate));
        f.push_back({"study", "resolutions", Kind::integers,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         c.resolutions.clear();
                         for (auto& t : split_list(v.raw)) c.resolutions.push_back(to_int(t, loc));
                     },
                     [](const RunConfig& c) {
                         return join<int>(c.resolutions,
                                          [](const int& x) { return std::to_string(x); });
                     }});
        f.push_back(integer("study", "reference_n", &RunConfig::reference_n));
        f.push_back({"study", "s_values", Kind::text,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         c.s_values.clear();
                         for (auto& t : split_list(v.raw)) {
                             try {
                                 c.s_values.push_back(parse_complex(t));
                             } catch (const std::exception& e) {
                                 throw ConfigError(loc + ": " + e.what());
                             }
                         }
                     },
                     [](const RunConfig& c) {
                         return "\"" +
                                join<std::complex<double>>(
                                    c.s_values,
                                    [](const std::complex<double>& z) { return format_complex(z); }) +
                                "\"";
                     }});
        f.push_back({"study", "h_values", Kind::numbers,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         c.h_values.clear();
                         for (auto& t : split_list(v.raw)) c.h_values.push_back(to_number(t, loc));
                     },
                     [](const RunConfig& c) {
                         return join<double>(c.h_values, [](const double& x) { return fmt(x); });
                     }});
        f.push_back({"study", "multipliers", Kind::numbers,
                     [](RunConfig& c, const Value& v, const std::string& loc) {
                         c.multipliers.clear();
                         for (auto& t : split_list(v.raw)) c.multipliers.push_back(to_number(t, loc));
                     },
                     [](const RunConfig& c) {
                         return join<double>(c.multipliers, [](const double& x) { return fmt(x); });
                     }});

        f.push_back(text("output", "dir", &RunConfig::dir));
        f.push_back(text("output", "prefix", &RunConfig::prefix));
        return f;
    }();
    return fields;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : schema())
        if (section == f.section && key == f.key) return &f;
    return nullptr;
}

bool known_section(const std::string& s) {
    for (const auto& f : schema())
        if (s == f.section) return true;
    return false;
}

Expr parse_field(const std::string& src, const std::string& loc) {
    try {
        return parse(src);
    } catch (const ParseError& e) {
        throw ConfigError(loc + ": " + e.what());
    }
}

}  // namespace

bool RunConfig::has(const std::string& section_key) const {
    return std::find(present.begin(), present.end(), section_key) != present.end();
}

RunConfig parse_config(const std::string& src) {
    RunConfig c;
    std::istringstream in(src);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string at = "line " + std::to_string(lineno) + ": ";
        // Strip comments outside quotes.
        bool inq = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') inq = !inq;
            if (line[i] == '#' && !inq) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(at + "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_section(section)) throw ConfigError(at + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(at + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string rhs = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError(at + "key '" + key + "' outside of any section");
        const Field* f = find_field(section, key);
        if (!f) throw ConfigError(at + "unknown key " + where(section, key));
        const std::string loc = at + where(section, key);
        Value v;
        if (!rhs.empty() && rhs.front() == '"') {
            if (rhs.size() < 2 || rhs.back() != '"')
                throw ConfigError(loc + ": unterminated string");
            v.quoted = true;
            v.raw = rhs.substr(1, rhs.size() - 2);
        } else {
            v.raw = rhs;
        }
        const bool wants_quotes = f->kind == Kind::text;
        if (wants_quotes && !v.quoted) throw ConfigError(loc + ": value must be a quoted string");
        if (!wants_quotes && v.quoted) throw ConfigError(loc + ": value must not be quoted");
        const std::string id = section + "." + key;
        if (c.has(id)) throw ConfigError(loc + ": duplicate key");
        f->set(c, v, loc);
        c.present.push_back(id);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const RunConfig& c) {
    std::string out, section;
    for (const auto& f : schema()) {
        const std::string id = std::string(f.section) + "." + f.key;
        if (!c.has(id)) continue;
        if (section != f.section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(c) + "\n";
    }
    return out;
}

std::string config_summary(const RunConfig& c) {
    std::string out;
    for (const auto& f : schema()) {
        if (!out.empty()) out += " ";
        out += std::string(f.section) + "." + f.key + "=" + f.get(c);
    }
    return out;
}

std::complex<double> parse_complex(const std::string& s0) {
    std::string s;
    for (char ch : s0)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    auto bad = [&] { return ConfigError("malformed complex number '" + s0 + "'"); };
    if (s.empty()) throw bad();
    // Locate the split between real and imaginary parts: the last sign that
    // is not at the start and not part of an exponent.
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < s.size(); ++i)
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') split = i;
    auto real_of = [&](const std::string& t) {
        double v = 0.0;
        auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) throw bad();
        return v;
    };
    auto imag_of = [&](std::string t) {
        if (t.empty() || t.back() != 'i') throw bad();
        t.pop_back();
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        if (t.front() == '+') t.erase(0, 1);
        return real_of(t);
    };
    if (s.back() != 'i') return {real_of(s), 0.0};
    if (split == std::string::npos) return {0.0, imag_of(s)};
    std::string re = s.substr(0, split);
    if (!re.empty() && re.front() == '+') re.erase(0, 1);
    return {real_of(re), imag_of(s.substr(split))};
}

std::string format_complex(std::complex<double> z) {
    if (z.imag() == 0.0) return fmt(z.real());
    std::string s = z.real() != 0.0 ? fmt(z.real()) : "";
    if (!s.empty() && z.imag() >= 0.0) s += "+";
    return s + fmt(z.imag()) + "i";
}

void require(const RunConfig& c, const std::string& section, const std::string& key) {
    if (!c.has(section + "." + key))
        throw ConfigError("missing required key " + where(section, key));
}

Problem build_problem(const RunConfig& c, int n) {
    require(c, "materials", "gamma");
    Problem p;
    Grid1D gx(c.x_min, c.x_max, n);
    if (c.dim == 1)
        p.grid = gx;
    else if (c.dim == 2)
        p.grid = Grid2D{gx, Grid1D(c.y_min, c.y_max, n)};
    else
        throw ConfigError(where("domain", "dim") + ": must be 1 or 2");
    p.fields.alpha = parse_field(c.alpha, where("materials", "alpha"));
    p.fields.beta = parse_field(c.beta, where("materials", "beta"));
    p.fields.gamma = parse_field(c.gamma, where("materials", "gamma"));
    p.bc.kind = c.bc;
    if (!c.bc_data.empty()) p.bc.data = parse_field(c.bc_data, where("bc", "data"));
    if (!c.forcing.empty()) p.forcing = parse_field(c.forcing, where("study", "forcing"));
    if (!c.initial_value.empty())
        p.initial_value = parse_field(c.initial_value, where("study", "initial_value"));
    if (!c.initial_rate.empty())
        p.initial_rate = parse_field(c.initial_rate, where("study", "initial_rate"));
    p.T = c.T;
    p.order = c.order;
    p.sat_variant = c.variant;
    p.penalty_safety = c.penalty_safety;
    p.penalty_limit = c.penalty_limit;
    return p;
}

TimeConfig build_time(const RunConfig& c) {
    require(c, "time", "T");
    TimeConfig t;
    t.T = c.T;
    t.rule = c.rule;
    t.c_visc = c.c_visc;
    t.c_hyp = c.c_hyp;
    t.dt = c.dt;
    if (c.dt_max > 0.0) t.dt_max = c.dt_max;
    t.snapshot_times = c.snapshots;
    t.record_energy = c.record_energy;
    if (t.rule == DtRule::fixed && !(t.dt > 0.0))
        throw ConfigError(where("time", "dt") + ": required and positive for rule \"fixed\"");
    return t;
}

ManufacturedCase build_case(const RunConfig& c) {
    require(c, "materials", "gamma");
    require(c, "study", "exact_solution");
    require(c, "study", "resolutions");
    ManufacturedCase m;
    m.exact = parse_field(c.exact_solution, where("study", "exact_solution"));
    m.fields.alpha = parse_field(c.alpha, where("materials", "alpha"));
    m.fields.beta = parse_field(c.beta, where("materials", "beta"));
    m.fields.gamma = parse_field(c.gamma, where("materials", "gamma"));
    m.x_min = c.x_min;
    m.x_max = c.x_max;
    m.y_min = c.y_min;
    m.y_max = c.y_max;
    m.dim = c.dim;
    m.bc = c.bc;
    m.order = c.order;
    m.penalty_safety = c.penalty_safety;
    m.penalty_limit = c.penalty_limit;
    m.variant = c.variant;
    m.time = build_time(c);
    m.time.record_energy = false;
    m.resolutions = c.resolutions;
    return m;
}

}  // namespace dvw

#include "config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tbx {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

TomlValue parse_scalar(const std::string& tok, int lineno) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
        return tok.substr(1, tok.size() - 2);
    if (tok == "true") return true;
    if (tok == "false") return false;
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(lineno) + ": cannot parse value '" + tok + "'");
    }
}

std::vector<std::string> split_array_items(const std::string& body, int lineno) {
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (c == ',' && !in_string) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    for (const auto& it : items)
        if (it.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty array element");
    return items;
}

}  // namespace

Toml Toml::parse(const std::string& text) {
    Toml out;
    std::istringstream is(text);
    std::string line, table;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated table header");
            table = trim(line.substr(1, line.size() - 2));
            if (table.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty table name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string full = table.empty() ? key : table + "." + key;
        if (out.values_.count(full))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
        if (val.front() == '[') {
            if (val.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated array");
            const auto items = split_array_items(val.substr(1, val.size() - 2), lineno);
            if (!items.empty() && items.front().front() == '"') {
                std::vector<std::string> strs;
                for (const auto& it : items) {
                    auto v = parse_scalar(it, lineno);
                    if (!std::holds_alternative<std::string>(v))
                        throw ConfigError("line " + std::to_string(lineno) + ": mixed array types");
                    strs.push_back(std::get<std::string>(v));
                }
                out.values_[full] = strs;
            } else {
                std::vector<double> nums;
                for (const auto& it : items) {
                    auto v = parse_scalar(it, lineno);
                    if (!std::holds_alternative<double>(v))
                        throw ConfigError("line " + std::to_string(lineno) + ": mixed array types");
                    nums.push_back(std::get<double>(v));
                }
                out.values_[full] = nums;
            }
        } else {
            out.values_[full] = parse_scalar(val, lineno);
        }
    }
    return out;
}

double Toml::number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config field '" + key + "'");
    if (const double* v = std::get_if<double>(&it->second)) return *v;
    throw ConfigError("config field '" + key + "' must be a number");
}

double Toml::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

double Toml::number_or_inf(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const double* v = std::get_if<double>(&it->second)) return *v;
    if (const std::string* s = std::get_if<std::string>(&it->second)) {
        if (*s == "inf" || *s == "infinity") return std::numeric_limits<double>::infinity();
    }
    throw ConfigError("config field '" + key + "' must be a number or \"inf\"");
}

std::string Toml::str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config field '" + key + "'");
    if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
    throw ConfigError("config field '" + key + "' must be a string");
}

std::string Toml::str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
}

std::vector<double> Toml::numbers(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config field '" + key + "'");
    if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
    throw ConfigError("config field '" + key + "' must be a numeric array");
}

std::vector<double> Toml::numbers_or(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : fallback;
}

bool Toml::flag_or(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const bool* v = std::get_if<bool>(&it->second)) return *v;
    throw ConfigError("config field '" + key + "' must be a boolean");
}

std::string Toml::canonical() const {
    std::string out;
    char buf[64];
    for (const auto& [key, value] : values_) {
        out += key;
        out += '=';
        if (const double* d = std::get_if<double>(&value)) {
            std::snprintf(buf, sizeof buf, "%.17g", *d);
            out += buf;
        } else if (const bool* b = std::get_if<bool>(&value)) {
            out += (*b ? "true" : "false");
        } else if (const std::string* s = std::get_if<std::string>(&value)) {
            out += '"' + *s + '"';
        } else if (const auto* nums = std::get_if<std::vector<double>>(&value)) {
            for (double d : *nums) {
                std::snprintf(buf, sizeof buf, "%.17g,", d);
                out += buf;
            }
        } else if (const auto* strs = std::get_if<std::vector<std::string>>(&value)) {
            for (const auto& s : *strs) out += '"' + s + "\",";
        }
        out += '\n';
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

namespace {

const Preset kPresets[] = {
    {"fig-preasymptotic-E1", "Fejer interpolation of the Fermi-Dirac factor on [-1,-0.2]U[0.2,1]",
     R"(seed = 1

[system]
kind = "chain"
n = 40
spacing = 1.0
pattern = [0.21, -0.21]

[model]
h0 = 8.437448913764524   # 0.42 e^3
gamma0 = 3.0

[observable]
kind = "fermi_dirac"
beta = 100.0
mu = 0.0

[scheme]
kind = "fejer"
interval_set = "[-1,-0.2]U[0.2,1]"

[sweep]
values = [1, 6, 11, 16, 21, 26, 31, 36, 41, 46, 51, 56, 61, 66, 71, 76, 81, 86, 91, 96]
)"},
    {"fig-preasymptotic-E2", "same experiment on the set polluted by [-0.06,-0.03]",
     R"(seed = 1

[system]
kind = "chain"
n = 40
spacing = 1.0
pattern = [0.21, -0.21]

[model]
h0 = 8.437448913764524
gamma0 = 3.0

[observable]
kind = "fermi_dirac"
beta = 100.0
mu = 0.0

[scheme]
kind = "fejer"
interval_set = "[-1,-0.2]U[-0.06,-0.03]U[0.2,1]"

[sweep]
values = [1, 6, 11, 16, 21, 26, 31, 36, 41, 46, 51, 56, 61, 66, 71, 76, 81, 86, 91, 96]
)"},
    {"defect-bop", "recursion-method estimate on a chain with one mid-gap defect level",
     R"(seed = 1

[system]
kind = "defect_chain"
n = 41
spacing = 1.0
pattern = [0.21, -0.21]
defect_site = 20
defect_potential = -0.1

[model]
h0 = 8.437448913764524
gamma0 = 3.0

[observable]
kind = "fermi_dirac"
beta = "inf"
mu = 0.0

[scheme]
kind = "bop"
terminator = "vacuum"
interval_set = "[-1,-0.2]U[0.2,1]"

[sweep]
values = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14]
)"},
    {"cheb-metal", "Chebyshev projection on a metallic chain at moderate temperature",
     R"(seed = 1

[system]
kind = "chain"
n = 40
spacing = 1.0
pattern = [0.0]

[model]
h0 = 1.0
gamma0 = 1.0

[observable]
kind = "fermi_dirac"
beta = 10.0
mu = 0.0

[scheme]
kind = "chebyshev"

[sweep]
values = [10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60]
)"},
    {"truncation-default", "banded and neighborhood truncation sweep on the gapped chain",
     R"(seed = 1

[system]
kind = "chain"
n = 40
spacing = 1.0
pattern = [0.45, 0.0, -0.45]

[model]
h0 = 2.585709659315846   # 0.35 e^2
gamma0 = 2.0

[observable]
kind = "fermi_dirac"
beta = 100.0
mu = -0.43

[scheme]
kind = "fejer"
interval_set = "[-0.8,-0.68]U[-0.2,0.12]U[0.52,0.95]"
nodes = 40

[sweep]
values = [3, 4, 5, 6, 7, 8, 9, 10, 11, 12]
)"},
    {"locality-default", "decay of observable derivatives along the gapped chain",
     R"(seed = 1

[system]
kind = "chain"
n = 40
spacing = 1.0
pattern = [0.45, 0.0, -0.45]
center = 8

[model]
h0 = 2.585709659315846
gamma0 = 2.0

[observable]
kind = "fermi_dirac"
beta = 100.0
mu = -0.43

[scheme]
kind = "fejer"
interval_set = "[-0.8,-0.68]U[-0.2,0.12]U[0.52,0.95]"
nodes = 60

[sweep]
values = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18]
)"},
    {"scf-weak-coupling", "Newton SCF on the weakly coupled Yukawa chain",
     R"(seed = 1

[system]
kind = "dimerized_chain"
n = 12
spacing = 0.9
spacing2 = 1.3

[model]
h0 = 2.5
gamma0 = 2.0

[observable]
kind = "fermi_dirac"
beta = 100.0
mu = 0.0

[scheme]
kind = "fejer"
interval_set = "[-0.5,-0.19]U[0.28,0.8]"
nodes = 40

[scf]
solver = "newton"
onsite_poly = [0.0, 0.1, 0.2, 0.0]
yukawa_strength = 0.1
yukawa_tau = 1.0
reference_charge = 0.5
rho0 = 0.9
tol = 1e-12
max_iter = 50
)"},
    {"scf-zero-coupling", "density-independent potential: the solver stops after one step",
     R"(seed = 1

[system]
kind = "dimerized_chain"
n = 12
spacing = 0.9
spacing2 = 1.3

[model]
h0 = 2.5
gamma0 = 2.0

[observable]
kind = "fermi_dirac"
beta = 100.0
mu = 0.0

[scf]
solver = "newton"
onsite_poly = [0.05, 0.0, 0.0, 0.0]
yukawa_strength = 0.0
yukawa_tau = 1.0
reference_charge = 0.5
rho0 = 0.2
tol = 1e-12
max_iter = 20
)"},
    {"nodes-unit", "Fejer nodes and Green values on the unit interval",
     R"(seed = 1

[scheme]
kind = "fejer"
interval_set = "[-1,1]"

[sweep]
values = [5, 17, 33]
)"},
    {"vacuum-small", "vacuum cluster expansion against matched-order interpolation",
     R"(seed = 1

[system]
kind = "chain"
n = 10
spacing = 1.0
pattern = [0.21, -0.21]
center = 4

[model]
h0 = 8.437448913764524
gamma0 = 3.0

[observable]
kind = "fermi_dirac"
beta = "inf"
mu = 0.0

[scheme]
kind = "vacuum"
interval_set = "[-1,-0.2]U[0.2,1]"

[sweep]
values = [1, 2, 3, 4]
)"},
};

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all(std::begin(kPresets), std::end(kPresets));
    return all;
}

const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (name == p.name) return &p;
    return nullptr;
}

}  // namespace tbx

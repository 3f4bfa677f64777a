#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tbx {

// configuration / usage errors map to exit code 2
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimal TOML subset: [tables], key = value with strings, numbers, booleans
// and flat arrays. Keys are flattened to "table.key".
using TomlValue = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;

class Toml {
  public:
    static Toml parse(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    // accepts a number or the string "inf"
    double number_or_inf(const std::string& key, double fallback) const;
    std::string str(const std::string& key) const;
    std::string str_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;

    void set_number(const std::string& key, double value) { values_[key] = value; }

    // canonical text: sorted key=value lines, used for the config hash
    std::string canonical() const;

  private:
    std::map<std::string, TomlValue> values_;
};

std::uint64_t fnv1a64(const std::string& text);

struct Preset {
    const char* name;
    const char* description;
    const char* toml;
};

const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace tbx

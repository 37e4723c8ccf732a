#pragma once

// Key-value configuration files with [section] headers. Lines starting with
// '#' or ';' are comments. Recognised species/trap keys:
//
//   [species]  preset (rb87|typical), mass_u, a11_nm, a22_nm, a12_nm,
//              loss12_cm3_per_s, loss22_cm3_per_s
//   [trap]     d, q (integer or "inf"), rho0_um, r0_um
//
// Inline values override the preset. Other sections (grid, sweep, protocol)
// are read by the command-line front end.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "becmet/errors.hpp"
#include "becmet/physical_config.hpp"

namespace becmet {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text) {
    std::istringstream in(text);
    KeyValueConfig cfg;
    try {
      boost::property_tree::ini_parser::read_ini(in, cfg.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    KeyValueConfig cfg;
    try {
      boost::property_tree::ini_parser::read_ini(path, cfg.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return cfg;
  }

  std::string serialize() const {
    std::ostringstream out;
    boost::property_tree::ini_parser::write_ini(out, tree_);
    return out.str();
  }

  bool has(const std::string& section, const std::string& key) const {
    return tree_.get_child_optional(path(section, key)).has_value();
  }

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(path(section, key))) return trim(*v);
    return std::nullopt;
  }

  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    return get(section, key).value_or(fallback);
  }

  double number_or(const std::string& section, const std::string& key, double fallback) const {
    auto v = get(section, key);
    return v ? to_number(section, key, *v) : fallback;
  }

  std::int64_t integer_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const long long value = std::stoll(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return value;
    } catch (const std::exception&) {
      throw ConfigError("config [" + section + "] " + key + ": expected integer, got '" + *v + "'");
    }
  }

  /// Comma-separated list of numbers; empty when the key is absent.
  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    auto v = get(section, key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(to_number(section, key, item));
    }
    if (out.empty()) throw ConfigError("config [" + section + "] " + key + ": empty list");
    return out;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    tree_.put(path(section, key), value);
  }

 private:
  static boost::property_tree::ptree::path_type path(const std::string& section,
                                                     const std::string& key) {
    return boost::property_tree::ptree::path_type(section + "/" + key, '/');
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double to_number(const std::string& section, const std::string& key,
                          const std::string& text) {
    try {
      std::size_t used = 0;
      const double value = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
      return value;
    } catch (const std::exception&) {
      throw ConfigError("config [" + section + "] " + key + ": expected number, got '" + text +
                        "'");
    }
  }

  boost::property_tree::ptree tree_;
};

inline Species species_preset(const std::string& name) {
  if (name == "rb87") return rb87();
  if (name == "typical") return typical_species();
  throw ConfigError("unknown species preset '" + name + "' (expected rb87 or typical)");
}

inline Species species_from_config(const KeyValueConfig& cfg, const std::string& default_preset) {
  const Species base = species_preset(cfg.get_or("species", "preset", default_preset));
  try {
    return Species(cfg.number_or("species", "mass_u", base.mass() / units::u) * units::u,
                   cfg.number_or("species", "a11_nm", base.a11() / units::nm) * units::nm,
                   cfg.number_or("species", "a22_nm", base.a22() / units::nm) * units::nm,
                   cfg.number_or("species", "a12_nm", base.a12() / units::nm) * units::nm,
                   cfg.number_or("species", "loss12_cm3_per_s", base.gamma12_loss() / units::cm3) *
                       units::cm3,
                   cfg.number_or("species", "loss22_cm3_per_s", base.gamma22_loss() / units::cm3) *
                       units::cm3);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[species] ") + e.what());
  }
}

inline Hardness parse_hardness(const std::string& text) {
  if (text == "inf" || text == "hard" || text == "hard_wall") return Hardness::hard_wall();
  try {
    std::size_t used = 0;
    const int q = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return Hardness::power(q);
  } catch (const DomainError&) {
    throw ConfigError("[trap] q must be a positive integer or 'inf'");
  } catch (const std::exception&) {
    throw ConfigError("[trap] q must be a positive integer or 'inf', got '" + text + "'");
  }
}

inline TrapGeometry trap_from_config(const KeyValueConfig& cfg, double mass) {
  try {
    return trap_from_lengths(static_cast<int>(cfg.integer_or("trap", "d", 1)),
                             parse_hardness(cfg.get_or("trap", "q", "2")),
                             cfg.number_or("trap", "rho0_um", 1.0) * units::um,
                             cfg.number_or("trap", "r0_um", 100.0) * units::um, mass);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[trap] ") + e.what());
  }
}

}  // namespace becmet

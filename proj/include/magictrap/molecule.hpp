#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "magictrap/half_integer.hpp"

namespace magictrap {

/// Unit conversions. Energies are carried in h*MHz throughout; fields in
/// kV/cm and mT, laser intensity in kW/cm^2, polarizability in atomic units.
namespace units {
/// Light shift per atomic unit of polarizability: MHz per (W/cm^2).
inline constexpr double kAuPolToMhzPerWCm2 = 4.68645e-8;
/// Same, per kW/cm^2.
inline constexpr double kAuPolToMhzPerKwCm2 = 4.68645e-5;
/// Stark energy: MHz per (e a0 * kV/cm).
inline constexpr double kEa0KvcmToMhz = 1279.53;
/// Nuclear magneton: MHz per mT.
inline constexpr double kNuclearMagnetonMhzPerMt = 7.622593e-3;
}  // namespace units

struct DispersionTerm {
  double amplitude_au = 0.0;   // (e a0)^2 / E_h
  double pole_wavenumber = 0.0;  // cm^-1
};

/// Frequency-dependent parallel/perpendicular polarizabilities as sums of
/// single-pole terms  sum_j A_j / (1 - (nu/nu_j)^2).
struct DispersionFit {
  std::vector<DispersionTerm> terms_parallel;
  std::vector<DispersionTerm> terms_perpendicular;
  double trust_max_nu = 21000.0;  // cm^-1
};

struct MoleculeParams {
  std::string name;
  double b_rot_mhz = 0.0;    // rotational constant B_{v=0}, h*MHz
  double dipole_ea0 = 0.0;   // permanent dipole, e*a0
  HalfInteger spin_a;
  HalfInteger spin_b;
  double eqq_a_mhz = 0.0;    // nuclear quadrupole coupling (eqQ), h*MHz
  double eqq_b_mhz = 0.0;
  double g_a = 0.0;          // nuclear g-factors, nuclear-magneton convention
  double g_b = 0.0;
  DispersionFit dispersion;

  int spin_multiplicity() const {
    return (spin_a.twice() + 1) * (spin_b.twice() + 1);
  }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double alpha_in_mhz_per_kw_cm2(double alpha_au) {
  return alpha_au * units::kAuPolToMhzPerKwCm2;
}

/// DC Stark energy scale d*E in h*MHz for a dipole in e*a0 and field in kV/cm.
inline double stark_energy_scale(double dipole_ea0, double field_kvcm) {
  return dipole_ea0 * field_kvcm * units::kEa0KvcmToMhz;
}

namespace detail {
inline double eval_pole_sum(const std::vector<DispersionTerm>& terms, double nu) {
  double sum = 0.0;
  for (const auto& t : terms) {
    const double x = nu / t.pole_wavenumber;
    sum += t.amplitude_au / (1.0 - x * x);
  }
  return sum;
}

inline void check_poles(const std::vector<DispersionTerm>& terms, double nu) {
  for (const auto& t : terms) {
    if (std::abs(nu - t.pole_wavenumber) < 0.01 * t.pole_wavenumber) {
      throw std::domain_error("alpha_dispersion: frequency " +
                              std::to_string(nu) + " cm^-1 is within 1% of pole at " +
                              std::to_string(t.pole_wavenumber) + " cm^-1");
    }
  }
}
}  // namespace detail

/// (alpha_parallel, alpha_perpendicular) in atomic units at wavenumber nu.
inline std::pair<double, double> alpha_dispersion(const DispersionFit& fit,
                                                  double nu) {
  if (nu < 0.0 || nu > fit.trust_max_nu) {
    throw std::domain_error("alpha_dispersion: frequency " + std::to_string(nu) +
                            " cm^-1 outside trusted range [0, " +
                            std::to_string(fit.trust_max_nu) + "]");
  }
  detail::check_poles(fit.terms_parallel, nu);
  detail::check_poles(fit.terms_perpendicular, nu);
  return {detail::eval_pole_sum(fit.terms_parallel, nu),
          detail::eval_pole_sum(fit.terms_perpendicular, nu)};
}

namespace detail {

struct ConfigLine {
  int number;
  std::string section;
  std::string key;
  std::string value;
};

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const ConfigLine& line) {
  try {
    size_t pos = 0;
    const double v = std::stod(line.value, &pos);
    if (pos != line.value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line.number) + ": key '" +
                      line.key + "' has non-numeric value '" + line.value + "'");
  }
}

inline HalfInteger parse_spin(const ConfigLine& line) {
  try {
    const HalfInteger h = HalfInteger::parse(line.value);
    if (h.twice() < 0)
      throw std::invalid_argument("negative");
    return h;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line.number) + ": key '" +
                      line.key + "': spin must be half-integer and >= 0, got '" +
                      line.value + "'");
  }
}

}  // namespace detail

/// Parses the sectioned key-value molecule format:
///
///   [molecule]
///   name = 23Na40K
///   b_rot_mhz = 2821.7297
///   ...
///   [alpha_parallel]
///   term = 495.192, 13322.2
///   ...
///
/// Unknown keys, missing keys, and malformed numbers raise ConfigError
/// naming the key and line.
inline MoleculeParams parse_molecule_config(std::string_view text) {
  using detail::ConfigLine;

  std::vector<ConfigLine> lines;
  {
    std::istringstream in{std::string(text)};
    std::string raw;
    int number = 0;
    std::string section;
    while (std::getline(in, raw)) {
      ++number;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string s = detail::trim(raw);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ConfigError("line " + std::to_string(number) +
                            ": malformed section header '" + s + "'");
        section = s.substr(1, s.size() - 2);
        if (section != "molecule" && section != "alpha_parallel" &&
            section != "alpha_perpendicular")
          throw ConfigError("line " + std::to_string(number) +
                            ": unknown section '" + section + "'");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(number) +
                          ": expected 'key = value', got '" + s + "'");
      ConfigLine line;
      line.number = number;
      line.section = section;
      line.key = detail::trim(s.substr(0, eq));
      line.value = detail::trim(s.substr(eq + 1));
      if (line.section.empty())
        throw ConfigError("line " + std::to_string(number) + ": key '" +
                          line.key + "' appears before any section header");
      lines.push_back(std::move(line));
    }
  }

  MoleculeParams p;
  std::optional<double> trust;
  bool have_name = false, have_b = false, have_d = false, have_sa = false,
       have_sb = false, have_qa = false, have_qb = false, have_ga = false,
       have_gb = false;

  for (const auto& line : lines) {
    if (line.section == "molecule") {
      if (line.key == "name") {
        p.name = line.value;
        have_name = true;
      } else if (line.key == "b_rot_mhz") {
        p.b_rot_mhz = detail::parse_double(line);
        have_b = true;
      } else if (line.key == "dipole_ea0") {
        p.dipole_ea0 = detail::parse_double(line);
        have_d = true;
      } else if (line.key == "spin_a") {
        p.spin_a = detail::parse_spin(line);
        have_sa = true;
      } else if (line.key == "spin_b") {
        p.spin_b = detail::parse_spin(line);
        have_sb = true;
      } else if (line.key == "eqq_a_mhz") {
        p.eqq_a_mhz = detail::parse_double(line);
        have_qa = true;
      } else if (line.key == "eqq_b_mhz") {
        p.eqq_b_mhz = detail::parse_double(line);
        have_qb = true;
      } else if (line.key == "g_a") {
        p.g_a = detail::parse_double(line);
        have_ga = true;
      } else if (line.key == "g_b") {
        p.g_b = detail::parse_double(line);
        have_gb = true;
      } else {
        throw ConfigError("line " + std::to_string(line.number) +
                          ": unknown key '" + line.key + "' in [molecule]");
      }
    } else {
      auto& terms = (line.section == "alpha_parallel")
                        ? p.dispersion.terms_parallel
                        : p.dispersion.terms_perpendicular;
      if (line.key == "term") {
        const auto comma = line.value.find(',');
        if (comma == std::string::npos)
          throw ConfigError("line " + std::to_string(line.number) +
                            ": key 'term' needs 'amplitude, pole', got '" +
                            line.value + "'");
        ConfigLine amp{line.number, line.section, "term amplitude",
                       detail::trim(line.value.substr(0, comma))};
        ConfigLine pole{line.number, line.section, "term pole",
                        detail::trim(line.value.substr(comma + 1))};
        DispersionTerm t;
        t.amplitude_au = detail::parse_double(amp);
        t.pole_wavenumber = detail::parse_double(pole);
        if (t.amplitude_au <= 0.0 || t.pole_wavenumber <= 0.0)
          throw ConfigError("line " + std::to_string(line.number) +
                            ": dispersion term amplitude and pole must be > 0");
        terms.push_back(t);
      } else if (line.key == "trust_max_nu") {
        const double v = detail::parse_double(line);
        if (trust && *trust != v)
          throw ConfigError("line " + std::to_string(line.number) +
                            ": conflicting duplicate 'trust_max_nu'");
        trust = v;
      } else {
        throw ConfigError("line " + std::to_string(line.number) +
                          ": unknown key '" + line.key + "' in [" +
                          line.section + "]");
      }
    }
  }

  const auto require = [](bool have, const char* key) {
    if (!have)
      throw ConfigError(std::string("missing required key '") + key + "'");
  };
  require(have_name, "name");
  require(have_b, "b_rot_mhz");
  require(have_d, "dipole_ea0");
  require(have_sa, "spin_a");
  require(have_sb, "spin_b");
  require(have_qa, "eqq_a_mhz");
  require(have_qb, "eqq_b_mhz");
  require(have_ga, "g_a");
  require(have_gb, "g_b");
  if (p.dispersion.terms_parallel.empty())
    throw ConfigError("missing required key 'term' in [alpha_parallel]");
  if (p.dispersion.terms_perpendicular.empty())
    throw ConfigError("missing required key 'term' in [alpha_perpendicular]");

  if (trust) p.dispersion.trust_max_nu = *trust;
  if (p.name.empty()) throw ConfigError("key 'name' must be nonempty");
  if (p.b_rot_mhz <= 0.0) throw ConfigError("key 'b_rot_mhz' must be > 0");

  return p;
}

namespace detail {
inline std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

/// Inverse of parse_molecule_config; numeric values round-trip bit-exactly.
inline std::string serialize_molecule_config(const MoleculeParams& p) {
  std::ostringstream out;
  out << "[molecule]\n";
  out << "name = " << p.name << "\n";
  out << "b_rot_mhz = " << detail::fmt_full(p.b_rot_mhz) << "\n";
  out << "dipole_ea0 = " << detail::fmt_full(p.dipole_ea0) << "\n";
  out << "spin_a = " << p.spin_a.str() << "\n";
  out << "spin_b = " << p.spin_b.str() << "\n";
  out << "eqq_a_mhz = " << detail::fmt_full(p.eqq_a_mhz) << "\n";
  out << "eqq_b_mhz = " << detail::fmt_full(p.eqq_b_mhz) << "\n";
  out << "g_a = " << detail::fmt_full(p.g_a) << "\n";
  out << "g_b = " << detail::fmt_full(p.g_b) << "\n";
  out << "[alpha_parallel]\n";
  for (const auto& t : p.dispersion.terms_parallel)
    out << "term = " << detail::fmt_full(t.amplitude_au) << ", "
        << detail::fmt_full(t.pole_wavenumber) << "\n";
  out << "[alpha_perpendicular]\n";
  for (const auto& t : p.dispersion.terms_perpendicular)
    out << "term = " << detail::fmt_full(t.amplitude_au) << ", "
        << detail::fmt_full(t.pole_wavenumber) << "\n";
  out << "trust_max_nu = " << detail::fmt_full(p.dispersion.trust_max_nu) << "\n";
  return out.str();
}

}  // namespace magictrap

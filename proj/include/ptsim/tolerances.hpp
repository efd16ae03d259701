#pragma once

#include <cstdlib>
#include <string>
#include <string_view>

#include "ptsim/errors.hpp"

namespace ptsim {

/// Every numerical threshold used by the library, in one place so that the
/// library and its tests agree on the same numbers.
struct Tolerances {
  double herm = 1e-12;            // max |M - M^dag| accepted by herm_eig (scaled by max(1, |M|_max))
  double eig_orthonormality = 1e-10;
  double psd_clamp = 1e-10;       // eigenvalues in [-psd_clamp, 0) are clamped to 0
  double defect_floor = 5e-11;    // eigenvalues of I - G~G~^dag below this give a zero defect
  double unitary_input = 1e-8;    // transition_prob / reck_decompose input check
  double dilation_unitarity = 1e-8;
  double density_herm = 1e-10;
  double density_eig = 1e-10;
  double density_trace = 1e-9;
  double ep = 1e-9;               // |gamma - gamma_c| below this is the exceptional point
  double vanishing_support = 1e-12;
  double empty_filter = 1e-14;
  double heff_cap = 1e3;          // |H_eff|_max above this flags an asymptote
  int jacobi_max_sweeps = 100;
};

namespace detail {
inline Tolerances& tolerance_storage() {
  static Tolerances record;
  return record;
}
} // namespace detail

/// The active tolerance record. Read-only for library code.
inline const Tolerances& tolerances() { return detail::tolerance_storage(); }

/// Replace the active record. Call once at startup, before any worker
/// threads exist.
inline void set_tolerances(const Tolerances& t) { detail::tolerance_storage() = t; }

/// Parse an override list of the form "herm=1e-10,unitary_input=1e-6" on top
/// of `base`. Unknown keys or malformed numbers throw SpecError.
inline Tolerances parse_tolerance_overrides(std::string_view text, Tolerances base = {}) {
  auto set = [&](std::string_view key, double v) {
    if (key == "herm") base.herm = v;
    else if (key == "eig_orthonormality") base.eig_orthonormality = v;
    else if (key == "psd_clamp") base.psd_clamp = v;
    else if (key == "defect_floor") base.defect_floor = v;
    else if (key == "unitary_input") base.unitary_input = v;
    else if (key == "dilation_unitarity") base.dilation_unitarity = v;
    else if (key == "density_herm") base.density_herm = v;
    else if (key == "density_eig") base.density_eig = v;
    else if (key == "density_trace") base.density_trace = v;
    else if (key == "ep") base.ep = v;
    else if (key == "vanishing_support") base.vanishing_support = v;
    else if (key == "empty_filter") base.empty_filter = v;
    else if (key == "heff_cap") base.heff_cap = v;
    else if (key == "jacobi_max_sweeps") base.jacobi_max_sweeps = static_cast<int>(v);
    else throw SpecError("unknown tolerance key '" + std::string(key) + "'");
  };
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw SpecError("tolerance override '" + std::string(item) + "' is not key=value");
    std::string value(item.substr(eq + 1));
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !(v > 0.0))
      throw SpecError("tolerance value '" + value + "' must be a positive number");
    set(item.substr(0, eq), v);
  }
  return base;
}

} // namespace ptsim

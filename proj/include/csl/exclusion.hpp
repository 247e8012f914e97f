#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "csl/grid.hpp"

namespace csl {

/// Reference mass and action constant used to turn experimental numbers
/// into collapse-rate bounds. The interferometry rule counts mass in units
/// of m0 (one atomic mass unit by default).
struct BoundUnits {
  double m0 = si::kAtomicMassUnit;
  double hbar = si::kHbar;
};

/// Superposition survival over a flight of duration T requires
/// λ (m/m0)² T <= 1, using the saturated point-like decay rate.
inline double interferometry_bound(double mass, double flight_time, double r_C, BoundUnits units = {}) {
  require(mass > 0.0 && flight_time > 0.0 && r_C > 0.0, ErrorCode::InvalidArgument,
          "interferometry_bound: inputs must be positive");
  require(mass >= units.m0 * (1.0 - 1e-12), ErrorCode::InvalidArgument,
          "interferometry_bound: mass below the reference mass");
  const double ratio = units.m0 / mass;
  return ratio * ratio / flight_time;
}

/// Inverse of the three-dimensional heating law
/// dE/dt = (3λ/4)(hbar²/r_C²)(M/m0²).
inline double heating_bound(double power_limit, double mass, double r_C, BoundUnits units = {}) {
  require(power_limit > 0.0 && mass > 0.0 && r_C > 0.0, ErrorCode::InvalidArgument,
          "heating_bound: inputs must be positive");
  return power_limit * (4.0 / 3.0) * r_C * r_C * units.m0 * units.m0 / (units.hbar * units.hbar * mass);
}

enum class BoundKind { Interferometry, Heating, Quoted };

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::Interferometry: return "interferometry";
    case BoundKind::Heating: return "heating";
    case BoundKind::Quoted: return "quoted";
  }
  return "?";
}

inline BoundKind bound_kind_from_string(const std::string& s) {
  if (s == "interferometry") return BoundKind::Interferometry;
  if (s == "heating") return BoundKind::Heating;
  if (s == "quoted") return BoundKind::Quoted;
  throw Error(ErrorCode::InvalidArgument, "unknown bound kind '" + s + "'");
}

struct BoundRecord {
  std::string name;
  BoundKind kind = BoundKind::Quoted;
  double mass = 0.0;         // kg
  double flight_time = 0.0;  // s, interferometry
  double power_limit = 0.0;  // W, heating
  double r_C_assumed = 0.0;  // m
  double lambda_max = 0.0;   // 1/s at r_C_assumed
  std::string source;

  void validate() const {
    require(!name.empty(), ErrorCode::InvalidArgument, "bound record without a name");
    require(r_C_assumed > 0.0, ErrorCode::InvalidArgument, name + ": r_C_assumed must be positive");
    require(lambda_max > 0.0, ErrorCode::InvalidArgument, name + ": lambda_max must be positive");
    if (kind == BoundKind::Interferometry)
      require(mass > 0.0 && flight_time > 0.0, ErrorCode::InvalidArgument, name + ": interferometry needs mass and flight time");
    if (kind == BoundKind::Heating)
      require(mass > 0.0 && power_limit > 0.0, ErrorCode::InvalidArgument, name + ": heating needs mass and power limit");
  }

  /// The bound this record places on λ at correlation length r_C, or
  /// nothing when it does not apply there. Quoted numbers hold within one
  /// decade of their r_C_assumed.
  std::optional<double> bound_at(double r_C, BoundUnits units = {}) const {
    switch (kind) {
      case BoundKind::Interferometry: return interferometry_bound(mass, flight_time, r_C, units);
      case BoundKind::Heating: return heating_bound(power_limit, mass, r_C, units);
      case BoundKind::Quoted:
        if (std::abs(std::log10(r_C / r_C_assumed)) <= 1.0 + 1e-12) return lambda_max;
        return std::nullopt;
    }
    return std::nullopt;
  }
};

inline BoundRecord make_interferometry_record(std::string name, double mass, double flight_time, double r_C,
                                              std::string source, BoundUnits units = {}) {
  BoundRecord r{std::move(name), BoundKind::Interferometry, mass, flight_time, 0.0, r_C, 0.0, std::move(source)};
  r.lambda_max = interferometry_bound(mass, flight_time, r_C, units);
  return r;
}

inline BoundRecord make_heating_record(std::string name, double power_limit, double mass, double r_C,
                                       std::string source, BoundUnits units = {}) {
  BoundRecord r{std::move(name), BoundKind::Heating, mass, 0.0, power_limit, r_C, 0.0, std::move(source)};
  r.lambda_max = heating_bound(power_limit, mass, r_C, units);
  return r;
}

/// Standard collapse-model parameter point: λ = 1e-17 1/s, r_C = 1e-5 cm.
struct ModelPoint {
  double lambda = 1e-17;
  double r_C = 1e-7;  // m
};

inline ModelPoint csl_model_point() { return {}; }

/// Shipped bounds. The interferometry flight time of 1 ms is the
/// calibration that reproduces λ ~ 1e-5 for a 1e4 amu molecule with the
/// point-like (m/m0)² amplification; structure-dependent amplification is
/// not modelled.
inline std::vector<BoundRecord> builtin_bounds() {
  std::vector<BoundRecord> out;
  out.push_back(BoundRecord{"Ge-11keV", BoundKind::Quoted, 0.0, 0.0, 0.0, 1e-7, 1e-11,
                            "spontaneous 11 keV photon emission from Germanium; quoted bound"});
  out.push_back(make_interferometry_record(
      "interferometry-1e4amu", 1e4 * si::kAtomicMassUnit, 1e-3, 1e-7,
      "matter-wave interference of ~1e4 amu molecules; flight time 1 ms is a calibration assumption; "
      "point-like (m/m0)^2 amplification"));
  return out;
}

/// Log-spaced axis from lo to hi inclusive with n points; n = 0 is empty.
struct LogAxis {
  double lo = 1.0;
  double hi = 1.0;
  std::size_t n = 0;

  std::vector<double> values() const {
    std::vector<double> v;
    if (n == 0) return v;
    require(lo > 0.0 && hi > 0.0, ErrorCode::InvalidArgument, "log axis bounds must be positive");
    if (n == 1) return {lo};
    const double a = std::log10(lo), b = std::log10(hi);
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1)));
    return v;
  }
};

struct ExclusionGrid {
  std::vector<double> lambda_axis;
  std::vector<double> r_C_axis;
  // cell (i_rc, i_lambda) at index i_rc * lambda_axis.size() + i_lambda
  std::vector<unsigned char> excluded;
  std::vector<std::string> binding;  // empty when allowed

  std::size_t index(std::size_t i_rc, std::size_t i_lambda) const { return i_rc * lambda_axis.size() + i_lambda; }
  bool is_excluded(std::size_t i_rc, std::size_t i_lambda) const { return excluded[index(i_rc, i_lambda)] != 0; }
};

struct BindingBound {
  double lambda_max = std::numeric_limits<double>::infinity();
  std::string name;  // empty when no record applies
};

/// Smallest applicable bound at r_C.
inline BindingBound binding_bound(const std::vector<BoundRecord>& records, double r_C, BoundUnits units = {}) {
  BindingBound best;
  for (const auto& rec : records) {
    const auto b = rec.bound_at(r_C, units);
    if (b && *b < best.lambda_max) best = {*b, rec.name};
  }
  return best;
}

/// A cell is excluded iff its λ exceeds the smallest bound applicable at
/// its r_C.
inline ExclusionGrid exclusion_grid(const std::vector<BoundRecord>& records, const LogAxis& lambda_axis,
                                    const LogAxis& r_C_axis, BoundUnits units = {}) {
  require(!records.empty(), ErrorCode::EmptyRecordSet, "exclusion_grid: no bound records");
  for (const auto& r : records) r.validate();
  ExclusionGrid g;
  g.lambda_axis = lambda_axis.values();
  g.r_C_axis = r_C_axis.values();
  const std::size_t cells = g.lambda_axis.size() * g.r_C_axis.size();
  g.excluded.assign(cells, 0);
  g.binding.assign(cells, std::string());
  for (std::size_t i = 0; i < g.r_C_axis.size(); ++i) {
    const BindingBound b = binding_bound(records, g.r_C_axis[i], units);
    for (std::size_t j = 0; j < g.lambda_axis.size(); ++j) {
      if (g.lambda_axis[j] > b.lambda_max) {
        g.excluded[g.index(i, j)] = 1;
        g.binding[g.index(i, j)] = b.name;
      }
    }
  }
  return g;
}

}  // namespace csl

#pragma once

#include <cmath>
#include <string>

#include "csl/wavefunction.hpp"

namespace csl {

/// Two disjoint site intervals [begin, end) and the decision threshold.
struct RegionSpec {
  std::size_t left_begin = 0;
  std::size_t left_end = 0;
  std::size_t right_begin = 0;
  std::size_t right_end = 0;
  double epsilon = 0.01;

  void validate(const Grid1D& grid) const {
    require(left_begin < left_end && right_begin < right_end, ErrorCode::InvalidArgument,
            "RegionSpec: intervals must be non-empty");
    require(left_end <= grid.size() && right_end <= grid.size(), ErrorCode::GridMismatch,
            "RegionSpec: interval exceeds the grid");
    require(left_end <= right_begin || right_end <= left_begin, ErrorCode::InvalidArgument,
            "RegionSpec: intervals overlap");
    require(epsilon > 0.0 && epsilon < 0.5, ErrorCode::InvalidArgument, "RegionSpec: epsilon must lie in (0, 0.5)");
  }

  /// Splits the grid at the first site with x >= split_x: left is
  /// everything below, right everything above.
  static RegionSpec halves(const Grid1D& grid, double split_x, double epsilon = 0.01) {
    std::size_t cut = 0;
    while (cut < grid.size() && grid.x(cut) < split_x) ++cut;
    RegionSpec r{0, cut, cut, grid.size(), epsilon};
    r.validate(grid);
    return r;
  }
};

enum class Decision { Undecided, Left, Right };

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::Left: return "left";
    case Decision::Right: return "right";
    case Decision::Undecided: return "undecided";
  }
  return "?";
}

inline double left_probability(const Wavefunction& psi, const RegionSpec& r) {
  return psi.probability(r.left_begin, r.left_end);
}

inline double right_probability(const Wavefunction& psi, const RegionSpec& r) {
  return psi.probability(r.right_begin, r.right_end);
}

/// Band classification of P_left. Both bands are closed: P_left == 1 - eps
/// is Left and P_left == eps is Right.
inline Decision classify(double p_left, double epsilon) {
  if (p_left >= 1.0 - epsilon) return Decision::Left;
  if (p_left <= epsilon) return Decision::Right;
  return Decision::Undecided;
}

inline Decision is_collapsed(const Wavefunction& psi, const RegionSpec& regions) {
  regions.validate(psi.grid());
  return classify(left_probability(psi, regions), regions.epsilon);
}

}  // namespace csl

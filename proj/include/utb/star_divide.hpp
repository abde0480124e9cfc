#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "utb/laurent.hpp"

namespace utb {

struct StarDivision {
  LaurentPoly t;  // quotient
  LaurentPoly w;  // remainder, u = t*v + w
};

// True when v has a unique monomial of maximal and of minimal degree in axis.
bool satisfies_star(const LaurentPoly& v, int axis);
int star_axis(const LaurentPoly& v);  // first axis with the star condition, -1 if none

// Division of u by v along axis. The remainder has all axis-degrees in
// [min_axis(v), max_axis(v)); a nonzero multiple of v spans at least that
// width, so w == 0 exactly when v divides u.
StarDivision star_divide(const LaurentPoly& u, const LaurentPoly& v, int axis = 0);

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Basis b_1..b_d of Z^d (rows of `rows`) in which the first coordinate
// separates the points of a finite set W.
struct NewBasis {
  IntMatrix rows;
  std::int64_t scale = 1;  // 3S

  Exponent to_new(const Exponent& x) const;
  Exponent to_old(const Exponent& y) const;
  std::int64_t first_coordinate(const Exponent& x) const;
};

NewBasis new_basis(const std::vector<Exponent>& W, int d);

}  // namespace utb

#pragma once

#include <string>

#include "utb/laurent.hpp"

namespace utb {

// num/den over a field. No gcd is taken: normalization folds monomial
// denominators, makes the denominator's leading coefficient 1 and its
// minimal exponents 0, and cancels when one side divides the other exactly.
class RationalFunction {
 public:
  RationalFunction() = default;
  RationalFunction(CoefficientField f, int nvars);
  explicit RationalFunction(LaurentPoly num);
  RationalFunction(LaurentPoly num, LaurentPoly den);

  static RationalFunction constant(CoefficientField f, int nvars, const Coeff& c);
  static RationalFunction variable(CoefficientField f, int nvars, int i);

  const LaurentPoly& num() const { return num_; }
  const LaurentPoly& den() const { return den_; }
  const CoefficientField& field() const { return num_.field(); }
  int nvars() const { return num_.nvars(); }

  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const { return den_.is_one() && num_.is_one(); }
  bool is_laurent() const { return den_.is_one(); }
  bool is_monomial() const { return den_.is_one() && num_.is_monomial(); }
  bool is_constant() const { return den_.is_one() && num_.is_constant(); }
  std::size_t complexity() const { return num_.size() + den_.size(); }

  RationalFunction operator-() const;
  RationalFunction operator+(const RationalFunction& o) const;
  RationalFunction operator-(const RationalFunction& o) const;
  RationalFunction operator*(const RationalFunction& o) const;
  RationalFunction operator/(const RationalFunction& o) const;
  RationalFunction inverse() const;
  RationalFunction pow(int k) const;
  RationalFunction derivative(int axis) const;

  // exact: a/b == c/d iff a*d == b*c
  bool exact_equal(const RationalFunction& o) const;
  bool operator==(const RationalFunction& o) const { return exact_equal(o); }
  bool operator!=(const RationalFunction& o) const { return !exact_equal(o); }

  bool eval_mod(std::uint64_t q, const std::vector<std::uint64_t>& pt, std::uint64_t& out) const;

  std::string to_string() const;

 private:
  void normalize();
  LaurentPoly num_;
  LaurentPoly den_;
};

// the scalar interface used by the matrix template
inline RationalFunction zero_like(const RationalFunction& x) { return RationalFunction(x.field(), x.nvars()); }
inline RationalFunction one_like(const RationalFunction& x) {
  return RationalFunction::constant(x.field(), x.nvars(), 1);
}
inline bool is_zero(const RationalFunction& x) { return x.is_zero(); }
inline bool is_one(const RationalFunction& x) { return x.is_one(); }
inline RationalFunction inverse(const RationalFunction& x) { return x.inverse(); }

}  // namespace utb

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "utb/field.hpp"

namespace utb {

using Exponent = std::vector<int>;

struct Term {
  Exponent e;
  Coeff c;
};

// Sparse Laurent polynomial in nvars variables. Terms are kept sorted by
// exponent (lexicographic, ascending) with nonzero coefficients.
class LaurentPoly {
 public:
  LaurentPoly() = default;
  LaurentPoly(CoefficientField f, int nvars) : field_(f), nvars_(nvars) {}

  static LaurentPoly constant(CoefficientField f, int nvars, const Coeff& c);
  static LaurentPoly monomial(CoefficientField f, int nvars, Exponent e, const Coeff& c = 1);
  static LaurentPoly variable(CoefficientField f, int nvars, int i);
  static LaurentPoly from_terms(CoefficientField f, int nvars, std::vector<Term> terms);

  const CoefficientField& field() const { return field_; }
  int nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  bool is_zero() const { return terms_.empty(); }
  bool is_monomial() const { return terms_.size() == 1; }
  bool is_constant() const;
  bool is_one() const;
  const Term& leading() const { return terms_.back(); }
  const Term& trailing() const { return terms_.front(); }

  LaurentPoly operator-() const;
  LaurentPoly operator+(const LaurentPoly& o) const;
  LaurentPoly operator-(const LaurentPoly& o) const;
  LaurentPoly operator*(const LaurentPoly& o) const;
  LaurentPoly& operator+=(const LaurentPoly& o) { return *this = *this + o; }
  LaurentPoly& operator-=(const LaurentPoly& o) { return *this = *this - o; }
  LaurentPoly& operator*=(const LaurentPoly& o) { return *this = *this * o; }
  bool operator==(const LaurentPoly& o) const;
  bool operator!=(const LaurentPoly& o) const { return !(*this == o); }

  LaurentPoly scaled(const Coeff& c) const;
  LaurentPoly shifted(const Exponent& e) const;
  LaurentPoly pow(unsigned k) const;
  // x^e for a monomial, any sign of k
  LaurentPoly monomial_pow(int k) const;
  LaurentPoly derivative(int axis) const;
  LaurentPoly mapped(int new_nvars, const std::function<Exponent(const Exponent&)>& f) const;

  int min_exponent(int axis) const;
  int max_exponent(int axis) const;
  Exponent min_exponents() const;
  Exponent max_exponents() const;
  // variables that actually occur
  std::vector<int> support_variables() const;

  bool eval_mod(std::uint64_t q, const std::vector<std::uint64_t>& pt, std::uint64_t& out) const;

  std::string to_string() const;
  std::size_t hash() const;

 private:
  void check(const LaurentPoly& o) const;
  CoefficientField field_;
  int nvars_ = 0;
  std::vector<Term> terms_;
};

std::string format_monomial(const Coeff& c, const Exponent& e, bool leading);

}  // namespace utb

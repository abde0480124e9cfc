#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace utb {

using Coeff = mpq_class;

// Either Q or F_p with p a machine-word prime. F_p elements are kept as
// integers in [0, p).
class CoefficientField {
 public:
  CoefficientField() = default;
  static CoefficientField rationals() { return CoefficientField(); }
  static CoefficientField prime(std::uint64_t p);

  bool is_prime() const { return p_ != 0; }
  std::uint64_t characteristic() const { return p_; }

  void reduce(Coeff& c) const;
  Coeff normalized(const Coeff& c) const {
    Coeff r = c;
    reduce(r);
    return r;
  }
  Coeff add(const Coeff& a, const Coeff& b) const { return normalized(a + b); }
  Coeff sub(const Coeff& a, const Coeff& b) const { return normalized(a - b); }
  Coeff mul(const Coeff& a, const Coeff& b) const { return normalized(a * b); }
  Coeff inv(const Coeff& a) const;
  Coeff div(const Coeff& a, const Coeff& b) const { return mul(a, inv(b)); }
  Coeff neg(const Coeff& a) const { return normalized(-a); }

  std::string name() const;
  bool operator==(const CoefficientField& o) const { return p_ == o.p_; }
  bool operator!=(const CoefficientField& o) const { return p_ != o.p_; }

 private:
  explicit CoefficientField(std::uint64_t p) : p_(p) {}
  std::uint64_t p_ = 0;
};

bool is_prime_u64(std::uint64_t n);

// modular helpers shared by the fingerprint and sparse-rank code
inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}
inline std::uint64_t addmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  std::uint64_t s = a + b;
  return (s >= m || s < a) ? s - m : s;
}
inline std::uint64_t submod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return a >= b ? a - b : a + (m - b);
}
std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m);
std::uint64_t invmod(std::uint64_t a, std::uint64_t m);
// image of a rational in F_m; false if the denominator vanishes mod m
bool rational_mod(const Coeff& c, std::uint64_t m, std::uint64_t& out);

}  // namespace utb

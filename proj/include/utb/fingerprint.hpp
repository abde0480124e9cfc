#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "utb/rational_function.hpp"

namespace utb {

constexpr std::uint64_t kFingerprintPrime = 2305843009213693967ULL;  // nextprime(2^61)
constexpr int kFingerprintPoints = 3;

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);
std::uint64_t fnv1a(const std::string& s);
// stage seed derived from a run seed and a label
std::uint64_t derive_seed(std::uint64_t seed, const std::string& label);

// Large finite field receiving a ring homomorphism from the coefficient
// ring: F_q for characteristic 0, GF(p^k) with p^k near 2^60 for F_p.
// Elements are encoded in a uint64 (base-p digits for GF(p^k)).
class FingerprintRing {
 public:
  static const FingerprintRing& for_field(const CoefficientField& f);

  bool is_prime_field() const { return k_ == 1; }
  std::uint64_t characteristic() const { return p_; }
  int degree() const { return k_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t inv(std::uint64_t a) const;
  std::uint64_t pow(std::uint64_t a, std::int64_t e) const;
  // y[i] -= c * x[i] for i < n
  void axpy(std::uint64_t c, const std::uint64_t* x, std::uint64_t* y, std::size_t n) const;
  bool embed(const Coeff& c, std::uint64_t& out) const;
  std::uint64_t random_nonzero(std::uint64_t& state) const;

  bool eval(const LaurentPoly& p, const std::vector<std::uint64_t>& pt, std::uint64_t& out) const;
  bool eval(const RationalFunction& r, const std::vector<std::uint64_t>& pt, std::uint64_t& out) const;

 private:
  FingerprintRing(std::uint64_t p, int k);
  std::uint64_t gf_mul(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t fold2(unsigned __int128 prod) const;
  std::uint64_t p_;
  int k_;
  std::uint64_t order_minus_one_;
  std::vector<std::uint64_t> modulus_;  // monic irreducible of degree k, low coefficients
  std::uint64_t mod2_ = 0;              // p = 2: low bits of the modulus
};

// Deterministic stream of random evaluation points.
class FingerprintContext {
 public:
  explicit FingerprintContext(std::uint64_t seed = 0x243f6a8885a308d3ULL) : seed_(seed) {}
  std::uint64_t seed() const { return seed_; }
  // nonzero coordinates, so Laurent monomials never vanish
  std::vector<std::uint64_t> point(std::size_t index, int nvars, const FingerprintRing& ring) const;

 private:
  std::uint64_t seed_;
};

enum class EqualityMode { Exact, Randomized };

bool rf_equal(const RationalFunction& a, const RationalFunction& b, EqualityMode mode,
              const FingerprintContext& ctx = FingerprintContext());

// Values of some rational function at three fixed points; componentwise
// arithmetic is the image of a ring homomorphism.
struct Fp {
  const FingerprintRing* ring = nullptr;
  std::array<std::uint64_t, kFingerprintPoints> v{};

  static Fp constant(const FingerprintRing* r, std::uint64_t c) {
    Fp x;
    x.ring = r;
    x.v.fill(c);
    return x;
  }
  Fp operator+(const Fp& o) const {
    Fp r{ring, {}};
    for (int k = 0; k < kFingerprintPoints; ++k) r.v[k] = ring->add(v[k], o.v[k]);
    return r;
  }
  Fp operator-(const Fp& o) const {
    Fp r{ring, {}};
    for (int k = 0; k < kFingerprintPoints; ++k) r.v[k] = ring->sub(v[k], o.v[k]);
    return r;
  }
  Fp operator-() const { return Fp{ring, {}} - *this; }
  Fp operator*(const Fp& o) const {
    Fp r{ring, {}};
    for (int k = 0; k < kFingerprintPoints; ++k) r.v[k] = ring->mul(v[k], o.v[k]);
    return r;
  }
  Fp& operator+=(const Fp& o) { return *this = *this + o; }
  bool operator==(const Fp& o) const { return v == o.v; }
  bool operator!=(const Fp& o) const { return v != o.v; }
};

inline Fp zero_like(const Fp& x) { return Fp{x.ring, {}}; }
inline Fp one_like(const Fp& x) { return Fp::constant(x.ring, 1); }
inline bool is_zero(const Fp& x) {
  for (auto c : x.v)
    if (c) return false;
  return true;
}
inline bool is_one(const Fp& x) {
  for (auto c : x.v)
    if (c != 1) return false;
  return true;
}
bool has_zero_component(const Fp& x);
Fp inverse(const Fp& x);

// Evaluation of r at kFingerprintPoints points; false at a pole.
bool fingerprint_at(const RationalFunction& r, const FingerprintRing& ring,
                    const std::vector<std::vector<std::uint64_t>>& pts, Fp& out);

}  // namespace utb

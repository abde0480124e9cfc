#include "utb/fingerprint.hpp"

#include <map>
#if defined(__x86_64__)
#include <immintrin.h>
#endif
#include <memory>
#include <mutex>

#include "utb/error.hpp"

namespace utb {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& label) { return mix64(seed ^ fnv1a(label)); }

namespace {

using Poly = std::vector<std::uint64_t>;  // dense, low degree first, over F_p

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& f, std::uint64_t p) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = addmod(r[i + j], mulmod(a[i], b[j], p), p);
  }
  const std::size_t k = f.size() - 1;  // f monic
  for (std::size_t d = r.size(); d-- > k;) {
    std::uint64_t c = r[d];
    if (!c) continue;
    for (std::size_t i = 0; i <= k; ++i) r[d - k + i] = submod(r[d - k + i], mulmod(c, f[i], p), p);
  }
  trim(r);
  return r;
}

Poly poly_powmod(Poly base, std::uint64_t e, const Poly& f, std::uint64_t p) {
  Poly r{1};
  while (e) {
    if (e & 1) r = poly_mulmod(r, base, f, p);
    base = poly_mulmod(base, base, f, p);
    e >>= 1;
  }
  return r;
}

Poly poly_mod(Poly a, const Poly& b, std::uint64_t p) {
  trim(a);
  std::uint64_t linv = invmod(b.back(), p);
  while (a.size() >= b.size()) {
    std::uint64_t c = mulmod(a.back(), linv, p);
    std::size_t off = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[off + i] = submod(a[off + i], mulmod(c, b[i], p), p);
    trim(a);
  }
  return a;
}

Poly poly_gcd(Poly a, Poly b, std::uint64_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

bool is_prime_int(int k) {
  if (k < 2) return false;
  for (int d = 2; d * d <= k; ++d)
    if (k % d == 0) return false;
  return true;
}

// f of prime degree k is irreducible iff x^(p^k) = x mod f and f has no root
bool irreducible_prime_degree(const Poly& f, std::uint64_t p) {
  const int k = static_cast<int>(f.size()) - 1;
  Poly x{0, 1};
  Poly xp = poly_powmod(x, p, f, p);
  Poly diff = xp;
  diff.resize(std::max<std::size_t>(diff.size(), 2), 0);
  diff[1] = submod(diff[1], 1, p);
  trim(diff);
  if (diff.empty()) return false;
  Poly g = poly_gcd(f, diff, p);
  if (g.size() > 1) return false;
  Poly y = xp;
  for (int i = 1; i < k; ++i) y = poly_powmod(y, p, f, p);
  trim(y);
  return y == x;
}

}  // namespace

FingerprintRing::FingerprintRing(std::uint64_t p, int k) : p_(p), k_(k) {
  if (k == 1) {
    order_minus_one_ = p - 1;
    return;
  }
  std::uint64_t order = 1;
  for (int i = 0; i < k; ++i) order *= p;
  order_minus_one_ = order - 1;
  if (p == 2) {
    // low-weight modulus: reduction is a few shifts
    auto try_mod = [&](std::vector<int> bits) {
      Poly f(static_cast<std::size_t>(k) + 1, 0);
      f[0] = f[static_cast<std::size_t>(k)] = 1;
      for (int b : bits) f[static_cast<std::size_t>(b)] = 1;
      if (!irreducible_prime_degree(f, 2)) return false;
      modulus_ = f;
      return true;
    };
    bool found = false;
    for (int a = 1; a < k && !found; ++a) found = try_mod({a});
    for (int c = 3; c < k && !found; ++c)
      for (int b = 2; b < c && !found; ++b)
        for (int a = 1; a < b && !found; ++a) found = try_mod({a, b, c});
    for (int i = 0; i < k; ++i)
      if (modulus_[static_cast<std::size_t>(i)]) mod2_ |= 1ULL << i;
    return;
  }
  std::uint64_t s = 0x51ed270b27a5c3d1ULL ^ p;
  for (;;) {
    Poly f(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i < k; ++i) f[static_cast<std::size_t>(i)] = splitmix64(s) % p;
    f[static_cast<std::size_t>(k)] = 1;
    if (f[0] == 0) continue;
    if (irreducible_prime_degree(f, p)) {
      modulus_ = f;
      break;
    }
  }
}

const FingerprintRing& FingerprintRing::for_field(const CoefficientField& f) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::unique_ptr<FingerprintRing>> cache;
  std::lock_guard<std::mutex> lock(mu);
  std::uint64_t p = f.characteristic();
  auto it = cache.find(p);
  if (it != cache.end()) return *it->second;
  std::unique_ptr<FingerprintRing> r;
  if (p == 0) {
    r.reset(new FingerprintRing(kFingerprintPrime, 1));
  } else if (p > (1ULL << 40)) {
    r.reset(new FingerprintRing(p, 1));
  } else {
    // largest prime k with p^k < 2^62
    int k = 1;
    long double acc = static_cast<long double>(p);
    while (acc * static_cast<long double>(p) < static_cast<long double>(1ULL << 62)) {
      acc *= static_cast<long double>(p);
      ++k;
    }
    while (!is_prime_int(k)) --k;
    r.reset(new FingerprintRing(p, k));
  }
  auto& ref = *r;
  cache.emplace(p, std::move(r));
  return ref;
}

std::uint64_t FingerprintRing::add(std::uint64_t a, std::uint64_t b) const {
  if (k_ == 1) return addmod(a, b, p_);
  if (p_ == 2) return a ^ b;
  std::uint64_t r = 0, place = 1;
  for (int i = 0; i < k_; ++i) {
    std::uint64_t d = (a % p_ + b % p_) % p_;
    r += d * place;
    a /= p_;
    b /= p_;
    place *= p_;
  }
  return r;
}

std::uint64_t FingerprintRing::sub(std::uint64_t a, std::uint64_t b) const {
  if (k_ == 1) return submod(a, b, p_);
  if (p_ == 2) return a ^ b;
  std::uint64_t r = 0, place = 1;
  for (int i = 0; i < k_; ++i) {
    std::uint64_t d = (a % p_ + p_ - b % p_) % p_;
    r += d * place;
    a /= p_;
    b /= p_;
    place *= p_;
  }
  return r;
}

namespace {

#if defined(__x86_64__)
__attribute__((target("pclmul,sse4.1"))) unsigned __int128 clmul_hw(std::uint64_t a, std::uint64_t b) {
  const __m128i r = _mm_clmulepi64_si128(_mm_cvtsi64_si128(static_cast<long long>(a)),
                                         _mm_cvtsi64_si128(static_cast<long long>(b)), 0);
  return (static_cast<unsigned __int128>(static_cast<std::uint64_t>(_mm_extract_epi64(r, 1))) << 64) |
         static_cast<std::uint64_t>(_mm_cvtsi128_si64(r));
}
const bool kHasClmul = __builtin_cpu_supports("pclmul");
#else
unsigned __int128 clmul_hw(std::uint64_t, std::uint64_t) { return 0; }
const bool kHasClmul = false;
#endif

// q = 2^61 + 15, so 2^61 = -15 (mod q)
std::uint64_t mulmod_q(std::uint64_t a, std::uint64_t b) {
  constexpr std::uint64_t q = kFingerprintPrime;
  constexpr std::uint64_t mask = (std::uint64_t{1} << 61) - 1;
  const unsigned __int128 x = static_cast<unsigned __int128>(a) * b;
  const std::uint64_t lo = static_cast<std::uint64_t>(x) & mask;
  const unsigned __int128 t = static_cast<unsigned __int128>(static_cast<std::uint64_t>(x >> 61)) * 15;
  const std::uint64_t tlo = static_cast<std::uint64_t>(t) & mask;
  const std::uint64_t thi = static_cast<std::uint64_t>(t >> 61);  // < 2^6
  // x = lo - tlo + 15*thi (mod q), each piece below 2^61 + 2^10
  std::uint64_t r = lo + 15 * thi;
  r = r >= tlo ? r - tlo : r + q - tlo;
  while (r >= q) r -= q;
  return r;
}

}  // namespace

std::uint64_t FingerprintRing::mul(std::uint64_t a, std::uint64_t b) const {
  if (k_ == 1) return p_ == kFingerprintPrime ? mulmod_q(a, b) : mulmod(a, b, p_);
  return gf_mul(a, b);
}

std::uint64_t FingerprintRing::gf_mul(std::uint64_t a, std::uint64_t b) const {
  if (p_ == 2 && kHasClmul) return fold2(clmul_hw(a, b));
  if (p_ == 2) {
    // 4-bit windowed carry-less product, then fold the high part through
    // the sparse tail of the modulus
    unsigned __int128 tab[16];
    tab[0] = 0;
    for (int i = 1; i < 16; ++i)
      tab[i] = (i & 1) ? tab[i ^ 1] ^ static_cast<unsigned __int128>(a) : tab[i >> 1] << 1;
    unsigned __int128 prod = 0;
    for (int sh = 60; sh >= 0; sh -= 4) prod = (prod << 4) ^ tab[(b >> sh) & 15];
    const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << k_) - 1;
    while (prod >> k_) {
      const unsigned __int128 h = prod >> k_;
      prod &= mask;
      for (std::uint64_t t = mod2_; t; t &= t - 1) prod ^= h << __builtin_ctzll(t);
    }
    return static_cast<std::uint64_t>(prod);
  }
  std::uint64_t da[64], db[64], r[128] = {0};
  for (int i = 0; i < k_; ++i) {
    da[i] = a % p_;
    a /= p_;
    db[i] = b % p_;
    b /= p_;
  }
  if (p_ < (1u << 20)) {
    // digit products and their sums stay far below 2^64
    for (int i = 0; i < k_; ++i) {
      if (!da[i]) continue;
      for (int j = 0; j < k_; ++j) r[i + j] += da[i] * db[j];
    }
    for (int d = 2 * k_ - 2; d >= 0; --d) {
      const std::uint64_t c = r[d] % p_;
      r[d] = c;
      if (d < k_ || !c) continue;
      for (int i = 0; i < k_; ++i) r[d - k_ + i] += (p_ - modulus_[static_cast<std::size_t>(i)]) * c;
      r[d] = 0;
    }
    std::uint64_t out = 0;
    for (int i = k_ - 1; i >= 0; --i) out = out * p_ + r[i];
    return out;
  }
  for (int i = 0; i < k_; ++i) {
    if (!da[i]) continue;
    for (int j = 0; j < k_; ++j) r[i + j] = addmod(r[i + j], mulmod(da[i], db[j], p_), p_);
  }
  for (int d = 2 * k_ - 2; d >= k_; --d) {
    std::uint64_t c = r[d];
    if (!c) continue;
    for (int i = 0; i <= k_; ++i)
      r[d - k_ + i] = submod(r[d - k_ + i], mulmod(c, modulus_[static_cast<std::size_t>(i)], p_), p_);
  }
  std::uint64_t out = 0;
  for (int i = k_ - 1; i >= 0; --i) out = out * p_ + r[i];
  return out;
}

std::uint64_t FingerprintRing::fold2(unsigned __int128 prod) const {
  const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << k_) - 1;
  while (prod >> k_) {
    const unsigned __int128 h = prod >> k_;
    prod &= mask;
    for (std::uint64_t t = mod2_; t; t &= t - 1) prod ^= h << __builtin_ctzll(t);
  }
  return static_cast<std::uint64_t>(prod);
}

void FingerprintRing::axpy(std::uint64_t c, const std::uint64_t* x, std::uint64_t* y, std::size_t n) const {
  if (k_ == 1 && p_ == kFingerprintPrime) {
    for (std::size_t i = 0; i < n; ++i)
      if (x[i]) y[i] = submod(y[i], mulmod_q(c, x[i]), p_);
    return;
  }
  if (p_ == 2 && kHasClmul) {
    // two folds through the sparse modulus tail bring any product below 2^k
    const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << k_) - 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (!x[j]) continue;
      unsigned __int128 r = clmul_hw(c, x[j]);
      r = (r & mask) ^ clmul_hw(static_cast<std::uint64_t>(r >> k_), mod2_);
      r = (r & mask) ^ clmul_hw(static_cast<std::uint64_t>(r >> k_), mod2_);
      y[j] ^= static_cast<std::uint64_t>(r);
    }
    return;
  }
  if (p_ == 2) {
    unsigned __int128 tab[16];
    tab[0] = 0;
    for (int i = 1; i < 16; ++i)
      tab[i] = (i & 1) ? tab[i ^ 1] ^ static_cast<unsigned __int128>(c) : tab[i >> 1] << 1;
    const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << k_) - 1;
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t b = x[j];
      if (!b) continue;
      unsigned __int128 prod = 0;
      for (int sh = 60; sh >= 0; sh -= 4) prod = (prod << 4) ^ tab[(b >> sh) & 15];
      while (prod >> k_) {
        const unsigned __int128 h = prod >> k_;
        prod &= mask;
        for (std::uint64_t t = mod2_; t; t &= t - 1) prod ^= h << __builtin_ctzll(t);
      }
      y[j] ^= static_cast<std::uint64_t>(prod);
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (x[i]) y[i] = sub(y[i], mul(c, x[i]));
}

std::uint64_t FingerprintRing::pow(std::uint64_t a, std::int64_t e) const {
  if (e < 0) {
    a = inv(a);
    e = -e;
  }
  std::uint64_t ee = static_cast<std::uint64_t>(e) % order_minus_one_;
  std::uint64_t r = 1;
  while (ee) {
    if (ee & 1) r = mul(r, a);
    a = mul(a, a);
    ee >>= 1;
  }
  return r;
}

std::uint64_t FingerprintRing::inv(std::uint64_t a) const {
  if (a == 0) throw Error(ErrorKind::DivisionByZero, "inverse of 0 in fingerprint field");
  if (k_ == 1) return invmod(a, p_);
  std::uint64_t e = order_minus_one_ - 1;
  std::uint64_t r = 1;
  while (e) {
    if (e & 1) r = mul(r, a);
    a = mul(a, a);
    e >>= 1;
  }
  return r;
}

bool FingerprintRing::embed(const Coeff& c, std::uint64_t& out) const {
  // constants of F_p sit in digit 0; rationals map into F_q
  return rational_mod(c, p_, out);
}

std::uint64_t FingerprintRing::random_nonzero(std::uint64_t& state) const {
  for (;;) {
    std::uint64_t x = splitmix64(state) % (order_minus_one_ + 1);
    if (x) return x;
  }
}

bool FingerprintRing::eval(const LaurentPoly& poly, const std::vector<std::uint64_t>& pt, std::uint64_t& out) const {
  std::uint64_t acc = 0;
  for (const auto& t : poly.terms()) {
    std::uint64_t c;
    if (!embed(t.c, c)) return false;
    for (int k = 0; k < poly.nvars(); ++k) {
      int e = t.e[static_cast<std::size_t>(k)];
      if (!e) continue;
      std::uint64_t x = pt[static_cast<std::size_t>(k)];
      if (x == 0) {
        if (e < 0) return false;
        c = 0;
        break;
      }
      c = mul(c, pow(x, e));
    }
    acc = add(acc, c);
  }
  out = acc;
  return true;
}

bool FingerprintRing::eval(const RationalFunction& r, const std::vector<std::uint64_t>& pt, std::uint64_t& out) const {
  std::uint64_t a, b;
  if (!eval(r.num(), pt, a) || !eval(r.den(), pt, b) || b == 0) return false;
  out = mul(a, inv(b));
  return true;
}

std::vector<std::uint64_t> FingerprintContext::point(std::size_t index, int nvars, const FingerprintRing& ring) const {
  std::uint64_t s = mix64(seed_ ^ mix64(0x9000 + index));
  std::vector<std::uint64_t> p(static_cast<std::size_t>(nvars));
  for (auto& c : p) c = ring.random_nonzero(s);
  return p;
}

bool rf_equal(const RationalFunction& a, const RationalFunction& b, EqualityMode mode, const FingerprintContext& ctx) {
  if (a.field() != b.field()) throw Error(ErrorKind::FieldMismatch, "equality");
  if (a.nvars() != b.nvars()) throw Error(ErrorKind::ArityMismatch, "equality");
  if (mode == EqualityMode::Exact) return a.exact_equal(b);
  const FingerprintRing& ring = FingerprintRing::for_field(a.field());
  int agree = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    auto pt = ctx.point(i, a.nvars(), ring);
    std::uint64_t x, y;
    if (!ring.eval(a, pt, x) || !ring.eval(b, pt, y)) continue;
    if (x != y) return false;
    if (++agree == kFingerprintPoints) return true;
  }
  throw Error(ErrorKind::AllPoles, "no usable evaluation points for equality test");
}

bool has_zero_component(const Fp& x) {
  for (auto c : x.v)
    if (!c) return true;
  return false;
}

Fp inverse(const Fp& x) {
  Fp r{x.ring, {}};
  for (int k = 0; k < kFingerprintPoints; ++k) r.v[k] = x.ring->inv(x.v[k]);
  return r;
}

bool fingerprint_at(const RationalFunction& r, const FingerprintRing& ring,
                    const std::vector<std::vector<std::uint64_t>>& pts, Fp& out) {
  out.ring = &ring;
  for (int k = 0; k < kFingerprintPoints; ++k)
    if (!ring.eval(r, pts[static_cast<std::size_t>(k)], out.v[static_cast<std::size_t>(k)])) return false;
  return true;
}

}  // namespace utb

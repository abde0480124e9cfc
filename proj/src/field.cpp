#include "utb/field.hpp"

#include "utb/error.hpp"

namespace utb {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::FieldMismatch: return "field mismatch";
    case ErrorKind::ArityMismatch: return "arity mismatch";
    case ErrorKind::DivisionByZero: return "division by zero";
    case ErrorKind::StarCondition: return "star condition violated";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::AllPoles: return "all sampled points are poles";
    case ErrorKind::UnknownGenerator: return "unknown generator";
    case ErrorKind::NotUpperTriangular: return "not upper triangular";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::UnitRelation: return "relation is a unit";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Admissibility: return "relation not admissible";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Blowup: return "expression blowup";
    case ErrorKind::Budget: return "budget exceeded";
  }
  return "error";
}

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // deterministic Miller-Rabin bases for 64-bit inputs
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool comp = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        comp = false;
        break;
      }
    }
    if (comp) return false;
  }
  return true;
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
  if (a % m == 0) throw Error(ErrorKind::DivisionByZero, "inverse of 0 mod " + std::to_string(m));
  return powmod(a, m - 2, m);
}

bool rational_mod(const Coeff& c, std::uint64_t m, std::uint64_t& out) {
  std::uint64_t nn = mpz_fdiv_ui(c.get_num_mpz_t(), m);
  std::uint64_t dd = mpz_fdiv_ui(c.get_den_mpz_t(), m);
  if (dd == 0) return false;
  out = mulmod(nn, invmod(dd, m), m);
  return true;
}

CoefficientField CoefficientField::prime(std::uint64_t p) {
  if (!is_prime_u64(p)) throw Error(ErrorKind::InvalidArgument, std::to_string(p) + " is not prime");
  if (p >= (1ULL << 62)) throw Error(ErrorKind::InvalidArgument, "prime too large");
  return CoefficientField(p);
}

void CoefficientField::reduce(Coeff& c) const {
  if (!p_) return;
  if (c.get_den() == 1) {
    if (mpz_sgn(c.get_num_mpz_t()) >= 0 && mpz_cmp_ui(c.get_num_mpz_t(), p_) < 0) return;
    c = static_cast<unsigned long>(mpz_fdiv_ui(c.get_num_mpz_t(), p_));
    return;
  }
  mpz_class m(static_cast<unsigned long>(p_));
  mpz_class d = c.get_den() % m;
  if (d == 0) throw Error(ErrorKind::DivisionByZero, "denominator vanishes mod " + std::to_string(p_));
  mpz_class dinv;
  mpz_invert(dinv.get_mpz_t(), d.get_mpz_t(), m.get_mpz_t());
  mpz_class r = (c.get_num() * dinv) % m;
  if (r < 0) r += m;
  c = r;
}

Coeff CoefficientField::inv(const Coeff& a) const {
  Coeff r = normalized(a);
  if (r == 0) throw Error(ErrorKind::DivisionByZero, "inverse of zero coefficient");
  if (!p_) return 1 / r;
  mpz_class m(static_cast<unsigned long>(p_));
  mpz_class out;
  mpz_invert(out.get_mpz_t(), r.get_num().get_mpz_t(), m.get_mpz_t());
  return Coeff(out);
}

std::string CoefficientField::name() const { return p_ ? "F_" + std::to_string(p_) : "Q"; }

}  // namespace utb

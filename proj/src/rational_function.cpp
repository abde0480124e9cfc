#include "utb/rational_function.hpp"

#include "utb/error.hpp"
#include "utb/star_divide.hpp"

namespace utb {

namespace {

constexpr std::size_t kCancelLimit = 400;
constexpr std::size_t kBlowupLimit = 200000;

// exact quotient a/b when b divides a, tested by star division
bool try_exact_divide(const LaurentPoly& a, const LaurentPoly& b, LaurentPoly& q) {
  if (b.size() > kCancelLimit || a.size() > kCancelLimit) return false;
  int axis = star_axis(b);
  if (axis < 0) return false;
  StarDivision d = star_divide(a, b, axis);
  if (!d.w.is_zero()) return false;
  q = std::move(d.t);
  return true;
}

}  // namespace

RationalFunction::RationalFunction(CoefficientField f, int nvars)
    : num_(f, nvars), den_(LaurentPoly::constant(f, nvars, 1)) {}

RationalFunction::RationalFunction(LaurentPoly num)
    : num_(std::move(num)), den_(LaurentPoly::constant(num_.field(), num_.nvars(), 1)) {}

RationalFunction::RationalFunction(LaurentPoly num, LaurentPoly den) : num_(std::move(num)), den_(std::move(den)) {
  if (num_.field() != den_.field()) throw Error(ErrorKind::FieldMismatch, "numerator and denominator");
  if (num_.nvars() != den_.nvars()) throw Error(ErrorKind::ArityMismatch, "numerator and denominator");
  normalize();
}

RationalFunction RationalFunction::constant(CoefficientField f, int nvars, const Coeff& c) {
  return RationalFunction(LaurentPoly::constant(f, nvars, c));
}

RationalFunction RationalFunction::variable(CoefficientField f, int nvars, int i) {
  return RationalFunction(LaurentPoly::variable(f, nvars, i));
}

void RationalFunction::normalize() {
  const CoefficientField& f = num_.field();
  const int n = num_.nvars();
  if (den_.is_zero()) throw Error(ErrorKind::DivisionByZero, "zero denominator");
  if (num_.is_zero()) {
    den_ = LaurentPoly::constant(f, n, 1);
    return;
  }
  if (num_.size() + den_.size() > kBlowupLimit) throw Error(ErrorKind::Blowup, "rational function too large");
  if (den_.is_monomial()) {
    num_ = num_ * den_.monomial_pow(-1);
    den_ = LaurentPoly::constant(f, n, 1);
    return;
  }
  Coeff lc = f.inv(den_.leading().c);
  Exponent lo = den_.min_exponents();
  for (int& v : lo) v = -v;
  num_ = num_.shifted(lo).scaled(lc);
  den_ = den_.shifted(lo).scaled(lc);
  LaurentPoly q;
  if (try_exact_divide(num_, den_, q)) {
    num_ = std::move(q);
    den_ = LaurentPoly::constant(f, n, 1);
    return;
  }
  if (num_.size() > 1 && try_exact_divide(den_, num_, q)) {
    // num/den = 1/q
    num_ = LaurentPoly::constant(f, n, 1);
    den_ = std::move(q);
    normalize();
  }
}

RationalFunction RationalFunction::operator-() const {
  RationalFunction r = *this;
  r.num_ = -num_;
  return r;
}

RationalFunction RationalFunction::operator+(const RationalFunction& o) const {
  if (den_ == o.den_) return RationalFunction(num_ + o.num_, den_);
  if (o.den_.is_one()) return RationalFunction(num_ + o.num_ * den_, den_);
  if (den_.is_one()) return RationalFunction(num_ * o.den_ + o.num_, o.den_);
  return RationalFunction(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

RationalFunction RationalFunction::operator-(const RationalFunction& o) const { return *this + (-o); }

RationalFunction RationalFunction::operator*(const RationalFunction& o) const {
  if (field() != o.field()) throw Error(ErrorKind::FieldMismatch, field().name() + " vs " + o.field().name());
  if (nvars() != o.nvars()) throw Error(ErrorKind::ArityMismatch, "product");
  if (is_zero() || o.is_zero()) return RationalFunction(field(), nvars());
  if (den_.is_one() && o.den_.is_one()) return RationalFunction(num_ * o.num_);
  // cross-cancel identical factors before multiplying out
  if (den_ == o.num_) return RationalFunction(num_, o.den_);
  if (num_ == o.den_) return RationalFunction(o.num_, den_);
  return RationalFunction(num_ * o.num_, den_ * o.den_);
}

RationalFunction RationalFunction::inverse() const {
  if (is_zero()) throw Error(ErrorKind::DivisionByZero, "inverse of zero");
  return RationalFunction(den_, num_);
}

RationalFunction RationalFunction::operator/(const RationalFunction& o) const { return *this * o.inverse(); }

RationalFunction RationalFunction::pow(int k) const {
  RationalFunction base = k >= 0 ? *this : inverse();
  unsigned e = static_cast<unsigned>(k >= 0 ? k : -k);
  if (base.is_laurent()) return RationalFunction(base.num_.pow(e));
  return RationalFunction(base.num_.pow(e), base.den_.pow(e));
}

RationalFunction RationalFunction::derivative(int axis) const {
  LaurentPoly n = num_.derivative(axis) * den_ - num_ * den_.derivative(axis);
  return RationalFunction(n, den_ * den_);
}

bool RationalFunction::exact_equal(const RationalFunction& o) const {
  if (field() != o.field()) throw Error(ErrorKind::FieldMismatch, "equality");
  if (nvars() != o.nvars()) throw Error(ErrorKind::ArityMismatch, "equality");
  if (den_ == o.den_) return num_ == o.num_;
  return num_ * o.den_ == o.num_ * den_;
}

bool RationalFunction::eval_mod(std::uint64_t q, const std::vector<std::uint64_t>& pt, std::uint64_t& out) const {
  std::uint64_t a, b;
  if (!num_.eval_mod(q, pt, a) || !den_.eval_mod(q, pt, b) || b == 0) return false;
  out = mulmod(a, invmod(b, q), q);
  return true;
}

std::string RationalFunction::to_string() const {
  if (den_.is_one()) return num_.to_string();
  std::string n = num_.to_string();
  if (num_.size() > 1) n = "(" + n + ")";
  return n + "/(" + den_.to_string() + ")";
}

}  // namespace utb

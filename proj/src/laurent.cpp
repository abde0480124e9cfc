#include "utb/laurent.hpp"

#include <algorithm>
#include <map>

#include "utb/error.hpp"

namespace utb {

namespace {

LaurentPoly build(const CoefficientField& f, int n, std::map<Exponent, Coeff>&& acc) {
  std::vector<Term> t;
  t.reserve(acc.size());
  for (auto& [e, c] : acc) {
    f.reduce(c);
    if (c != 0) t.push_back(Term{e, std::move(c)});
  }
  return LaurentPoly::from_terms(f, n, std::move(t));
}

}  // namespace

LaurentPoly LaurentPoly::constant(CoefficientField f, int nvars, const Coeff& c) {
  return monomial(f, nvars, Exponent(nvars, 0), c);
}

LaurentPoly LaurentPoly::monomial(CoefficientField f, int nvars, Exponent e, const Coeff& c) {
  if (static_cast<int>(e.size()) != nvars) throw Error(ErrorKind::ArityMismatch, "exponent length");
  LaurentPoly p(f, nvars);
  Coeff cc = f.normalized(c);
  if (cc != 0) p.terms_.push_back(Term{std::move(e), std::move(cc)});
  return p;
}

LaurentPoly LaurentPoly::variable(CoefficientField f, int nvars, int i) {
  if (i < 0 || i >= nvars) throw Error(ErrorKind::ArityMismatch, "variable index");
  Exponent e(nvars, 0);
  e[i] = 1;
  return monomial(f, nvars, e);
}

LaurentPoly LaurentPoly::from_terms(CoefficientField f, int nvars, std::vector<Term> terms) {
  LaurentPoly p(f, nvars);
  bool sorted = true;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (static_cast<int>(terms[i].e.size()) != nvars) throw Error(ErrorKind::ArityMismatch, "exponent length");
    if (i && !(terms[i - 1].e < terms[i].e)) sorted = false;
    f.reduce(terms[i].c);
    if (terms[i].c == 0) sorted = false;
  }
  if (sorted) {
    p.terms_ = std::move(terms);
    return p;
  }
  std::map<Exponent, Coeff> acc;
  for (auto& t : terms) acc[t.e] += t.c;
  return build(f, nvars, std::move(acc));
}

bool LaurentPoly::is_constant() const {
  if (terms_.empty()) return true;
  if (terms_.size() > 1) return false;
  for (int v : terms_[0].e)
    if (v) return false;
  return true;
}

bool LaurentPoly::is_one() const { return is_constant() && !terms_.empty() && terms_[0].c == 1; }

void LaurentPoly::check(const LaurentPoly& o) const {
  if (field_ != o.field_) throw Error(ErrorKind::FieldMismatch, field_.name() + " vs " + o.field_.name());
  if (nvars_ != o.nvars_)
    throw Error(ErrorKind::ArityMismatch, std::to_string(nvars_) + " vs " + std::to_string(o.nvars_) + " variables");
}

LaurentPoly LaurentPoly::operator-() const {
  LaurentPoly r = *this;
  for (auto& t : r.terms_) t.c = field_.neg(t.c);
  return r;
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
  check(o);
  LaurentPoly r(field_, nvars_);
  r.terms_.reserve(terms_.size() + o.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < terms_.size() || j < o.terms_.size()) {
    if (j == o.terms_.size() || (i < terms_.size() && terms_[i].e < o.terms_[j].e)) {
      r.terms_.push_back(terms_[i++]);
    } else if (i == terms_.size() || o.terms_[j].e < terms_[i].e) {
      r.terms_.push_back(o.terms_[j++]);
    } else {
      Coeff c = field_.add(terms_[i].c, o.terms_[j].c);
      if (c != 0) r.terms_.push_back(Term{terms_[i].e, std::move(c)});
      ++i;
      ++j;
    }
  }
  return r;
}

LaurentPoly LaurentPoly::operator-(const LaurentPoly& o) const { return *this + (-o); }

LaurentPoly LaurentPoly::operator*(const LaurentPoly& o) const {
  check(o);
  if (is_zero() || o.is_zero()) return LaurentPoly(field_, nvars_);
  if (o.is_monomial()) return shifted(o.terms_[0].e).scaled(o.terms_[0].c);
  if (is_monomial()) return o.shifted(terms_[0].e).scaled(terms_[0].c);
  std::map<Exponent, Coeff> acc;
  Exponent e(nvars_);
  for (const auto& a : terms_) {
    for (const auto& b : o.terms_) {
      for (int k = 0; k < nvars_; ++k) e[k] = a.e[k] + b.e[k];
      acc[e] += a.c * b.c;
    }
  }
  return build(field_, nvars_, std::move(acc));
}

bool LaurentPoly::operator==(const LaurentPoly& o) const {
  if (field_ != o.field_ || nvars_ != o.nvars_ || terms_.size() != o.terms_.size()) return false;
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i].e != o.terms_[i].e || terms_[i].c != o.terms_[i].c) return false;
  return true;
}

LaurentPoly LaurentPoly::scaled(const Coeff& c) const {
  Coeff cc = field_.normalized(c);
  if (cc == 0) return LaurentPoly(field_, nvars_);
  LaurentPoly r = *this;
  if (cc == 1) return r;
  for (auto& t : r.terms_) t.c = field_.mul(t.c, cc);
  return r;
}

LaurentPoly LaurentPoly::shifted(const Exponent& e) const {
  if (static_cast<int>(e.size()) != nvars_) throw Error(ErrorKind::ArityMismatch, "shift length");
  LaurentPoly r = *this;
  for (auto& t : r.terms_)
    for (int k = 0; k < nvars_; ++k) t.e[k] += e[k];
  return r;  // translation preserves lexicographic order
}

LaurentPoly LaurentPoly::pow(unsigned k) const {
  LaurentPoly r = constant(field_, nvars_, 1);
  LaurentPoly b = *this;
  while (k) {
    if (k & 1) r = r * b;
    k >>= 1;
    if (k) b = b * b;
  }
  return r;
}

LaurentPoly LaurentPoly::monomial_pow(int k) const {
  if (!is_monomial()) throw Error(ErrorKind::InvalidArgument, "negative power of a non-monomial");
  Exponent e = terms_[0].e;
  for (int& v : e) v *= k;
  Coeff c = 1;
  Coeff base = k >= 0 ? terms_[0].c : field_.inv(terms_[0].c);
  for (int i = 0; i < std::abs(k); ++i) c = field_.mul(c, base);
  return monomial(field_, nvars_, e, c);
}

LaurentPoly LaurentPoly::derivative(int axis) const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    if (t.e[axis] == 0) continue;
    Term n{t.e, field_.mul(t.c, Coeff(t.e[axis]))};
    n.e[axis] -= 1;
    if (n.c != 0) out.push_back(std::move(n));
  }
  return from_terms(field_, nvars_, std::move(out));
}

LaurentPoly LaurentPoly::mapped(int new_nvars, const std::function<Exponent(const Exponent&)>& f) const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(Term{f(t.e), t.c});
  return from_terms(field_, new_nvars, std::move(out));
}

int LaurentPoly::min_exponent(int axis) const {
  if (terms_.empty()) throw Error(ErrorKind::InvalidArgument, "min exponent of zero");
  int m = terms_[0].e[axis];
  for (const auto& t : terms_) m = std::min(m, t.e[axis]);
  return m;
}

int LaurentPoly::max_exponent(int axis) const {
  if (terms_.empty()) throw Error(ErrorKind::InvalidArgument, "max exponent of zero");
  int m = terms_[0].e[axis];
  for (const auto& t : terms_) m = std::max(m, t.e[axis]);
  return m;
}

Exponent LaurentPoly::min_exponents() const {
  Exponent m(nvars_, 0);
  for (int k = 0; k < nvars_ && !terms_.empty(); ++k) m[k] = min_exponent(k);
  return m;
}

Exponent LaurentPoly::max_exponents() const {
  Exponent m(nvars_, 0);
  for (int k = 0; k < nvars_ && !terms_.empty(); ++k) m[k] = max_exponent(k);
  return m;
}

std::vector<int> LaurentPoly::support_variables() const {
  std::vector<int> out;
  for (int k = 0; k < nvars_; ++k) {
    for (const auto& t : terms_) {
      if (t.e[k]) {
        out.push_back(k);
        break;
      }
    }
  }
  return out;
}

bool LaurentPoly::eval_mod(std::uint64_t q, const std::vector<std::uint64_t>& pt, std::uint64_t& out) const {
  std::uint64_t acc = 0;
  for (const auto& t : terms_) {
    std::uint64_t c;
    if (!rational_mod(t.c, q, c)) return false;
    for (int k = 0; k < nvars_; ++k) {
      int e = t.e[k];
      if (!e) continue;
      if (pt[k] == 0) {
        if (e < 0) return false;
        c = 0;
        break;
      }
      std::uint64_t ee = e > 0 ? static_cast<std::uint64_t>(e) : (q - 1) - (static_cast<std::uint64_t>(-e) % (q - 1));
      c = mulmod(c, powmod(pt[k], ee, q), q);
    }
    acc = addmod(acc, c, q);
  }
  out = acc;
  return true;
}

std::string format_monomial(const Coeff& c, const Exponent& e, bool leading) {
  std::string s;
  Coeff a = c;
  bool neg = a < 0;
  if (neg) a = -a;
  if (neg) s += leading ? "-" : " - ";
  else if (!leading) s += " + ";
  bool has_var = false;
  std::string vars;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (!e[k]) continue;
    if (has_var) vars += "*";
    vars += "X" + std::to_string(k + 1);
    if (e[k] != 1) vars += "^" + std::to_string(e[k]);
    has_var = true;
  }
  if (!has_var) return s + a.get_str();
  if (a != 1) s += a.get_str() + "*";
  return s + vars;
}

std::string LaurentPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (std::size_t i = terms_.size(); i-- > 0;) s += format_monomial(terms_[i].c, terms_[i].e, i + 1 == terms_.size());
  return s;
}

std::size_t LaurentPoly::hash() const {
  std::size_t h = 1469598103934665603ULL ^ static_cast<std::size_t>(nvars_);
  auto mix = [&h](std::size_t v) { h = (h ^ v) * 1099511628211ULL; };
  for (const auto& t : terms_) {
    for (int v : t.e) mix(static_cast<std::size_t>(static_cast<unsigned>(v)));
    mix(std::hash<std::string>{}(t.c.get_str()));
  }
  return h;
}

}  // namespace utb

#include "utb/star_divide.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "utb/error.hpp"

namespace utb {

bool satisfies_star(const LaurentPoly& v, int axis) {
  if (v.is_zero()) return false;
  int hi = v.max_exponent(axis), lo = v.min_exponent(axis);
  int nh = 0, nl = 0;
  for (const auto& t : v.terms()) {
    nh += t.e[axis] == hi;
    nl += t.e[axis] == lo;
  }
  return nh == 1 && nl == 1;
}

int star_axis(const LaurentPoly& v) {
  for (int a = 0; a < v.nvars(); ++a)
    if (satisfies_star(v, a)) return a;
  return -1;
}

namespace {

struct AxisFirst {
  int axis;
  bool operator()(const Exponent& a, const Exponent& b) const {
    if (a[axis] != b[axis]) return a[axis] < b[axis];
    return a < b;
  }
};

}  // namespace

StarDivision star_divide(const LaurentPoly& u, const LaurentPoly& v, int axis) {
  if (u.field() != v.field()) throw Error(ErrorKind::FieldMismatch, "star_divide operands");
  if (u.nvars() != v.nvars()) throw Error(ErrorKind::ArityMismatch, "star_divide operands");
  if (v.is_zero()) throw Error(ErrorKind::DivisionByZero, "star_divide by zero");
  if (axis < 0 || axis >= v.nvars()) throw Error(ErrorKind::InvalidArgument, "axis out of range");
  if (!satisfies_star(v, axis)) throw Error(ErrorKind::StarCondition, "divisor " + v.to_string());
  const CoefficientField& f = u.field();
  const int n = u.nvars();
  StarDivision out{LaurentPoly(f, n), LaurentPoly(f, n)};
  if (u.is_zero()) return out;

  const int hi = v.max_exponent(axis);
  const int lo = v.min_exponent(axis);
  const Term* top = nullptr;
  const Term* bottom = nullptr;
  for (const auto& t : v.terms()) {
    if (t.e[axis] == hi) top = &t;
    if (t.e[axis] == lo) bottom = &t;
  }

  std::map<Exponent, Coeff, AxisFirst> r(AxisFirst{axis});
  for (const auto& t : u.terms()) r.emplace(t.e, t.c);
  std::vector<Term> quot;
  Exponent shift(n);
  auto cancel = [&](const Exponent& e, const Coeff& rc, const Term* piv) {
    const Coeff c = f.div(rc, piv->c);
    for (int k = 0; k < n; ++k) shift[k] = e[k] - piv->e[k];
    quot.push_back(Term{shift, c});
    for (const auto& t : v.terms()) {
      Exponent key(n);
      for (int k = 0; k < n; ++k) key[k] = t.e[k] + shift[k];
      auto [pos, inserted] = r.emplace(key, Coeff(0));
      pos->second = f.sub(pos->second, f.mul(c, t.c));
      if (pos->second == 0) r.erase(pos);
    }
  };
  // top reduction only creates terms at axis-degree >= lo, bottom
  // reduction only terms below hi, so the remainder ends in [lo, hi)
  while (!r.empty()) {
    auto it = std::prev(r.end());
    if (it->first[axis] < hi) break;
    const Exponent e = it->first;
    const Coeff c = it->second;
    cancel(e, c, top);
  }
  while (!r.empty()) {
    auto it = r.begin();
    if (it->first[axis] >= lo) break;
    const Exponent e = it->first;
    const Coeff c = it->second;
    cancel(e, c, bottom);
  }
  out.t = LaurentPoly::from_terms(f, n, std::move(quot));
  std::vector<Term> rem;
  for (auto& [e, c] : r) rem.push_back(Term{e, c});
  out.w = LaurentPoly::from_terms(f, n, std::move(rem));
  return out;
}

Exponent NewBasis::to_new(const Exponent& x) const {
  Exponent y = x;
  std::int64_t first = first_coordinate(x);
  if (first > std::numeric_limits<int>::max() || first < std::numeric_limits<int>::min())
    throw Error(ErrorKind::Overflow, "new-basis coordinate exceeds exponent range");
  y[0] = static_cast<int>(first);
  return y;
}

Exponent NewBasis::to_old(const Exponent& y) const {
  Exponent x = y;
  std::int64_t first = 0;
  for (std::size_t i = 0; i < y.size(); ++i) first += rows(static_cast<Eigen::Index>(i), 0) * y[i];
  if (first > std::numeric_limits<int>::max() || first < std::numeric_limits<int>::min())
    throw Error(ErrorKind::Overflow, "old-basis coordinate exceeds exponent range");
  x[0] = static_cast<int>(first);
  return x;
}

std::int64_t NewBasis::first_coordinate(const Exponent& x) const {
  // x = sum y_i b_i with b_i = (3S)^{i-1} e_1 + e_i, so y_i = x_i for i > 1
  std::int64_t first = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) first -= rows(static_cast<Eigen::Index>(i), 0) * x[i];
  return first;
}

NewBasis new_basis(const std::vector<Exponent>& W, int d) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  std::int64_t S = 0;
  for (const auto& w : W) {
    if (static_cast<int>(w.size()) != d) throw Error(ErrorKind::ArityMismatch, "point dimension");
    for (int v : w) S = std::max<std::int64_t>(S, std::abs(static_cast<std::int64_t>(v)));
  }
  NewBasis nb;
  nb.rows = IntMatrix::Identity(d, d);
  if (S == 0) return nb;
  nb.scale = 3 * S;
  // |first coordinate| <= S * sum (3S)^i must stay well inside int range
  long double bound = static_cast<long double>(S);
  long double pw = 1;
  for (int i = 1; i < d; ++i) {
    pw *= static_cast<long double>(nb.scale);
    bound += pw * static_cast<long double>(S);
  }
  if (bound > static_cast<long double>(std::numeric_limits<int>::max() / 4))
    throw Error(ErrorKind::Overflow, "new basis scale (3S)^(d-1) too large");
  std::int64_t p = 1;
  for (int i = 1; i < d; ++i) {
    p *= nb.scale;
    nb.rows(i, 0) = p;
  }
  return nb;
}

}  // namespace utb

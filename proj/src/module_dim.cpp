#include "utb/module_dim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include <Eigen/Dense>

#include "utb/echelon.hpp"
#include "utb/error.hpp"
#include "utb/fingerprint.hpp"
#include "utb/star_divide.hpp"

namespace utb {

namespace {

// c * X^e
bool as_monomial(const RationalFunction& r, Exponent& e, Coeff& c) {
  if (!r.is_monomial()) return false;
  e = r.num().leading().e;
  c = r.num().leading().c;
  return true;
}

bool all_monomial(const std::vector<RationalFunction>& v) {
  Exponent e;
  Coeff c;
  for (const auto& r : v)
    if (!as_monomial(r, e, c)) return false;
  return true;
}

std::set<int> variables_of(const RationalFunction& r) {
  std::set<int> s;
  for (int v : r.num().support_variables()) s.insert(v);
  for (int v : r.den().support_variables()) s.insert(v);
  return s;
}

int lattice_rank(const std::vector<Exponent>& rows, int ncols) {
  if (rows.empty() || ncols == 0) return 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), ncols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < ncols; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(m).rank());
}

// --- monomial modules: the span is counted by distinct exponents ---

struct ExpHash {
  std::size_t operator()(const Exponent& e) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (int x : e) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(x)));
    return static_cast<std::size_t>(h);
  }
};

std::vector<std::size_t> monomial_ranks(const std::vector<Exponent>& steps, const std::vector<Exponent>& starts,
                                        int max_radius, std::size_t budget) {
  std::unordered_set<Exponent, ExpHash> seen(starts.begin(), starts.end());
  std::vector<Exponent> frontier(seen.begin(), seen.end());
  std::vector<std::size_t> ranks{seen.size()};
  for (int r = 1; r <= max_radius; ++r) {
    std::vector<Exponent> next;
    for (const auto& x : frontier)
      for (const auto& s : steps)
        for (int sign : {1, -1}) {
          Exponent y = x;
          for (std::size_t k = 0; k < y.size(); ++k) y[k] += sign * s[k];
          if (seen.insert(y).second) next.push_back(std::move(y));
        }
    if (seen.size() > budget) break;
    ranks.push_back(seen.size());
    frontier.swap(next);
  }
  return ranks;
}

// --- evaluation engine: rank of the values at K random points ---

constexpr std::size_t kRankMargin = 16;

std::vector<std::size_t> evaluation_ranks(const CoefficientField& field, int nvars,
                                          const std::vector<RationalFunction>& phis,
                                          const std::vector<RationalFunction>& gens, int max_radius,
                                          const SpanOptions& opt) {
  const FingerprintRing& ring = FingerprintRing::for_field(field);
  FingerprintContext ctx(opt.seed);
  std::vector<std::vector<std::uint64_t>> pts;  // accepted points
  std::size_t tried = 0;
  auto ensure_points = [&](std::size_t k) {
    while (pts.size() < k) {
      if (tried > 64 + 4 * k) throw Error(ErrorKind::AllPoles, "span: too many poles among evaluation points");
      auto pt = ctx.point(tried++, nvars, ring);
      bool ok = true;
      std::uint64_t x;
      for (const auto& f : phis) ok = ok && ring.eval(f, pt, x) && x != 0;
      for (const auto& g : gens) ok = ok && ring.eval(g, pt, x);
      if (ok) pts.push_back(std::move(pt));
    }
  };

  // GF(p^k) arithmetic for odd p costs about a microsecond per product
  const std::size_t budget =
      ring.is_prime_field() || ring.characteristic() == 2 ? opt.rank_budget : std::min<std::size_t>(opt.rank_budget, 120);
  const std::size_t widest = budget + kRankMargin;
  for (std::size_t width = std::min<std::size_t>(64, widest);; width = std::min(2 * width, widest)) {
    const bool last = width >= widest;
    ensure_points(width);
    std::vector<std::vector<std::uint64_t>> step;  // phi^{+-1} at the points
    for (const auto& f : phis) {
      std::vector<std::uint64_t> a(width), b(width);
      for (std::size_t k = 0; k < width; ++k) {
        ring.eval(f, pts[k], a[k]);
        b[k] = ring.inv(a[k]);
      }
      step.push_back(std::move(a));
      step.push_back(std::move(b));
    }
    DenseEchelon ech(ring, width);
    std::vector<std::vector<std::uint64_t>> fresh;
    for (const auto& g : gens) {
      std::vector<std::uint64_t> v(width);
      for (std::size_t k = 0; k < width; ++k) ring.eval(g, pts[k], v[k]);
      if (ech.insert(v)) fresh.push_back(std::move(v));
    }
    std::vector<std::size_t> ranks{ech.rank()};
    bool overflow = false;
    for (int r = 1; r <= max_radius && !overflow; ++r) {
      std::vector<std::vector<std::uint64_t>> next;
      for (const auto& v : fresh) {
        for (const auto& s : step) {
          std::vector<std::uint64_t> w(width);
          for (std::size_t k = 0; k < width; ++k) w[k] = ring.mul(v[k], s[k]);
          if (ech.insert(w)) next.push_back(std::move(w));
          if (ech.rank() + kRankMargin > width || ech.rank() > budget) {
            overflow = true;
            break;
          }
        }
        if (overflow) break;
      }
      if (!overflow) ranks.push_back(ech.rank());
      fresh.swap(next);
    }
    if (!overflow || last || ech.rank() > budget) return ranks;
  }
}

// --- quotients by one relation: star-division normal forms ---

class SparseEchelon {
 public:
  explicit SparseEchelon(const CoefficientField& f) : field_(f) {}
  std::size_t rank() const { return rows_.size(); }

  bool insert(LaurentPoly v) {
    std::size_t i = v.size();
    while (i > 0) {
      const Term& t = v.terms()[i - 1];
      auto it = rows_.find(t.e);
      if (it == rows_.end()) {
        --i;
        continue;
      }
      const Exponent e = t.e;
      v -= it->second.scaled(t.c);
      // terms above e are untouched; continue just below e
      const auto& ts = v.terms();
      i = static_cast<std::size_t>(
          std::lower_bound(ts.begin(), ts.end(), e, [](const Term& a, const Exponent& b) { return a.e < b; }) -
          ts.begin());
    }
    if (v.is_zero()) return false;
    const Coeff inv = field_.inv(v.leading().c);
    Exponent lead = v.leading().e;
    rows_.emplace(std::move(lead), v.scaled(inv));
    return true;
  }

 private:
  CoefficientField field_;
  std::map<Exponent, LaurentPoly> rows_;
};

LaurentPoly to_field(const LaurentPoly& p, const CoefficientField& f) {
  if (p.field() == f) return p;
  std::vector<Term> ts;
  for (const auto& t : p.terms()) {
    std::uint64_t c;
    if (!rational_mod(t.c, f.characteristic(), c))
      throw Error(ErrorKind::DivisionByZero, "relation coefficient not invertible modulo the working prime");
    ts.push_back(Term{t.e, Coeff(static_cast<unsigned long>(c))});
  }
  return LaurentPoly::from_terms(f, p.nvars(), std::move(ts));
}

std::vector<std::size_t> relation_ranks(const ModuleSpec& m, int max_radius, const SpanOptions& opt) {
  if (m.relations.size() != 1)
    throw Error(ErrorKind::Unsupported, "span: only a single relation is supported");
  const LaurentPoly& rel0 = m.relations[0];
  if (rel0.size() < 2) throw Error(ErrorKind::UnitRelation, "relation " + rel0.to_string() + " is a unit");
  // characteristic 0 is handled modulo the fingerprint prime
  const CoefficientField wf = m.field.is_prime() ? m.field : CoefficientField::prime(kFingerprintPrime);
  const int d = m.nvars;

  std::vector<Exponent> support;
  for (const auto& t : rel0.terms()) support.push_back(t.e);
  const NewBasis nb = new_basis(support, d);
  auto to_new = [&](const LaurentPoly& p) { return to_field(p, wf).mapped(d, [&](const Exponent& x) { return nb.to_new(x); }); };
  const LaurentPoly rel = to_new(rel0);
  if (!satisfies_star(rel, 0)) throw Error(ErrorKind::StarCondition, "new basis did not separate the relation");
  auto nf = [&](const LaurentPoly& p) { return star_divide(p, rel, 0).w; };

  struct Step {
    Exponent e;
    Coeff c;
  };
  std::vector<Step> steps;
  for (const auto& f : m.action) {
    Exponent e;
    Coeff c;
    if (!as_monomial(f, e, c)) throw Error(ErrorKind::Unsupported, "relations need monomial action");
    LaurentPoly mono = to_new(LaurentPoly::monomial(m.field, d, e, c));
    LaurentPoly inv = to_new(LaurentPoly::monomial(m.field, d, e, c).monomial_pow(-1));
    steps.push_back({mono.leading().e, mono.leading().c});
    steps.push_back({inv.leading().e, inv.leading().c});
  }

  SparseEchelon ech(wf);
  std::vector<LaurentPoly> fresh;
  std::vector<RationalFunction> gens = m.generators;
  if (gens.empty()) gens.push_back(RationalFunction::constant(m.field, d, 1));
  for (const auto& g : gens) {
    if (!g.is_laurent()) throw Error(ErrorKind::Unsupported, "relations need Laurent generators");
    LaurentPoly v = nf(to_new(g.num()));
    if (ech.insert(v)) fresh.push_back(std::move(v));
  }
  std::vector<std::size_t> ranks{ech.rank()};
  for (int r = 1; r <= max_radius; ++r) {
    std::vector<LaurentPoly> next;
    for (const auto& v : fresh)
      for (const auto& s : steps) {
        LaurentPoly w = nf(v.shifted(s.e).scaled(s.c));
        if (ech.insert(w)) next.push_back(std::move(w));
      }
    if (ech.rank() > opt.rank_budget) break;
    ranks.push_back(ech.rank());
    fresh.swap(next);
  }
  return ranks;
}

std::vector<std::size_t> component_ranks(const ModuleSpec& m, const std::vector<RationalFunction>& phis,
                                         const std::vector<RationalFunction>& gens, int max_radius,
                                         const SpanOptions& opt) {
  if (all_monomial(phis) && all_monomial(gens)) {
    std::vector<Exponent> steps, starts;
    Exponent e;
    Coeff c;
    for (const auto& f : phis) {
      as_monomial(f, e, c);
      steps.push_back(e);
    }
    for (const auto& g : gens) {
      as_monomial(g, e, c);
      starts.push_back(e);
    }
    return monomial_ranks(steps, starts, max_radius, 50 * opt.rank_budget * opt.rank_budget);
  }
  return evaluation_ranks(m.field, m.nvars, phis, gens, max_radius, opt);
}

}  // namespace

ModuleSpec ModuleSpec::from_phis(const std::vector<RationalFunction>& phis) {
  if (phis.empty()) throw Error(ErrorKind::InvalidArgument, "module needs at least one phi-value");
  ModuleSpec m;
  m.field = phis.front().field();
  m.nvars = phis.front().nvars();
  m.action = phis;
  return m;
}

void ModuleSpec::validate() const {
  auto check = [&](const CoefficientField& f, int n, const std::string& what) {
    if (f != field) throw Error(ErrorKind::FieldMismatch, "module " + what);
    if (n != nvars) throw Error(ErrorKind::ArityMismatch, "module " + what);
  };
  for (const auto& f : action) {
    check(f.field(), f.nvars(), "action generator");
    if (f.is_zero()) throw Error(ErrorKind::InvalidArgument, "phi-values must be nonzero");
  }
  for (const auto& g : generators) {
    check(g.field(), g.nvars(), "generator");
    if (g.is_zero()) throw Error(ErrorKind::InvalidArgument, "module generators must be nonzero");
  }
  for (const auto& r : relations) {
    check(r.field(), r.nvars(), "relation");
    if (r.is_zero()) throw Error(ErrorKind::InvalidArgument, "relations must be nonzero");
  }
}

Json ModuleSpec::to_json() const {
  Json a = Json::array(), g = Json::array(), rel = Json::array();
  for (const auto& f : action) a.push_back(f.to_string());
  for (const auto& f : generators) g.push_back(f.to_string());
  for (const auto& r : relations) rel.push_back(r.to_string());
  Json j{{"char", field.characteristic()}, {"vars", nvars}, {"action_generators", a}, {"module_generators", g}};
  if (!relations.empty()) j["relations"] = rel;
  return j;
}

ModuleSpec ModuleSpec::from_json(const Json& j) {
  try {
    ModuleSpec m;
    m.field = field_from_characteristic(j.at("char").get<std::uint64_t>());
    m.nvars = j.at("vars").get<int>();
    for (const auto& f : j.at("action_generators")) m.action.push_back(rational_from_json(f, m.field, m.nvars));
    if (j.contains("module_generators"))
      for (const auto& f : j.at("module_generators")) m.generators.push_back(rational_from_json(f, m.field, m.nvars));
    if (j.contains("relations"))
      for (const auto& r : j.at("relations")) m.relations.push_back(laurent_from_json(r, m.field, m.nvars));
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("module spec: ") + e.what());
  }
}

std::vector<std::size_t> span_ranks(const ModuleSpec& m, int max_radius, const SpanOptions& opt) {
  if (max_radius < 0) throw Error(ErrorKind::InvalidArgument, "radius must be >= 0");
  m.validate();
  if (!m.relations.empty()) return relation_ranks(m, max_radius, opt);

  std::vector<RationalFunction> phis;
  for (const auto& f : m.action)
    if (!f.is_constant()) phis.push_back(f);  // constants only rescale
  if (m.generators.size() > 1) return component_ranks(m, phis, m.generators, max_radius, opt);

  // A single generator u gives u * (span for generator 1). Variable-disjoint
  // groups of phi-values then span a tensor product of their filtrations.
  const std::vector<RationalFunction> one{RationalFunction::constant(m.field, m.nvars, 1)};
  std::vector<int> comp(phis.size());
  std::vector<std::set<int>> vars;
  for (const auto& f : phis) vars.push_back(variables_of(f));
  for (std::size_t i = 0; i < phis.size(); ++i) comp[i] = static_cast<int>(i);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < phis.size(); ++i)
      for (std::size_t j = i + 1; j < phis.size(); ++j) {
        if (comp[i] == comp[j]) continue;
        bool share = false;
        for (int v : vars[i]) share = share || vars[j].count(v);
        if (!share) continue;
        const int from = std::max(comp[i], comp[j]), to = std::min(comp[i], comp[j]);
        for (auto& c : comp)
          if (c == from) c = to;
        changed = true;
      }
  }
  std::vector<std::size_t> total(static_cast<std::size_t>(max_radius) + 1, 0);
  total[0] = 1;  // level counts of the product, starting from the trivial filtration
  std::size_t length = total.size();
  for (std::size_t c = 0; c < phis.size(); ++c) {
    std::vector<RationalFunction> part;
    for (std::size_t i = 0; i < phis.size(); ++i)
      if (comp[i] == static_cast<int>(c)) part.push_back(phis[i]);
    if (part.empty()) continue;
    const auto ranks = component_ranks(m, part, one, max_radius, opt);
    length = std::min(length, ranks.size());
    std::vector<std::size_t> level(ranks.size());
    for (std::size_t s = 0; s < ranks.size(); ++s) level[s] = ranks[s] - (s ? ranks[s - 1] : 0);
    std::vector<std::size_t> conv(total.size(), 0);
    for (std::size_t a = 0; a < total.size(); ++a)
      for (std::size_t b = 0; a + b < total.size() && b < level.size(); ++b) conv[a + b] += total[a] * level[b];
    total.swap(conv);
  }
  std::vector<std::size_t> ranks(length);
  std::size_t acc = 0;
  for (std::size_t r = 0; r < length; ++r) ranks[r] = acc += total[r];
  return ranks;
}

std::size_t span_dim(const ModuleSpec& m, int radius, const SpanOptions& opt) {
  const auto ranks = span_ranks(m, radius, opt);
  if (ranks.size() <= static_cast<std::size_t>(radius))
    throw Error(ErrorKind::Budget, "span rank exceeds the rank budget before radius " + std::to_string(radius));
  return ranks[static_cast<std::size_t>(radius)];
}

int trdeg(const std::vector<RationalFunction>& phis, std::uint64_t seed) {
  if (phis.empty()) return 0;
  const CoefficientField field = phis.front().field();
  const int n = phis.front().nvars();
  for (const auto& f : phis) {
    if (f.field() != field) throw Error(ErrorKind::FieldMismatch, "trdeg");
    if (f.nvars() != n) throw Error(ErrorKind::ArityMismatch, "trdeg");
    if (f.is_zero()) throw Error(ErrorKind::InvalidArgument, "phi-values must be nonzero");
  }
  std::vector<std::vector<RationalFunction>> jac(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i)
    for (int j = 0; j < n; ++j) jac[i].push_back(phis[i].derivative(j));

  const FingerprintRing& ring = FingerprintRing::for_field(field);
  FingerprintContext ctx(seed);
  int best = 0, good = 0;
  for (std::size_t t = 0; t < 64 && good < 3; ++t) {
    const auto pt = ctx.point(t, n, ring);
    std::vector<std::vector<std::uint64_t>> a(phis.size(), std::vector<std::uint64_t>(static_cast<std::size_t>(n)));
    bool ok = true;
    for (std::size_t i = 0; i < phis.size() && ok; ++i)
      for (int j = 0; j < n && ok; ++j) ok = ring.eval(jac[i][static_cast<std::size_t>(j)], pt, a[i][static_cast<std::size_t>(j)]);
    if (!ok) continue;
    ++good;
    int rank = 0;
    for (int col = 0; col < n && rank < static_cast<int>(a.size()); ++col) {
      std::size_t piv = static_cast<std::size_t>(rank);
      while (piv < a.size() && !a[piv][static_cast<std::size_t>(col)]) ++piv;
      if (piv == a.size()) continue;
      std::swap(a[piv], a[static_cast<std::size_t>(rank)]);
      const auto& pr = a[static_cast<std::size_t>(rank)];
      const std::uint64_t inv = ring.inv(pr[static_cast<std::size_t>(col)]);
      for (std::size_t i = static_cast<std::size_t>(rank) + 1; i < a.size(); ++i) {
        const std::uint64_t c = ring.mul(a[i][static_cast<std::size_t>(col)], inv);
        if (!c) continue;
        for (int j = col; j < n; ++j)
          a[i][static_cast<std::size_t>(j)] = ring.sub(a[i][static_cast<std::size_t>(j)], ring.mul(c, pr[static_cast<std::size_t>(j)]));
      }
      ++rank;
    }
    best = std::max(best, rank);
  }
  if (!good) throw Error(ErrorKind::AllPoles, "trdeg: every sampled point is a pole of the Jacobian");
  return best;
}

GrowthFit fit_growth(const std::vector<std::pair<int, std::size_t>>& table, double tolerance) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [r, rank] : table)
    if (r >= 1 && rank >= 1) pts.emplace_back(r, static_cast<double>(rank));
  if (pts.size() < 3) throw Error(ErrorKind::InvalidArgument, "growth fit needs at least 3 radii >= 1");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    a(k, 0) = 1;
    a(k, 1) = std::log(pts[i].first);
    a(k, 2) = 1.0 / pts[i].first;
    b(k) = std::log(pts[i].second);
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  GrowthFit f;
  f.exponent = x(1);
  f.residual = std::sqrt((a * x - b).squaredNorm() / static_cast<double>(pts.size()));
  const double nearest = std::round(f.exponent);
  if (std::abs(f.exponent - nearest) <= tolerance) {
    f.candidates = {std::max(0, static_cast<int>(nearest))};
  } else {
    f.ambiguous = true;
    const int lo = std::max(0, static_cast<int>(std::floor(f.exponent)));
    f.candidates = {lo, lo + 1};
  }
  return f;
}

int principal_quotient_dim(int d, const LaurentPoly& relation, bool verify) {
  if (relation.nvars() != d) throw Error(ErrorKind::ArityMismatch, "relation lives in a different number of variables");
  if (relation.is_zero()) throw Error(ErrorKind::InvalidArgument, "relation must be nonzero");
  if (relation.size() < 2)
    throw Error(ErrorKind::UnitRelation, relation.to_string() + " is a unit; the quotient is the zero module");
  const int dim = d - 1;
  if (verify) {
    ModuleSpec m;
    m.field = relation.field();
    m.nvars = d;
    for (int i = 0; i < d; ++i) m.action.push_back(RationalFunction::variable(m.field, d, i));
    m.relations = {relation};
    const auto ranks = span_ranks(m, 8);
    bool ok = false;
    if (ranks.size() == 9) {
      if (dim == 0) {
        ok = ranks[8] == ranks[6];
      } else {
        std::vector<std::pair<int, std::size_t>> t;
        for (int r : {2, 4, 6, 8}) t.emplace_back(r, ranks[static_cast<std::size_t>(r)]);
        const GrowthFit f = fit_growth(t);
        ok = !f.ambiguous && f.candidates.front() == dim;
      }
    }
    if (!ok) throw Error(ErrorKind::Infeasible, "span growth of the quotient disagrees with d-1");
  }
  return dim;
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::SpanFit: return "SpanFit";
    case Provenance::Trdeg: return "Trdeg";
    case Provenance::QuotientRule: return "QuotientRule";
    case Provenance::FreeModule: return "FreeModule";
  }
  return "?";
}

bool DimensionReport::shortcuts_agree_with_fit() const {
  if (!fit || fit->ambiguous) return false;
  const int f = fit->candidates.front();
  for (const auto& s : {free_module_result, quotient_rule_result, trdeg_result})
    if (s && *s != f) return false;
  return true;
}

Json DimensionReport::to_json() const {
  Json table = Json::array();
  for (const auto& [r, rank] : span_table) table.push_back(Json::array({r, rank}));
  Json j{{"span_table", table}};
  if (fit) {
    j["fitted_exponent"] = fit->exponent;
    j["fit_residual"] = fit->residual;
  } else {
    j["fitted_exponent"] = nullptr;
  }
  Json sc = Json::object();
  if (trdeg_result) sc["trdeg"] = *trdeg_result;
  if (quotient_rule_result) sc["quotient_rule"] = *quotient_rule_result;
  if (free_module_result) sc["free_module"] = *free_module_result;
  j["exact_shortcuts"] = sc;
  j["dimension"] = dimension;
  j["provenance"] = provenance_name(provenance);
  j["ambiguous"] = ambiguous;
  if (ambiguous) j["candidates"] = candidates;
  j["budget_exhausted"] = budget_exhausted;
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

DimensionReport dimension_estimate(const ModuleSpec& m, const DimOptions& opt) {
  m.validate();
  std::vector<int> radii = opt.radii;
  if (radii.size() < 3 || !std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end() || radii.front() < 0)
    throw Error(ErrorKind::InvalidArgument, "radius grid needs at least 3 increasing radii");

  DimensionReport rep;
  const auto ranks = span_ranks(m, radii.back(), opt.span);
  for (int r : radii)
    if (static_cast<std::size_t>(r) < ranks.size()) rep.span_table.emplace_back(r, ranks[static_cast<std::size_t>(r)]);
  rep.budget_exhausted = rep.span_table.size() < radii.size();
  std::size_t usable = 0;
  for (const auto& e : rep.span_table) usable += e.first >= 1;
  if (usable >= 3) {
    rep.fit = fit_growth(rep.span_table, opt.tolerance);
  } else if (ranks.size() >= 4) {
    std::vector<std::pair<int, std::size_t>> all;
    for (std::size_t r = 1; r < ranks.size(); ++r) all.emplace_back(static_cast<int>(r), ranks[r]);
    rep.fit = fit_growth(all, opt.tolerance);
    rep.notes.push_back("rank budget reached at radius " + std::to_string(ranks.size()) +
                        "; fit uses every radius 1.." + std::to_string(ranks.size() - 1));
  }

  const bool cyclic = m.generators.size() <= 1;
  if (m.relations.empty() && all_monomial(m.action) && all_monomial(m.generators)) {
    std::vector<Exponent> rows;
    Exponent e;
    Coeff c;
    for (const auto& f : m.action) {
      as_monomial(f, e, c);
      rows.push_back(e);
    }
    rep.free_module_result = lattice_rank(rows, m.nvars);
  }
  if (m.relations.size() == 1 && m.relations[0].size() >= 2 && all_monomial(m.action) && cyclic) {
    std::vector<Exponent> rows;
    Exponent e;
    Coeff c;
    for (const auto& f : m.action) {
      as_monomial(f, e, c);
      rows.push_back(e);
    }
    if (lattice_rank(rows, m.nvars) == m.nvars) rep.quotient_rule_result = m.nvars - 1;
  }
  if (m.relations.empty() && cyclic) rep.trdeg_result = trdeg(m.action, opt.span.seed ^ 0x7dULL);

  const std::optional<int> fitted =
      rep.fit && !rep.fit->ambiguous ? std::optional<int>(rep.fit->candidates.front()) : std::nullopt;
  if (rep.free_module_result) {
    rep.dimension = *rep.free_module_result;
    rep.provenance = Provenance::FreeModule;
  } else if (rep.quotient_rule_result) {
    rep.dimension = *rep.quotient_rule_result;
    rep.provenance = Provenance::QuotientRule;
  } else if (rep.trdeg_result && !m.field.is_prime()) {
    rep.dimension = *rep.trdeg_result;
    rep.provenance = Provenance::Trdeg;
  } else if (rep.trdeg_result && fitted && *fitted == *rep.trdeg_result) {
    rep.dimension = *rep.trdeg_result;
    rep.provenance = Provenance::Trdeg;
  } else if (rep.fit) {
    if (rep.trdeg_result)
      rep.notes.push_back("Jacobian rank " + std::to_string(*rep.trdeg_result) +
                          " not confirmed by span growth in positive characteristic");
    rep.provenance = Provenance::SpanFit;
    rep.ambiguous = rep.fit->ambiguous;
    rep.candidates = rep.fit->candidates;
    rep.dimension = rep.fit->candidates.front();
  } else {
    throw Error(ErrorKind::Budget, "too few radii within the rank budget and no exact shortcut applies");
  }
  if (fitted && *fitted != rep.dimension)
    rep.notes.push_back("fitted exponent rounds to " + std::to_string(*fitted) + ", exact value " +
                        std::to_string(rep.dimension));
  return rep;
}

// --- wreath certificate ---

namespace {

// exponents of small primes (and one leftover cofactor) of a nonzero rational
std::map<std::string, int> valuations(const Coeff& c) {
  std::map<std::string, int> v;
  auto split = [&](mpz_class n, int sign) {
    n = abs(n);
    for (unsigned long p = 2; p < 100000 && n > 1; ++p) {
      while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
        n /= p;
        v[std::to_string(p)] += sign;
      }
    }
    if (n > 1) v[n.get_str()] += sign;
  };
  split(c.get_num(), 1);
  split(c.get_den(), -1);
  return v;
}

}  // namespace

Json WreathCheck::to_json() const {
  return Json{{"holds", holds}, {"violated", violated}, {"radius", radius}, {"exponent_bound", exponent_bound},
              {"scope", "within bounds"}};
}

WreathCheck is_wreath_block(const PairResult& block, const ModuleSpec& m, int exponent_bound, int radius) {
  m.validate();
  WreathCheck w;
  w.radius = radius;
  w.exponent_bound = exponent_bound;
  if (block.status != PairStatus::Valid) w.violated.push_back("block: no valid witness");

  std::vector<RationalFunction> consts, vars;
  for (const auto& f : m.action) {
    auto& bucket = f.is_constant() ? consts : vars;
    bool dup = false;
    for (const auto& g : bucket) dup = dup || g.exact_equal(f);
    if (!dup) bucket.push_back(f);
  }

  // (a) bounded search for multiplicative relations among non-constant values
  const FingerprintRing& ring = FingerprintRing::for_field(m.field);
  FingerprintContext ctx(0x3f84d5b5b5470917ULL);
  std::vector<std::vector<std::uint64_t>> pts;
  for (std::size_t t = 0; pts.size() < kFingerprintPoints && t < 64; ++t) {
    auto pt = ctx.point(t, m.nvars, ring);
    bool ok = true;
    std::uint64_t x;
    for (const auto& f : vars) ok = ok && ring.eval(f, pt, x) && x;
    if (ok) pts.push_back(std::move(pt));
  }
  if (pts.size() < kFingerprintPoints) throw Error(ErrorKind::AllPoles, "wreath check");
  std::vector<std::vector<std::uint64_t>> val(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (const auto& pt : pts) {
      std::uint64_t x;
      ring.eval(vars[i], pt, x);
      val[i].push_back(x);
    }
  bool relation = false;
  const int k = static_cast<int>(vars.size());
  std::vector<int> e(static_cast<std::size_t>(k), -exponent_bound);
  if (k > 0 && exponent_bound > 0) {
    for (;;) {
      int first = 0;
      for (int x : e)
        if (!first && x) first = x;
      if (first > 0) {  // one sign per pair +-e
        bool one = true;
        for (std::size_t p = 0; p < pts.size() && one; ++p) {
          std::uint64_t prod = 1;
          for (int i = 0; i < k; ++i) prod = ring.mul(prod, ring.pow(val[static_cast<std::size_t>(i)][p], e[static_cast<std::size_t>(i)]));
          one = prod == 1;
        }
        if (one) {
          RationalFunction prod = RationalFunction::constant(m.field, m.nvars, 1);
          for (int i = 0; i < k; ++i) prod = prod * vars[static_cast<std::size_t>(i)].pow(e[static_cast<std::size_t>(i)]);
          if (prod.is_one()) {
            relation = true;
            std::string s;
            for (int i = 0; i < k; ++i)
              if (e[static_cast<std::size_t>(i)])
                s += (s.empty() ? "" : " * ") + std::string("(") + vars[static_cast<std::size_t>(i)].to_string() + ")^" +
                     std::to_string(e[static_cast<std::size_t>(i)]);
            w.violated.push_back("a: " + s + " = 1");
            break;
          }
        }
      }
      int pos = 0;
      while (pos < k && e[static_cast<std::size_t>(pos)] == exponent_bound) e[static_cast<std::size_t>(pos++)] = -exponent_bound;
      if (pos == k) break;
      ++e[static_cast<std::size_t>(pos)];
    }
  }

  // (b) rank of the phi-image modulo torsion
  int rank = 0;
  {
    std::map<std::string, int> cols;
    std::vector<std::pair<Exponent, std::map<std::string, int>>> mono;
    int generic = 0;
    auto add = [&](const RationalFunction& f) {
      Exponent ex;
      Coeff c;
      if (!as_monomial(f, ex, c)) {
        ++generic;
        return;
      }
      std::map<std::string, int> v;
      if (!m.field.is_prime()) v = valuations(c);  // F_p^* is torsion
      for (const auto& kv : v) cols.emplace(kv.first, 0);
      mono.emplace_back(ex, v);
    };
    for (const auto& f : vars) add(f);
    for (const auto& f : consts) add(f);
    int idx = m.nvars;
    for (auto& kv : cols) kv.second = idx++;
    std::vector<Exponent> rows;
    for (const auto& [ex, v] : mono) {
      Exponent row = ex;
      row.resize(static_cast<std::size_t>(idx), 0);
      for (const auto& kv : v) row[static_cast<std::size_t>(cols[kv.first])] = kv.second;
      rows.push_back(row);
    }
    rank = lattice_rank(rows, idx) + (relation ? 0 : generic);
    if (rank != 2) w.violated.push_back("b: phi-image has rank " + std::to_string(rank) + " modulo torsion");
  }

  // (c) cyclic, and the ball acts freely: span equals the number of distinct elements
  if (m.generators.size() > 1 || !m.relations.empty()) {
    w.violated.push_back("c: module is not cyclic over the free group ring");
  } else {
    const FingerprintRing& r2 = ring;
    std::vector<std::vector<std::uint64_t>> steps;
    for (const auto& f : m.action) {
      std::vector<std::uint64_t> a, b;
      for (const auto& pt : pts) {
        std::uint64_t x;
        r2.eval(f, pt, x);
        a.push_back(x);
        b.push_back(r2.inv(x));
      }
      steps.push_back(a);
      steps.push_back(b);
    }
    std::set<std::vector<std::uint64_t>> seen{std::vector<std::uint64_t>(pts.size(), 1)};
    std::vector<std::vector<std::uint64_t>> frontier(seen.begin(), seen.end());
    for (int s = 0; s < radius; ++s) {
      std::vector<std::vector<std::uint64_t>> next;
      for (const auto& x : frontier)
        for (const auto& st : steps) {
          std::vector<std::uint64_t> y(x.size());
          for (std::size_t i = 0; i < x.size(); ++i) y[i] = r2.mul(x[i], st[i]);
          if (seen.insert(y).second) next.push_back(std::move(y));
        }
      frontier.swap(next);
    }
    const std::size_t span = span_dim(m, radius);
    if (span < seen.size())
      w.violated.push_back("c: " + std::to_string(seen.size()) + " group elements in the radius-" +
                           std::to_string(radius) + " ball span only " + std::to_string(span) + " dimensions");
  }
  w.holds = w.violated.empty();
  return w;
}

}  // namespace utb

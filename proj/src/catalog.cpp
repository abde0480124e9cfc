#include "utb/catalog.hpp"

#include <sstream>

namespace utb {

namespace {

std::string var(int i) { return "X" + std::to_string(i); }

ExactMatrix diag2(const GroupSpec& s, const std::string& a, const std::string& b) {
  return matrix_from_rows({{a, "0"}, {"0", b}}, s.field(), s.nvars());
}

void add_delta(GroupSpec& s) { s.add_generator("delta", std::vector<std::vector<std::string>>{{"1", "1"}, {"0", "1"}}); }

int int_param(const std::vector<std::string>& p, std::size_t k, const std::string& family) {
  if (k >= p.size()) throw Error(ErrorKind::InvalidArgument, family + ": missing parameter " + std::to_string(k + 1));
  try {
    std::size_t used = 0;
    int v = std::stoi(p[k], &used);
    if (used != p[k].size()) throw std::invalid_argument(p[k]);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, family + ": bad integer '" + p[k] + "'");
  }
}

CoefficientField char_param(int p) {
  if (p < 0) throw Error(ErrorKind::InvalidArgument, "negative characteristic");
  return field_from_characteristic(static_cast<std::uint64_t>(p));
}

void expect_arity(const std::vector<std::string>& p, std::size_t lo, std::size_t hi, const std::string& family) {
  if (p.size() < lo || p.size() > hi) throw Error(ErrorKind::InvalidArgument, family + ": wrong number of parameters");
}

// Verdict expectations follow from the classification rules: in
// characteristic p the largest block dimension decides (>=3 non-trivial,
// 2 trivial for centered second moment, <=1 trivial for centered first
// moment); in characteristic 0 dimension >=3 is non-trivial and dimension
// <=1 trivial for centered second moment.
void expect_by_dimension(CatalogEntry& e, int dim, bool charp) {
  e.expected_dimension = dim;
  if (dim >= 3) {
    e.expected_outcome = Outcome::Nontrivial;
    e.expected_moment = MomentClass::AnyFiniteEntropyNondegenerate;
    e.verdict_basis = "block of dimension >= 3 contains a 3-dimensional lamplighter-type module: non-trivial for every "
                      "non-degenerate finite-entropy measure";
  } else if (charp) {
    e.expected_outcome = Outcome::Trivial;
    e.expected_moment = dim == 2 ? MomentClass::CenteredSecondMoment : MomentClass::CenteredFirstMoment;
    e.verdict_basis = dim == 2 ? "characteristic p, all blocks of dimension <= 2: trivial for centered finite second moment"
                               : "characteristic p, all blocks of dimension <= 1: trivial for centered finite first moment";
  } else if (dim <= 1) {
    e.expected_outcome = Outcome::Trivial;
    e.expected_moment = MomentClass::CenteredSecondMoment;
    e.verdict_basis = "characteristic 0, all blocks of dimension <= 1: trivial for centered finite second moment";
  }
}

}  // namespace

Json CatalogEntry::to_json() const {
  Json j{{"name", name}, {"family", family}, {"params", params}, {"spec", spec.to_json()}};
  j["expected_dimension"] = expected_dimension ? Json(*expected_dimension) : Json();
  j["dimension_basis"] = dimension_basis;
  j["expected_outcome"] = expected_outcome ? Json(outcome_name(*expected_outcome)) : Json();
  j["expected_moment_class"] = expected_moment ? Json(moment_class_name(*expected_moment)) : Json();
  j["verdict_basis"] = verdict_basis;
  return j;
}

std::vector<std::string> catalog_families() {
  return {"lamplighter(d,p)", "baumslag(d,p)", "g23x",   "gx_x1_x2", "lbs(d)",   "x1x2x3[(p)]",
          "xyz",              "g_alpha(a,d)",  "met_p(d,p)", "lattice(d)", "cyclic(p)"};
}

CatalogEntry build(const std::string& name) {
  auto open = name.find('(');
  if (open == std::string::npos) return build(name, {});
  if (name.back() != ')') throw Error(ErrorKind::InvalidArgument, "malformed catalog name " + name);
  std::vector<std::string> params;
  std::stringstream ss(name.substr(open + 1, name.size() - open - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(' '), e = item.find_last_not_of(' ');
    params.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return build(name.substr(0, open), params);
}

CatalogEntry build(const std::string& family, const std::vector<std::string>& p) {
  CatalogEntry e;
  e.family = family;
  e.params = p;
  e.name = family;
  if (!p.empty()) {
    e.name += "(";
    for (std::size_t k = 0; k < p.size(); ++k) e.name += (k ? "," : "") + p[k];
    e.name += ")";
  }

  if (family == "lamplighter" || family == "baumslag") {
    expect_arity(p, 2, 2, family);
    int d = int_param(p, 0, family), ch = int_param(p, 1, family);
    if (d < 1) throw Error(ErrorKind::InvalidArgument, family + ": d must be positive");
    GroupSpec s(char_param(ch), d, 2);
    add_delta(s);
    for (int i = 1; i <= d; ++i) s.add_generator("M_" + var(i), diag2(s, "1", var(i)));
    if (family == "baumslag")
      for (int i = 1; i <= d; ++i) s.add_generator("M_" + var(i) + "+1", diag2(s, "1", var(i) + "+1"));
    e.spec = std::move(s);
    e.dimension_basis = family == "lamplighter"
                            ? "the lamp module is free of rank one over the group ring of Z^d"
                            : "phi-values X_i, X_i + 1 have transcendence degree d";
    if (ch > 0 || family == "lamplighter") {
      expect_by_dimension(e, d, ch > 0);
      if (ch == 0 && d == 2) {
        e.expected_outcome = Outcome::Trivial;
        e.expected_moment = MomentClass::CenteredSecondMoment;
        e.verdict_basis = "Z^2 wreath Z: trivial for centered finite second moment";
      }
    } else {
      expect_by_dimension(e, d, false);
      if (d == 2) {
        e.expected_outcome = Outcome::ConjecturalNontrivial;
        e.expected_moment = MomentClass::AnyFiniteEntropyNondegenerate;
        e.verdict_basis = "characteristic 0 dimension-2 block outside the wreath and G_alpha patterns";
      }
    }
  } else if (family == "g23x") {
    expect_arity(p, 0, 0, family);
    GroupSpec s(CoefficientField::rationals(), 1, 2);
    add_delta(s);
    s.add_generator("M_2", diag2(s, "1", "2"));
    s.add_generator("M_3", diag2(s, "1", "3"));
    s.add_generator("M_X", diag2(s, "1", "X1"));
    e.spec = std::move(s);
    e.dimension_basis = "phi-values 2, 3, X have transcendence degree 1";
    expect_by_dimension(e, 1, false);
  } else if (family == "gx_x1_x2") {
    expect_arity(p, 0, 0, family);
    GroupSpec s(CoefficientField::rationals(), 1, 2);
    add_delta(s);
    s.add_generator("M_X", diag2(s, "1", "X1"));
    s.add_generator("M_X+1", diag2(s, "1", "X1+1"));
    s.add_generator("M_X+2", diag2(s, "1", "X1+2"));
    e.spec = std::move(s);
    e.dimension_basis = "phi-values X, X+1, X+2 have transcendence degree 1";
    expect_by_dimension(e, 1, false);
  } else if (family == "lbs" || family == "g_alpha") {
    std::string alpha = "2";
    int d;
    if (family == "lbs") {
      expect_arity(p, 1, 1, family);
      d = int_param(p, 0, family);
    } else {
      expect_arity(p, 2, 2, family);
      alpha = p[0];
      d = int_param(p, 1, family);
    }
    if (d < 1) throw Error(ErrorKind::InvalidArgument, family + ": d must be positive");
    GroupSpec s(CoefficientField::rationals(), d, 2);
    RationalFunction a = parse_rational(alpha, s.field(), d);
    if (!a.is_constant() || a.is_zero()) throw Error(ErrorKind::InvalidArgument, "alpha must be a nonzero rational");
    std::string an = a.to_string();
    auto name = [&](int i) { return d <= 3 && family == "g_alpha" ? std::string(1, static_cast<char>('X' + i - 1)) : var(i); };
    if (family == "lbs") {
      for (int i = 1; i <= d; ++i) s.add_generator("M_" + name(i), diag2(s, "1", var(i)));
      add_delta(s);
      s.add_generator("M_2", diag2(s, "1", "2"));
    } else {
      s.add_generator("M_" + an, diag2(s, "1", an));
      for (int i = 1; i <= d; ++i) s.add_generator("M_" + name(i), diag2(s, "1", var(i)));
      add_delta(s);
    }
    e.spec = std::move(s);
    e.dimension_basis = "phi-values X_1..X_d and a rational constant have transcendence degree d";
    bool unit_root = a.num().leading().c == 1 || a.num().leading().c == -1;
    expect_by_dimension(e, d, false);
    if (d >= 2) {
      e.expected_outcome = unit_root && d == 2 ? Outcome::Trivial : Outcome::Nontrivial;
      e.expected_moment = unit_root && d == 2 ? MomentClass::CenteredSecondMoment : MomentClass::AnyFiniteEntropyNondegenerate;
      e.verdict_basis = unit_root && d == 2
                            ? "alpha a root of unity: a finite-index subgroup is a quotient of a rank-two wreath product"
                            : "alpha not a root of unity with d >= 2: non-trivial for finite-entropy non-degenerate measures";
    }
  } else if (family == "x1x2x3") {
    expect_arity(p, 0, 1, family);
    int ch = p.empty() ? 0 : int_param(p, 0, family);
    GroupSpec s(char_param(ch), 3, 2);
    add_delta(s);
    for (int i = 1; i <= 3; ++i) s.add_generator("M_" + var(i), diag2(s, "1", var(i)));
    s.add_generator("M_X1+X2+X3", diag2(s, "1", "X1+X2+X3"));
    e.spec = std::move(s);
    e.dimension_basis = "contains the 3-dimensional lamplighter; phi-values have transcendence degree 3";
    expect_by_dimension(e, 3, ch > 0);
  } else if (family == "xyz") {
    expect_arity(p, 0, 0, family);
    GroupSpec s(CoefficientField::rationals(), 3, 3);
    s.add_generator("M_X", {{"X1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}});
    s.add_generator("M_Y", {{"1", "0", "0"}, {"0", "X2", "0"}, {"0", "0", "1"}});
    s.add_generator("M_Z", {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "X3"}});
    s.add_generator("delta111", {{"1", "1", "1"}, {"0", "1", "1"}, {"0", "0", "1"}});
    e.spec = std::move(s);
    e.dimension_basis = "each of the three blocks is a two-dimensional lamplighter";
    e.expected_dimension = 2;
    e.expected_outcome = Outcome::Trivial;
    e.expected_moment = MomentClass::CenteredSecondMoment;
    e.verdict_basis = "every block is a rank-two wreath product: trivial for centered finite second moment";
  } else if (family == "met_p") {
    expect_arity(p, 2, 2, family);
    int d = int_param(p, 0, family), ch = int_param(p, 1, family);
    if (d < 1) throw Error(ErrorKind::InvalidArgument, family + ": d must be positive");
    GroupSpec s(char_param(ch), d, 2);
    for (int i = 1; i <= d; ++i)
      s.add_generator("FM_" + var(i), std::vector<std::vector<std::string>>{{var(i) + "^-1", "1"}, {"0", var(i)}});
    e.spec = std::move(s);
    e.dimension_basis = "commutators generate a free module over the group ring of Z^d";
    if (ch > 0 || d != 2) expect_by_dimension(e, d, ch > 0);
    else e.expected_dimension = d;
  } else if (family == "lattice") {
    expect_arity(p, 1, 1, family);
    int d = int_param(p, 0, family);
    if (d < 1) throw Error(ErrorKind::InvalidArgument, "lattice: d must be positive");
    GroupSpec s(CoefficientField::rationals(), d, 2);
    for (int i = 1; i <= d; ++i) s.add_generator("M_" + var(i), diag2(s, "1", var(i)));
    e.spec = std::move(s);
    e.expected_outcome = Outcome::Trivial;
    e.expected_moment = MomentClass::AnyFiniteEntropyNondegenerate;
    e.verdict_basis = "abelian group: every measure has trivial boundary";
  } else if (family == "cyclic") {
    expect_arity(p, 1, 1, family);
    int ch = int_param(p, 0, family);
    if (ch < 2) throw Error(ErrorKind::InvalidArgument, "cyclic: p must be prime");
    GroupSpec s(char_param(ch), 0, 2);
    add_delta(s);
    e.spec = std::move(s);
    e.expected_outcome = Outcome::Trivial;
    e.expected_moment = MomentClass::AnyFiniteEntropyNondegenerate;
    e.verdict_basis = "finite group";
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown catalog entry '" + family + "'");
  }
  return e;
}

MeasureKind measure_kind_from_name(const std::string& s) {
  if (s == "uniform_symmetric") return MeasureKind::UniformSymmetric;
  if (s == "base_plus_lamp") return MeasureKind::BasePlusLamp;
  if (s == "lazy_uniform") return MeasureKind::LazyUniform;
  throw Error(ErrorKind::InvalidArgument, "unknown measure kind " + s);
}

StepMeasure default_measure(const GroupSpec& spec, MeasureKind kind) {
  StepMeasure m;
  const int ng = static_cast<int>(spec.generators().size());
  if (ng == 0) throw Error(ErrorKind::InvalidArgument, "group has no generators");
  if (kind == MeasureKind::BasePlusLamp) {
    std::vector<Word> words;
    for (int g = 0; g < ng; ++g) {
      if (spec.generators()[static_cast<std::size_t>(g)].matrix.is_diagonal()) {
        words.push_back({Letter{g, false}});
        words.push_back({Letter{g, true}});
      }
    }
    std::size_t nbase = words.size();
    for (int g = 0; g < ng; ++g)
      if (!spec.generators()[static_cast<std::size_t>(g)].matrix.is_diagonal()) words.push_back({Letter{g, false}});
    if (nbase == 0 || words.size() == nbase)
      throw Error(ErrorKind::InvalidArgument, "base_plus_lamp needs diagonal and non-diagonal generators");
    for (auto& w : words) m.atoms.push_back(Atom{w, 1.0 / static_cast<double>(words.size())});
    return m;
  }
  double lazy = kind == MeasureKind::LazyUniform ? 0.5 : 0.0;
  double w = (1.0 - lazy) / (2.0 * ng);
  for (int g = 0; g < ng; ++g) {
    m.atoms.push_back(Atom{{Letter{g, false}}, w});
    m.atoms.push_back(Atom{{Letter{g, true}}, w});
  }
  if (lazy > 0) m.atoms.push_back(Atom{{}, lazy});
  return m;
}

StepMeasure default_measure(const CatalogEntry& entry, MeasureKind kind) { return default_measure(entry.spec, kind); }

GroupSpec base_group(const GroupSpec& spec) {
  GroupSpec b(spec.field(), spec.nvars(), spec.size());
  for (const auto& g : spec.generators())
    if (g.matrix.is_diagonal()) b.add_generator(g.name, g.matrix);
  if (b.generators().empty()) throw Error(ErrorKind::InvalidArgument, "no diagonal generators");
  return b;
}

}  // namespace utb

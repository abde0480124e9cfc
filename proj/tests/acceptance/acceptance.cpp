// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria. "--only N" runs a single criterion.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "../unit/gen.hpp"
#include "utb/catalog.hpp"
#include "utb/cli.hpp"
#include "utb/fingerprint.hpp"
#include "utb/parse.hpp"
#include "utb/pipeline.hpp"
#include "utb/star_divide.hpp"
#include "utb/walk.hpp"

using namespace utb;

namespace {

// pinned tolerances
constexpr double kFitTol = 0.25;
constexpr double kZ3RangeLo = 0.61, kZ3RangeHi = 0.71;
constexpr double kZ2RangeMax = 0.45;
constexpr double kZExpLo = 0.4, kZExpHi = 0.6;
constexpr double kZ3ExpLo = 1.3, kZ3ExpHi = 1.7;
constexpr double kOracleRelErr = 0.05;
constexpr double kRankHi = 0.2, kRankLo = 0.08, kRankSe = 0.02;
constexpr double kCautiousRatio = 2.0, kCautiousMin = 0.1;
constexpr double kSubadditiveSe = 3.0;

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double x, int prec = 3) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*f", prec, x);
  return b;
}

ModuleSpec block_module(const std::string& name) {
  return ModuleSpec::from_phis(phi_values(build(name).spec, Pair{1, 2}));
}

void dimension_row(Check& o, const std::string& label, const ModuleSpec& m, int expected) {
  const DimensionReport r = dimension_estimate(m);
  const bool fit_ok = r.fit && std::abs(r.fit->exponent - expected) <= kFitTol;
  o.require(r.dimension == expected && !r.ambiguous && fit_ok && r.shortcuts_agree_with_fit(),
            label + " dim " + std::to_string(r.dimension) + " fit " + (r.fit ? fmt(r.fit->exponent) : "none"));
}

void criterion1(Check& o) {
  for (int d = 1; d <= 3; ++d)
    for (const std::string p : {"2", "3"}) {
      const std::string a = std::to_string(d) + "," + p;
      dimension_row(o, "lamplighter(" + a + ")", block_module("lamplighter(" + a + ")"), d);
      dimension_row(o, "baumslag(" + a + ")", block_module("baumslag(" + a + ")"), d);
    }
  dimension_row(o, "g23x", block_module("g23x"), 1);
  dimension_row(o, "g_alpha(2,2)", block_module("g_alpha(2,2)"), 2);
  ModuleSpec q = block_module("lamplighter(3,2)");
  q.relations = {parse_laurent("1+X+Y+Z", q.field, q.nvars)};
  dimension_row(o, "lamplighter(3,2)/(1+X+Y+Z)", q, 2);
}

void criterion2(Check& o) {
  const GroupSpec spec = build("xyz").spec;
  BlockOptions opt;
  opt.depth = 8;
  const BlockReport r = decompose(spec, TOrder::partial_u(3), opt);
  std::set<Pair> got;
  for (const auto& p : r.valid_pairs()) got.insert(p);
  o.require(got == std::set<Pair>{{1, 2}, {2, 3}, {1, 3}}, std::to_string(got.size()) + " valid blocks");
  for (const auto& p : r.valid_pairs()) {
    const PairResult& b = r.at(p);
    const ExactMatrix w = spec.eval(b.witness);
    const bool exact = b.exact_verified && w.is_unipotent() && valid_wrt(w, p, TOrder::partial_u(3));
    o.require(exact && static_cast<int>(b.witness.size()) <= 8,
              p.str() + " witness length " + std::to_string(b.witness.size()) + (exact ? " exact" : " unverified"));
    bool phi_ok = b.phi.size() == spec.generators().size();
    for (std::size_t g = 0; phi_ok && g < b.phi.size(); ++g) {
      const ExactMatrix& m = spec.generators()[g].matrix;
      phi_ok = b.phi[g].exact_equal(m(p.i - 1, p.i - 1) / m(p.j - 1, p.j - 1));
    }
    o.require(phi_ok, p.str() + " phi-set matches the diagonal pairs");
  }
}

void criterion3(Check& o) {
  const std::vector<std::tuple<std::string, std::string, std::string, std::string>> table{
      {"lamplighter(3,2)", "Nontrivial", "", ""},
      {"lamplighter(3,3)", "Nontrivial", "", ""},
      {"lamplighter(2,2)", "Trivial", "CenteredSecondMoment", ""},
      {"lamplighter(2,3)", "Trivial", "CenteredSecondMoment", ""},
      {"baumslag(2,2)", "Trivial", "CenteredSecondMoment", ""},
      {"baumslag(2,3)", "Trivial", "CenteredSecondMoment", ""},
      {"baumslag(3,2)", "Nontrivial", "", ""},
      {"baumslag(3,3)", "Nontrivial", "", ""},
      {"g23x", "Trivial", "", "char-0 dim<=1"},
      {"x1x2x3", "Nontrivial", "", "dim>=3"},
      {"xyz", "Trivial", "", ""},
      {"lbs(2)", "Nontrivial", "", ""},
      {"g_alpha(2,2)", "Nontrivial", "", ""},
      {"g_alpha(-1,2)", "Trivial", "", "root of unity"},
  };
  int ok = 0;
  for (const auto& [name, outcome, moment, rule] : table) {
    const Verdict v = analyze(build(name).spec).verdict;
    bool good = outcome_name(v.outcome) == outcome;
    if (!moment.empty()) good = good && moment_class_name(v.moment_class) == moment;
    if (!rule.empty()) good = good && v.rule == rule;
    good = good && !v.citation.empty() && !v.basis.empty();
    for (const auto& b : v.basis) good = good && !b.citation.empty();
    if (good) ++ok;
    else o.require(false, name + " -> " + outcome_name(v.outcome) + "/" + moment_class_name(v.moment_class) + " " + v.rule);
  }
  o.require(ok == static_cast<int>(table.size()), std::to_string(ok) + "/" + std::to_string(table.size()) + " rows");
}

WalkConfig lattice_walk(int d, std::int64_t n, std::int64_t walkers, std::uint64_t seed) {
  WalkConfig c;
  c.spec = build("lattice(" + std::to_string(d) + ")").spec;
  c.measure = default_measure(c.spec, MeasureKind::UniformSymmetric);
  c.n = n;
  c.walkers = walkers;
  c.seed = seed;
  return c;
}

void criterion4(Check& o) {
  {
    // projection of lamplighter(3,2) onto its base
    WalkConfig c;
    c.spec = base_group(build("lamplighter(3,2)").spec);
    c.measure = default_measure(c.spec, MeasureKind::UniformSymmetric);
    c.n = 10000;
    c.walkers = 200;
    c.seed = 11;
    c.stats = {Stat::Range};
    const double r = simulate(c).range.at(10000).mean / 1e4;
    o.require(r >= kZ3RangeLo && r <= kZ3RangeHi, "(a) Z^3 range/n " + fmt(r));
  }
  {
    WalkConfig c = lattice_walk(2, 10000, 200, 12);
    c.stats = {Stat::Range};
    c.checkpoints = {100, 1000, 10000};
    const WalkStats s = simulate(c);
    const double r2 = s.range.at(100).mean / 100, r3 = s.range.at(1000).mean / 1000, r4 = s.range.at(10000).mean / 1e4;
    o.require(r2 > r3 && r3 > r4 && r4 < kZ2RangeMax, "(b) Z^2 range/n " + fmt(r2) + " " + fmt(r3) + " " + fmt(r4));
  }
  for (auto [d, walkers, lo, hi] : {std::tuple{1, 100000, kZExpLo, kZExpHi}, std::tuple{3, 1000000, kZ3ExpLo, kZ3ExpHi}}) {
    const WalkConfig c = lattice_walk(d, 200, walkers, 15);
    const TransienceTable t = strong_transience_probe(c);
    const double err = t.relative_error(exact_return_probabilities(c.spec, c.measure, 50), 50);
    const double e = t.exponent ? *t.exponent : -1;
    o.require(t.exponent && e >= lo && e <= hi && err < kOracleRelErr,
              "(c) Z^" + std::to_string(d) + " exponent " + fmt(e) + " oracle relerr " + fmt(err, 4));
  }
}

void criterion5(Check& o) {
  for (auto [name, above, bound] : {std::tuple{"lamplighter(3,2)", true, kRankHi}, std::tuple{"lamplighter(2,2)", false, kRankLo}}) {
    const CatalogEntry e = build(name);
    WalkConfig c;
    c.spec = e.spec;
    c.measure = default_measure(e, MeasureKind::BasePlusLamp);
    c.n = 10000;
    c.walkers = 200;
    c.seed = 13;
    c.stats = {Stat::DeltaRank};
    const WalkStats s = simulate(c, AdmissibleRelation::identity(), default_delta(e.spec));
    const double r = s.delta_rank.at(10000).mean / 1e4, se = s.delta_rank.at(10000).se / 1e4;
    const bool ok = (above ? r >= bound : r <= bound) && se < kRankSe;
    o.require(ok, std::string(name) + " delta_rank/n " + fmt(r) + " se " + fmt(se, 4) + (above ? " need >= " : " need <= ") +
                      fmt(bound, 2));
  }
}

void criterion6(Check& o) {
  WalkConfig c = lattice_walk(2, 4096, 2000, 14);
  c.checkpoints = {256, 1024, 4096};
  const CautiousTable t = cautiousness_probe(c, ScaleFn::Sqrt, {1.0});
  double lo = 1, hi = 0;
  std::string ps;
  for (const auto& r : t.rows) {
    lo = std::min(lo, r.prob.mean);
    hi = std::max(hi, r.prob.mean);
    ps += fmt(r.prob.mean) + " ";
  }
  o.require(t.rows.size() == 3 && lo >= kCautiousMin && hi <= kCautiousRatio * lo, "probabilities " + ps);
}

ExactMatrix random_unipotent(std::mt19937_64& rng, int n, int nvars) {
  const auto Q = CoefficientField::rationals();
  ExactMatrix u = ExactMatrix::identity(n, RationalFunction(Q, nvars));
  std::uniform_int_distribution<int> c(-3, 3), e(-1, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Exponent x(static_cast<std::size_t>(nvars));
      for (auto& v : x) v = e(rng);
      u(i, j) = RationalFunction(LaurentPoly::monomial(Q, nvars, x, c(rng)) + LaurentPoly::constant(Q, nvars, c(rng)));
    }
  return u;
}

std::string pipeline_digest(const std::string& tag) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("utb-acceptance-" + tag);
  fs::remove_all(dir);
  std::ostringstream out, err;
  const int rc = run_cli({"utb", "--seed", "5", "--out", dir.string(), "pipeline", "catalog:lamplighter(2,2)", "--n", "300",
                          "--walkers", "16"},
                         out, err);
  if (rc != ExitOk) return "rc=" + std::to_string(rc);
  std::ifstream f(dir / "manifest.json");
  return Json::parse(f)["outputs"][0]["digest"].get<std::string>();
}

void criterion7(Check& o) {
  const auto Q = CoefficientField::rationals();
  std::mt19937_64 rng(71);

  int bad = 0;
  for (int it = 0; it < 1000; ++it) {
    const auto f = it % 2 ? Q : CoefficientField::prime(3);
    const int n = 1 + static_cast<int>(rng() % 3);
    auto a = gen::laurent(rng, f, n, 5, -3, 3), b = gen::laurent(rng, f, n, 5, -3, 3), c = gen::laurent(rng, f, n, 5, -3, 3);
    bad += !((a * b) * c == a * (b * c) && a * (b + c) == a * b + a * c && a * b == b * a && a + b == b + a);
  }
  o.require(bad == 0, "ring axioms " + std::to_string(bad) + "/1000 bad");

  bad = 0;
  for (int done = 0; done < 1000;) {
    const auto f = done % 2 ? Q : CoefficientField::prime(5);
    const int n = 1 + static_cast<int>(rng() % 3);
    auto v = gen::nonzero(rng, f, n, 4, -2, 3);
    const int axis = star_axis(v);
    if (axis < 0) continue;
    auto u = gen::laurent(rng, f, n, 8, -4, 4);
    const auto d = star_divide(u, v, axis);
    bad += !(v * d.t + d.w == u);
    ++done;
  }
  o.require(bad == 0, "star_divide reconstruction " + std::to_string(bad) + "/1000 bad");

  bad = 0;
  for (int it = 0; it < 1000; ++it) {
    const int d = 1 + static_cast<int>(rng() % 4), m = 1 + static_cast<int>(rng() % 50), s = 1 + static_cast<int>(rng() % 6);
    std::set<Exponent> W;
    for (int k = 0; k < m; ++k) {
      Exponent e(static_cast<std::size_t>(d));
      for (auto& v : e) v = static_cast<int>(rng() % (2 * s + 1)) - s;
      W.insert(e);
    }
    const std::vector<Exponent> w(W.begin(), W.end());
    const auto nb = new_basis(w, d);
    std::set<std::int64_t> firsts;
    for (const auto& x : w) firsts.insert(nb.first_coordinate(x));
    bad += firsts.size() != w.size() || std::abs(std::abs(nb.rows.cast<double>().determinant()) - 1) > 1e-9;
  }
  o.require(bad == 0, "new_basis injectivity " + std::to_string(bad) + "/1000 bad");

  bad = 0;
  int count = 0;
  for (int n : {3, 4}) {
    const std::vector<TOrder> orders{TOrder::partial_u(n), TOrder::row_major(n), TOrder::col_major(n)};
    const auto pairs = all_pairs(n);
    for (int it = 0; it < 250; ++it, ++count) {
      const TOrder& t = orders[static_cast<std::size_t>(it) % orders.size()];
      const Pair p = pairs[rng() % pairs.size()];
      auto nt = [&] {
        ExactMatrix u = random_unipotent(rng, n, 2);
        for (const auto& q : pairs)
          if (t.geq(q, p)) u(q.i - 1, q.j - 1) = RationalFunction(Q, 2);
        return u;
      };
      const ExactMatrix a = nt(), b = nt();
      ExactMatrix g = random_unipotent(rng, n, 2);
      for (int i = 0; i < n; ++i)
        g(i, i) = RationalFunction(LaurentPoly::monomial(Q, 2, {static_cast<int>(rng() % 3) - 1, 1}, 1 + static_cast<int>(rng() % 3)));
      bad += !(in_nt(a * b, p, t) && in_nt(a.inverse(), p, t) && in_nt(g * a * g.inverse(), p, t));
    }
  }
  o.require(bad == 0 && count == 500, "N^T closure " + std::to_string(bad) + "/" + std::to_string(count) + " bad");

  int disagree = 0;
  for (int it = 0; it < 10000; ++it) {
    const auto f = it % 3 == 0 ? CoefficientField::prime(2) : Q;
    const int n = 1 + static_cast<int>(rng() % 2);
    auto a = gen::nonzero(rng, f, n, 4, 0, 5), b = gen::nonzero(rng, f, n, 3, 0, 5);
    const RationalFunction x(a, b);
    RationalFunction y;
    if (rng() % 2) {
      auto c = gen::nonzero(rng, f, n, 3, 0, 5);
      y = RationalFunction(a * c, b * c);
    } else {
      y = RationalFunction(a + gen::laurent(rng, f, n, 1, 0, 5), b);
    }
    disagree += rf_equal(x, y, EqualityMode::Exact) !=
                rf_equal(x, y, EqualityMode::Randomized, FingerprintContext(static_cast<std::uint64_t>(it)));
  }
  o.require(disagree == 0, "randomized vs exact " + std::to_string(disagree) + "/10000 disagreements");

  {
    const CatalogEntry e = build("lamplighter(3,2)");
    WalkConfig c;
    c.spec = e.spec;
    c.measure = default_measure(e, MeasureKind::BasePlusLamp);
    c.n = 2000;
    c.walkers = 100;
    c.seed = 7;
    c.stats = {Stat::DeltaRank};
    c.checkpoints = {500, 1000, 1500, 2000};
    const auto r = simulate(c, AdmissibleRelation::identity(), default_delta(e.spec)).delta_rank;
    bool ok = true;
    for (std::int64_t a : {500, 1000})
      for (std::int64_t b : {500, 1000}) {
        const double se = std::sqrt(r.at(a + b).se * r.at(a + b).se + r.at(a).se * r.at(a).se + r.at(b).se * r.at(b).se);
        ok = ok && r.at(a + b).mean <= r.at(a).mean + r.at(b).mean + kSubadditiveSe * se;
      }
    o.require(ok, "delta-rank subadditivity");
  }

  const std::string d1 = pipeline_digest("a"), d2 = pipeline_digest("b");
  o.require(d1 == d2 && d1.rfind("rc=", 0) != 0, "pipeline determinism " + d1);
}

void criterion8(Check& o) {
  for (int d : {1, 2}) {
    const auto stages = recurrent_measure_stages(d, 2);
    const GroupSpec g = recurrent_group(d);
    for (const auto& s : stages) {
      // recompute the partial sum from an independent convolution run
      const auto p = exact_return_probabilities(g, s.measure, static_cast<int>(s.N));
      double sum = 0;
      for (std::int64_t t = 1; t <= s.N; ++t) sum += p[static_cast<std::size_t>(t)] / 2;
      const bool ok = s.nb_ok && s.sum_ok && s.N * s.b <= 0.5 && sum >= s.stage &&
                      std::abs(sum - s.partial_sum) <= 1e-9 * std::max(1.0, sum);
      o.require(ok, "Z^" + std::to_string(d) + " stage " + std::to_string(s.stage) + " N " + std::to_string(s.N) +
                        " N*b " + fmt(s.N * s.b, 4) + " sum " + fmt(sum));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc == 3 && std::string(argv[1]) == "--only") only = std::atoi(argv[2]);
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"dimension table", criterion1},     {"xyz block decomposition", criterion2},
      {"verdict table", criterion3},       {"simulation signatures", criterion4},
      {"delta-rank separation", criterion5}, {"cautiousness stability", criterion6},
      {"property suites", criterion7},     {"recurrent-measure stages", criterion8},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && static_cast<int>(k) + 1 != only) continue;
    Check o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << k + 1 << " " << criteria[k].first << " (" << fmt(secs, 1)
              << "s): " << o.detail.str() << std::endl;
  }
  return failed;
}

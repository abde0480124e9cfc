#include <doctest.h>

#include "utb/catalog.hpp"
#include "utb/error.hpp"
#include "utb/walk.hpp"

using namespace utb;

namespace {

WalkConfig lattice_walk(int d, std::int64_t n, std::int64_t walkers, std::uint64_t seed) {
  WalkConfig c;
  c.spec = build("lattice(" + std::to_string(d) + ")").spec;
  c.measure = default_measure(c.spec, MeasureKind::UniformSymmetric);
  c.n = n;
  c.walkers = walkers;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("deterministic walk on Z") {
  WalkConfig c = lattice_walk(1, 50, 3, 1);
  c.measure.atoms = {Atom{Word{Letter{0, false}}, 1.0}};
  c.checkpoints = {10, 50};
  c.hit_drift = {1.0};
  c.epsilons = {0.5, 2.0};
  auto s = simulate(c);
  CHECK(s.range[50].mean == 50);
  CHECK(s.range[10].mean == 10);
  CHECK(s.abelian_drift[50].mean == 50);
  CHECK(s.return_freq[50].mean == 0);
  CHECK(s.hits[50].mean == 50);  // gamma_t = t
  CHECK(s.cautious_prob[{50, 0.5}].mean == 0);
  CHECK(s.engine == "diagonal-monomial");
}

TEST_CASE("zero walk") {
  WalkConfig c = lattice_walk(2, 64, 5, 2);
  c.measure.atoms = {Atom{Word{}, 1.0}};
  c.checkpoints = {16, 64};
  c.epsilons = {0.01, 1.0};
  auto s = simulate(c);
  for (auto t : {16, 64}) {
    CHECK(s.range[t].mean == 1);
    CHECK(s.return_freq[t].mean == 1);
    CHECK(s.cautious_prob[{t, 0.01}].mean == 1);
    CHECK(s.cautious_prob[{t, 1.0}].mean == 1);
  }
}

TEST_CASE("lazy walk on Z/2Z returns with probability one half") {
  auto e = build("cyclic(2)");
  WalkConfig c;
  c.spec = e.spec;
  c.measure = default_measure(e, MeasureKind::LazyUniform);
  c.n = 20;
  c.walkers = 20000;
  c.seed = 3;
  auto exact = exact_return_probabilities(c.spec, c.measure, 20);
  for (int t = 1; t <= 20; ++t) CHECK(exact[static_cast<std::size_t>(t)] == doctest::Approx(0.5));
  auto tab = strong_transience_probe(c);
  for (const auto& r : tab.rows) CHECK(std::abs(r.freq.mean - 0.5) < 5 * r.freq.se + 1e-9);
  CHECK(tab.exponent);
  CHECK(std::abs(*tab.exponent) < 0.05);
  CHECK_FALSE(tab.consistent);
}

TEST_CASE("exact oracle on Z") {
  WalkConfig c = lattice_walk(1, 1, 1, 1);
  auto p = exact_return_probabilities(c.spec, c.measure, 6);
  CHECK(p[1] == 0);
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK(p[4] == doctest::Approx(6.0 / 16));
  CHECK(p[6] == doctest::Approx(20.0 / 64));
  // the fingerprint engine agrees with the lattice engine
  auto l = build("lamplighter(1,2)");
  auto m = default_measure(l, MeasureKind::UniformSymmetric);
  auto q = exact_return_probabilities(l.spec, m, 6);
  // atoms delta, delta^-1 (equal in char 2), M_X, M_X^-1 at 1/4 each: the
  // four delta pairs and the two cancelling X pairs return
  CHECK(q[2] == doctest::Approx(6.0 / 16));
}

TEST_CASE("SRW on Z: decay exponent near one half, oracle agreement") {
  WalkConfig c = lattice_walk(1, 200, 20000, 4);
  auto tab = strong_transience_probe(c);
  REQUIRE(tab.exponent);
  CHECK(*tab.exponent > 0.4);
  CHECK(*tab.exponent < 0.6);
  CHECK_FALSE(tab.consistent);
  auto exact = exact_return_probabilities(c.spec, c.measure, 50);
  CHECK(tab.relative_error(exact, 50) < 0.05);
  // odd times never return: reported missing, not extrapolated
  CHECK(tab.rows[0].missing);
}

TEST_CASE("same seed, same statistics, any thread count") {
  auto e = build("lamplighter(2,2)");
  WalkConfig c;
  c.spec = e.spec;
  c.measure = default_measure(e, MeasureKind::BasePlusLamp);
  c.n = 300;
  c.walkers = 150;
  c.seed = 99;
  c.checkpoints = {100, 300};
  c.threads = 1;
  auto a = simulate(c, AdmissibleRelation::conjugate_vector(), default_delta(e.spec));
  c.threads = 3;
  auto b = simulate(c, AdmissibleRelation::conjugate_vector(), default_delta(e.spec));
  CHECK(a.to_json().dump() == b.to_json().dump());
  c.seed = 100;
  auto d = simulate(c, AdmissibleRelation::conjugate_vector(), default_delta(e.spec));
  CHECK(a.to_json().dump() != d.to_json().dump());
}

TEST_CASE("per-trajectory ordering of ranks") {
  for (const char* name : {"lamplighter(2,2)", "lamplighter(3,2)", "lamplighter(2,0)", "gx_x1_x2"}) {
    CAPTURE(name);
    auto e = build(name);
    WalkConfig c;
    c.spec = e.spec;
    c.measure = default_measure(e, MeasureKind::BasePlusLamp);
    c.n = 400;
    c.walkers = 40;
    c.seed = 5;
    c.checkpoints = {50, 200, 400};
    c.keep_per_walker = true;
    auto s = simulate(c, AdmissibleRelation::conjugate_vector(), default_delta(e.spec));
    REQUIRE(s.per_walker.size() == 40);
    for (const auto& rows : s.per_walker)
      for (const auto& r : rows) {
        CHECK(r.delta_rank <= r.delta_steps);
        CHECK(r.delta_rank <= r.gen_range);
        CHECK(r.gen_range <= r.range);
        CHECK(r.range <= r.t);
      }
  }
}

TEST_CASE("evaluation engine for non-monomial blocks") {
  auto e = build("gx_x1_x2");
  WalkConfig c;
  c.spec = e.spec;
  c.measure = default_measure(e, MeasureKind::BasePlusLamp);
  c.n = 300;
  c.walkers = 8;
  c.seed = 6;
  c.stats = {Stat::DeltaRank};
  auto s = simulate(c, AdmissibleRelation::identity(), default_delta(e.spec));
  CHECK(s.delta_engine == "evaluation");
  CHECK(s.delta_rank[300].mean > 1);
  CHECK(s.delta_rank[300].mean <= s.delta_steps[300].mean);
}

TEST_CASE("delta rank: subadditivity within three standard errors") {
  auto e = build("lamplighter(3,2)");
  WalkConfig c;
  c.spec = e.spec;
  c.measure = default_measure(e, MeasureKind::BasePlusLamp);
  c.n = 2000;
  c.walkers = 100;
  c.seed = 7;
  c.stats = {Stat::DeltaRank};
  c.checkpoints = {500, 1000, 1500, 2000};
  auto s = simulate(c, AdmissibleRelation::identity(), default_delta(e.spec));
  const auto& r = s.delta_rank;
  for (std::int64_t a : {500, 1000})
    for (std::int64_t b : {500, 1000}) {
      if (a + b > 2000) continue;
      const double se = std::sqrt(r.at(a + b).se * r.at(a + b).se + r.at(a).se * r.at(a).se + r.at(b).se * r.at(b).se);
      CHECK(r.at(a + b).mean <= r.at(a).mean + r.at(b).mean + 3 * se);
    }
}

TEST_CASE("admissibility sampling") {
  // lamplighter: distinct base points give distinct lines
  auto l = build("lamplighter(2,2)");
  WalkConfig c;
  c.spec = l.spec;
  c.measure = default_measure(l, MeasureKind::UniformSymmetric);
  c.n = 200;
  c.walkers = 10;
  CHECK_NOTHROW(check_admissible(c, AdmissibleRelation::conjugate_vector()));
  CHECK_NOTHROW(check_admissible(c, AdmissibleRelation::identity()));
  // g23x: 2^a 3^b X^c and X^c span the same line
  auto g = build("g23x");
  c.spec = g.spec;
  c.measure = default_measure(g, MeasureKind::UniformSymmetric);
  CHECK_THROWS_AS(check_admissible(c, AdmissibleRelation::conjugate_vector()), Error);
  auto lump = AdmissibleRelation::user([](std::uint64_t, const std::vector<std::int64_t>&, std::int64_t) { return 0ULL; });
  CHECK_THROWS_AS(simulate(c, lump), Error);
  auto by_time = AdmissibleRelation::user([](std::uint64_t k, const std::vector<std::int64_t>&, std::int64_t) { return k; });
  CHECK_NOTHROW(check_admissible(c, by_time));
}

TEST_CASE("cautiousness on Z^2 is stable across scales") {
  WalkConfig c = lattice_walk(2, 4096, 1000, 8);
  c.checkpoints = {256, 1024, 4096};
  auto tab = cautiousness_probe(c, ScaleFn::Sqrt, {1.0});
  REQUIRE(tab.rows.size() == 3);
  for (const auto& r : tab.rows) CHECK(r.prob.mean >= 0.1);
  for (const auto& a : tab.rows)
    for (const auto& b : tab.rows) CHECK(a.prob.mean <= 2 * b.prob.mean);
}

TEST_CASE("drifted walk is never cautious at sqrt scale") {
  WalkConfig c = lattice_walk(1, 400, 20, 9);
  c.measure.atoms = {Atom{Word{Letter{0, false}}, 1.0}};
  c.checkpoints = {100, 400};
  auto tab = cautiousness_probe(c, ScaleFn::Sqrt, {0.5, 0.9});
  for (const auto& r : tab.rows) CHECK(r.prob.mean == 0);
}

TEST_CASE("recurrent measure stages") {
  CHECK(recurrent_measure_stages(1, 0).empty());
  for (int d : {1, 2}) {
    auto st = recurrent_measure_stages(d, 2);
    REQUIRE(st.size() == 2);
    CHECK(st[0].a == 1);
    const GroupSpec g = recurrent_group(d);
    for (const auto& s : st) {
      CAPTURE(s.stage);
      CHECK(static_cast<double>(s.N) * s.b <= 0.5);
      CHECK(s.nb_ok);
      CHECK(s.sum_ok);
      CHECK(s.envelope_sum >= s.stage);
      // re-derive the partial sum from a fresh oracle
      auto p = exact_return_probabilities(g, s.measure, static_cast<int>(s.N));
      double sum = 0;
      for (std::size_t t = 1; t < p.size(); ++t) sum += p[t] / 2;
      CHECK(sum == doctest::Approx(s.partial_sum));
      CHECK(sum >= s.stage);
      double mass = 0;
      for (const auto& a : s.measure.atoms) mass += a.p;
      CHECK(mass == doctest::Approx(1));
      CHECK(s.measure.symmetric(g));
    }
    CHECK(st[1].C <= st[0].C);
    CHECK(st[1].a <= st[0].b / 2 + 1e-15);
    CHECK(st[1].b <= st[0].b / 2 + 1e-15);
  }
  CHECK_THROWS_AS(recurrent_measure_stages(3, 1), Error);
  RecurrentOptions tight;
  tight.max_N = 2;
  CHECK_THROWS_AS(recurrent_measure_stages(2, 2, tight), Error);
}

TEST_CASE("config validation") {
  WalkConfig c = lattice_walk(1, 10, 1, 1);
  c.checkpoints = {11};
  CHECK_THROWS_AS(simulate(c), Error);
  c.checkpoints = {};
  c.walkers = 0;
  CHECK_THROWS_AS(simulate(c), Error);
  CHECK(stat_from_name("deltarank") == Stat::DeltaRank);
  CHECK_THROWS_AS(stat_from_name("nope"), Error);
}

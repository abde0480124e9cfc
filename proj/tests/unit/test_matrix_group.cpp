#include <doctest.h>

#include <random>

#include "utb/error.hpp"
#include "utb/group.hpp"
#include "utb/torder.hpp"

using namespace utb;

namespace {

const CoefficientField Q = CoefficientField::rationals();

ExactMatrix m(const std::vector<std::vector<std::string>>& rows, int nvars = 2, CoefficientField f = Q) {
  return matrix_from_rows(rows, f, nvars);
}

GroupSpec xyz_like() {
  GroupSpec s(Q, 3, 3);
  s.add_generator("M_X", {{"X", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}});
  s.add_generator("M_Y", {{"1", "0", "0"}, {"0", "Y", "0"}, {"0", "0", "1"}});
  s.add_generator("M_Z", {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "Z"}});
  s.add_generator("delta111", {{"1", "1", "1"}, {"0", "1", "1"}, {"0", "0", "1"}});
  return s;
}

ExactMatrix random_unipotent(std::mt19937_64& rng, int n, int nvars) {
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

// random element of N^T_p: random unipotent with coordinates >=_T p zeroed
ExactMatrix random_nt(std::mt19937_64& rng, int n, Pair p, const TOrder& t) {
  ExactMatrix u = random_unipotent(rng, n, 2);
  for (const auto& q : all_pairs(n))
    if (t.geq(q, p)) u(q.i - 1, q.j - 1) = RationalFunction(Q, 2);
  return u;
}

}  // namespace

TEST_CASE("mat_mul examples") {
  auto F2 = CoefficientField::prime(2);
  auto d = m({{"1", "1"}, {"0", "1"}}, 1, F2);
  CHECK((d * d).is_identity());
  auto mx = m({{"1", "0"}, {"0", "X"}});
  auto my = m({{"1", "0"}, {"0", "Y"}});
  CHECK(mx * my == my * mx);
  auto delta = m({{"1", "1"}, {"0", "1"}});
  CHECK((mx.inverse() * delta * mx)(0, 1).exact_equal(parse_rational("X", Q, 2)));
  CHECK((mx * delta * mx.inverse())(0, 1).exact_equal(parse_rational("1/X", Q, 2)));
  try {
    (void)(delta * ExactMatrix::identity(3, RationalFunction(Q, 2)));
    FAIL("expected mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ArityMismatch);
  }
}

TEST_CASE("mat_inv examples") {
  auto id = ExactMatrix::identity(3, RationalFunction(Q, 1));
  CHECK(id.inverse().is_identity());
  auto delta = m({{"1", "1"}, {"0", "1"}});
  CHECK(delta.inverse()(0, 1).exact_equal(parse_rational("-1", Q, 2)));
  auto d3 = m({{"1", "1", "1"}, {"0", "1", "1"}, {"0", "0", "1"}});
  CHECK((d3 * d3.inverse()).is_identity());
  CHECK((d3.inverse() * d3).is_identity());
  auto sing = m({{"1", "1"}, {"0", "1"}});
  sing(1, 1) = RationalFunction(Q, 2);
  CHECK_THROWS_AS(sing.inverse(), Error);
}

TEST_CASE("eval_word examples") {
  GroupSpec g(Q, 2, 2);
  g.add_generator("M_2", {{"1", "0"}, {"0", "2"}});
  g.add_generator("M_X", {{"1", "0"}, {"0", "X"}});
  g.add_generator("delta", {{"1", "1"}, {"0", "1"}});
  CHECK(g.eval({}).is_identity());
  CHECK(g.eval(g.parse_word({"M_X", "~M_X"})).is_identity());
  CHECK(g.eval(g.parse_word({"M_X", "M_X^-1"})).is_identity());
  auto w = g.eval(g.parse_word({"~M_2", "delta", "M_2"}));
  CHECK(w(0, 1).exact_equal(parse_rational("2", Q, 2)));
  CHECK(w == g.eval(g.parse_word({"delta", "delta"})));
  try {
    (void)g.parse_word({"M_Q"});
    FAIL("expected unknown generator");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownGenerator);
  }
}

TEST_CASE("ut_part_and_diag examples") {
  auto d = m({{"X", "0"}, {"0", "Y"}});
  auto f = ut_part_and_diag(d);
  CHECK(f.unip.is_identity());
  CHECK(f.diag[0].exact_equal(parse_rational("X", Q, 2)));
  auto delta = m({{"1", "1"}, {"0", "1"}});
  auto g = ut_part_and_diag(delta);
  CHECK(g.unip == delta);
  CHECK(g.diag[0].is_one());
  auto dx = m({{"X", "0"}, {"0", "1"}});
  auto h = ut_part_and_diag(dx * delta);
  CHECK(h.unip == delta);
  auto k = ut_part_and_diag(delta * dx);
  CHECK(k.unip(0, 1).exact_equal(parse_rational("1/X", Q, 2)));
  CHECK(k.diag[0].exact_equal(parse_rational("X", Q, 2)));
  CHECK(k.diag[1].is_one());
}

TEST_CASE("t_max_coordinate and in_NT examples") {
  auto U = TOrder::partial_u(3);
  auto id = ExactMatrix::identity(3, RationalFunction(Q, 1));
  CHECK(t_max_coordinate(id, U).empty());
  auto d3 = m({{"1", "1", "1"}, {"0", "1", "1"}, {"0", "0", "1"}});
  auto mx = t_max_coordinate(d3, U);
  REQUIRE(mx.size() == 2);
  CHECK(mx[0] == Pair{1, 2});
  CHECK(mx[1] == Pair{2, 3});
  auto e13 = m({{"1", "0", "1"}, {"0", "1", "0"}, {"0", "0", "1"}});
  CHECK(t_max_coordinate(e13, U) == std::vector<Pair>{{1, 3}});
  CHECK(t_max_coordinate(d3, TOrder::row_major(3)) == std::vector<Pair>{{2, 3}});
  CHECK(in_nt(id, Pair{1, 2}, U));
  for (const auto& p : all_pairs(3)) {
    auto e = id;
    e(p.i - 1, p.j - 1) = RationalFunction::constant(Q, 2, 1);
    CHECK_FALSE(in_nt(e, p, U));
  }
}

TEST_CASE("orders: built-ins extend U, bad lists rejected") {
  for (int n : {2, 3, 4, 5}) {
    auto r = TOrder::row_major(n);
    auto c = TOrder::col_major(n);
    for (const auto& a : all_pairs(n))
      for (const auto& b : all_pairs(n))
        if (u_less(a, b)) {
          CHECK(r.greater(b, a));
          CHECK(c.greater(b, a));
        }
  }
  CHECK_THROWS_AS(TOrder::from_ranked(3, {{1, 2}, {1, 3}, {2, 3}}), Error);
  CHECK_THROWS_AS(TOrder::from_ranked(3, {{1, 3}, {1, 2}}), Error);
  CHECK_NOTHROW(TOrder::from_ranked(3, {{1, 3}, {2, 3}, {1, 2}}));
}

TEST_CASE("group spec JSON round trip") {
  auto s = xyz_like();
  auto j = s.to_json();
  auto back = GroupSpec::from_json(j);
  CHECK(back.to_json().dump() == j.dump());
  CHECK(back.generators()[3].name == "delta111");
  Json bad = j;
  bad["generators"]["M_X"][1][0] = "X";
  CHECK_THROWS_AS(GroupSpec::from_json(bad), Error);
}

TEST_CASE("step measure validation and JSON") {
  auto s = xyz_like();
  Json j = Json::parse(R"({"atoms":[{"word":["M_X"],"p":0.25},{"word":["~M_X"],"p":0.25},{"word":[],"p":0.5}]})");
  auto mu = StepMeasure::from_json(j, s);
  CHECK(mu.symmetric(s));
  CHECK(mu.to_json(s).dump() == j.dump());
  Json bad = Json::parse(R"({"atoms":[{"word":["M_X"],"p":0.5}]})");
  CHECK_THROWS_AS(StepMeasure::from_json(bad, s), Error);
  Json skew = Json::parse(R"({"atoms":[{"word":["M_X"],"p":0.75},{"word":["~M_X"],"p":0.25}]})");
  CHECK_FALSE(StepMeasure::from_json(skew, s).symmetric(s));
}

TEST_CASE("property: w * w^-1 is the identity") {
  auto s = xyz_like();
  std::mt19937_64 rng(21);
  for (int it = 0; it < 200; ++it) {
    Word w;
    int len = static_cast<int>(rng() % 21);
    for (int k = 0; k < len; ++k) w.push_back(Letter{static_cast<int>(rng() % 4), static_cast<bool>(rng() % 2)});
    Word ww = w;
    auto inv = inverse_word(w);
    ww.insert(ww.end(), inv.begin(), inv.end());
    REQUIRE(s.eval(ww).is_identity());
  }
}

TEST_CASE("property: N^T closure under product, inverse and conjugation") {
  std::mt19937_64 rng(22);
  int count = 0;
  for (int n : {3, 4}) {
    std::vector<TOrder> orders{TOrder::partial_u(n), TOrder::row_major(n), TOrder::col_major(n)};
    for (int it = 0; it < 250; ++it) {
      const auto& t = orders[static_cast<std::size_t>(it) % orders.size()];
      auto pairs = all_pairs(n);
      Pair p = pairs[rng() % pairs.size()];
      auto a = random_nt(rng, n, p, t);
      auto b = random_nt(rng, n, p, t);
      REQUIRE(in_nt(a * b, p, t));
      REQUIRE(in_nt(a.inverse(), p, t));
      // conjugation by a random invertible upper-triangular matrix
      auto g = random_unipotent(rng, n, 2);
      for (int i = 0; i < n; ++i)
        g(i, i) = RationalFunction(LaurentPoly::monomial(Q, 2, {static_cast<int>(rng() % 3) - 1, 1}, 1 + static_cast<int>(rng() % 3)));
      REQUIRE(in_nt(g * a * g.inverse(), p, t));
      // conjugating I+E_p by a unipotent keeps I+E_p at every coordinate >=_T p
      auto e = ExactMatrix::identity(n, RationalFunction(Q, 2));
      e(p.i - 1, p.j - 1) = RationalFunction::constant(Q, 2, 1);
      auto u = random_unipotent(rng, n, 2);
      auto c = u * e * u.inverse();
      for (const auto& q : all_pairs(n))
        if (t.geq(q, p)) REQUIRE(c(q.i - 1, q.j - 1).exact_equal(e(q.i - 1, q.j - 1)));
      ++count;
    }
  }
  CHECK(count == 500);
}

TEST_CASE("fingerprints agree with exact evaluation") {
  auto s = xyz_like();
  GroupFingerprint fp(s, FingerprintContext(5));
  std::mt19937_64 rng(23);
  for (int it = 0; it < 100; ++it) {
    Word w;
    for (int k = 0; k < 8; ++k) w.push_back(Letter{static_cast<int>(rng() % 4), static_cast<bool>(rng() % 2)});
    auto ex = s.eval(w);
    auto f = fp.eval(w);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        Fp v;
        REQUIRE(fp.fingerprint(ex(i, j), v));
        REQUIRE(v == f(i, j));
      }
  }
}

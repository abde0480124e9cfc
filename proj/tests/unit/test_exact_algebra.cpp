#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <set>

#include "gen.hpp"
#include "utb/error.hpp"
#include "utb/fingerprint.hpp"
#include "utb/parse.hpp"
#include "utb/star_divide.hpp"

using namespace utb;

namespace {
const CoefficientField Q = CoefficientField::rationals();
LaurentPoly lp(const std::string& s, int n = 1, CoefficientField f = Q) { return parse_laurent(s, f, n); }
RationalFunction rf(const std::string& s, int n = 1, CoefficientField f = Q) { return parse_rational(s, f, n); }
}  // namespace

TEST_CASE("laurent products") {
  CHECK(lp("(1+X)*(1-X)") == lp("1-X^2"));
  CHECK(lp("X*X^-1") == lp("1"));
  auto F2 = CoefficientField::prime(2);
  CHECK(lp("(1+X)*(1+X)", 1, F2) == lp("1+X^2", 1, F2));
  CHECK(lp("X^2 - 1").to_string() == "X1^2 - 1");
}

TEST_CASE("mixing fields or arities is a typed error") {
  auto F3 = CoefficientField::prime(3);
  try {
    (void)(lp("X") + lp("X", 1, F3));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FieldMismatch);
  }
  try {
    (void)(lp("X") * lp("X", 2));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ArityMismatch);
  }
}

TEST_CASE("rational function arithmetic") {
  CHECK(rf("(1/(X+1))*(X+1)").is_one());
  CHECK(rf("X/1 + 1/X").exact_equal(rf("(X^2+1)/X")));
  CHECK(rf("2/3").inverse().exact_equal(rf("3/2")));
  CHECK(rf("(X^2-1)/(X-1)").is_laurent());
  try {
    (void)RationalFunction(Q, 1).inverse();
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivisionByZero);
  }
}

TEST_CASE("rf_equal modes") {
  CHECK(rf_equal(rf("(X^2-1)/(X-1)"), rf("X+1"), EqualityMode::Randomized));
  CHECK(rf_equal(rf("(X^2-1)/(X-1)"), rf("X+1"), EqualityMode::Exact));
  CHECK_FALSE(rf_equal(rf("X"), rf("X+1"), EqualityMode::Randomized));
  CHECK_FALSE(rf_equal(rf("X"), rf("X+1"), EqualityMode::Exact));
  auto F2 = CoefficientField::prime(2);
  CHECK(rf_equal(rf("(1+X)^2", 1, F2), rf("1+X^2", 1, F2), EqualityMode::Randomized));
  CHECK_FALSE(rf_equal(rf("(1+X)^2", 1, F2), rf("1+X", 1, F2), EqualityMode::Randomized));
}

TEST_CASE("parser and printer round trip") {
  for (std::string s : {"3/2*X1*X2^-1 - 7", "(X+Y)/(1-Y^2)", "X^-3 + 2*X*Y - 1/5", "0", "-X"}) {
    auto r = rf(s, 2);
    auto back = parse_rational(r.to_string(), Q, 2);
    CHECK(back.exact_equal(r));
    CHECK(back.to_string() == r.to_string());
  }
  auto p = lp("3/2*X1*X2^-1 - 7", 2);
  CHECK(laurent_from_json(to_json(p), Q, 2) == p);
  CHECK_THROWS_AS(parse_rational("X +", Q, 1), Error);
  CHECK_THROWS_AS(parse_rational("W", Q, 1), Error);
  CHECK_THROWS_AS(parse_rational("X4", Q, 3), Error);
  CHECK_THROWS_AS(parse_rational("1/(X-X)", Q, 1), Error);
}

TEST_CASE("star_divide examples") {
  auto d = star_divide(lp("X^2"), lp("X-1"), 0);
  CHECK(d.t == lp("X+1"));
  CHECK(d.w == lp("1"));
  auto v = lp("X^3 - 2*X + 5");
  auto e = star_divide(v, v, 0);
  CHECK(e.t == lp("1"));
  CHECK(e.w.is_zero());
  auto u = lp("X^5*Y + X*Y^2", 2);
  auto v2 = lp("X^2 - Y", 2);
  auto g = star_divide(u, v2, 0);
  CHECK(u - v2 * g.t == g.w);
  for (const auto& t : g.w.terms()) CHECK(t.e[0] == 1);
  CHECK(!g.w.is_zero());
  try {
    (void)star_divide(u, lp("X + X*Y + 1", 2), 0);
    FAIL("expected star-condition error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::StarCondition);
  }
}

TEST_CASE("new_basis examples") {
  auto nb = new_basis({{0, 0}, {1, 1}}, 2);
  CHECK(nb.first_coordinate({0, 0}) == 0);
  CHECK(nb.first_coordinate({1, 1}) == -2);
  auto id = new_basis({{0, 0, 0}}, 3);
  CHECK(id.rows == IntMatrix::Identity(3, 3));
  std::vector<Exponent> cube;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c) cube.push_back({a, b, c});
  auto nc = new_basis(cube, 3);
  std::set<std::int64_t> firsts;
  for (const auto& w : cube) firsts.insert(nc.first_coordinate(w));
  CHECK(firsts.size() == 125);
  CHECK(nc.to_old(nc.to_new({2, -1, 1})) == Exponent({2, -1, 1}));
}

TEST_CASE("property: ring axioms on random triples") {
  std::mt19937_64 rng(11);
  for (auto f : {Q, CoefficientField::prime(3)}) {
    for (int it = 0; it < 1000; ++it) {
      int n = 1 + static_cast<int>(rng() % 3);
      auto a = gen::laurent(rng, f, n, 5, -3, 3);
      auto b = gen::laurent(rng, f, n, 5, -3, 3);
      auto c = gen::laurent(rng, f, n, 5, -3, 3);
      REQUIRE((a * b) * c == a * (b * c));
      REQUIRE(a * (b + c) == a * b + a * c);
      REQUIRE(a + b == b + a);
      REQUIRE(a * b == b * a);
      REQUIRE((a - a).is_zero());
    }
  }
}

TEST_CASE("property: star_divide reconstruction") {
  std::mt19937_64 rng(12);
  int done = 0;
  while (done < 1000) {
    int n = 1 + static_cast<int>(rng() % 3);
    auto f = done % 2 ? Q : CoefficientField::prime(5);
    auto v = gen::nonzero(rng, f, n, 4, -2, 3);
    int axis = star_axis(v);
    if (axis < 0) continue;
    auto u = gen::laurent(rng, f, n, 8, -4, 4);
    auto d = star_divide(u, v, axis);
    REQUIRE(v * d.t + d.w == u);
    for (const auto& t : d.w.terms()) {
      REQUIRE(t.e[axis] >= v.min_exponent(axis));
      REQUIRE(t.e[axis] < std::max(v.max_exponent(axis), v.min_exponent(axis) + 1));
    }
    // exact multiples leave no remainder
    REQUIRE(star_divide(u * v, v, axis).w.is_zero());
    ++done;
  }
}

TEST_CASE("property: new_basis injectivity and unimodularity") {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 1000; ++it) {
    int d = 1 + static_cast<int>(rng() % 4);
    int m = 1 + static_cast<int>(rng() % 50);
    int s = 1 + static_cast<int>(rng() % 6);
    std::set<Exponent> W;
    for (int k = 0; k < m; ++k) {
      Exponent e(static_cast<std::size_t>(d));
      for (auto& v : e) v = static_cast<int>(rng() % (2 * s + 1)) - s;
      W.insert(e);
    }
    std::vector<Exponent> w(W.begin(), W.end());
    auto nb = new_basis(w, d);
    std::set<std::int64_t> firsts;
    for (const auto& x : w) firsts.insert(nb.first_coordinate(x));
    REQUIRE(firsts.size() == w.size());
    REQUIRE(std::abs(nb.rows.cast<double>().determinant()) == doctest::Approx(1.0));
  }
}

TEST_CASE("property: randomized equality agrees with exact") {
  std::mt19937_64 rng(14);
  int disagreements = 0, equal_pairs = 0;
  for (int it = 0; it < 10000; ++it) {
    auto f = it % 3 == 0 ? CoefficientField::prime(2) : Q;
    int n = 1 + static_cast<int>(rng() % 2);
    auto a = gen::nonzero(rng, f, n, 4, 0, 5);
    auto b = gen::nonzero(rng, f, n, 3, 0, 5);
    RationalFunction x(a, b);
    RationalFunction y;
    switch (rng() % 3) {
      case 0: {
        auto c = gen::nonzero(rng, f, n, 3, 0, 5);
        y = RationalFunction(a * c, b * c);  // same value, different representation
        break;
      }
      case 1:
        y = RationalFunction(a + gen::laurent(rng, f, n, 1, 0, 5), b);
        break;
      default:
        y = RationalFunction(gen::nonzero(rng, f, n, 4, 0, 5), b);
    }
    bool ex = rf_equal(x, y, EqualityMode::Exact);
    bool rd = rf_equal(x, y, EqualityMode::Randomized, FingerprintContext(static_cast<std::uint64_t>(it)));
    equal_pairs += ex;
    disagreements += ex != rd;
  }
  CHECK(disagreements == 0);
  CHECK(equal_pairs > 3000);
}

TEST_CASE("GF(p^k) fingerprint ring is a field") {
  for (std::uint64_t p : {2ULL, 3ULL, 7ULL}) {
    const auto& r = FingerprintRing::for_field(CoefficientField::prime(p));
    std::uint64_t s = 99;
    for (int it = 0; it < 200; ++it) {
      auto a = r.random_nonzero(s), b = r.random_nonzero(s), c = r.random_nonzero(s);
      REQUIRE(r.mul(a, r.inv(a)) == 1);
      REQUIRE(r.mul(r.mul(a, b), c) == r.mul(a, r.mul(b, c)));
      REQUIRE(r.mul(a, r.add(b, c)) == r.add(r.mul(a, b), r.mul(a, c)));
    }
    // characteristic p: p * 1 = 0
    std::uint64_t acc = 0;
    for (std::uint64_t k = 0; k < p; ++k) acc = r.add(acc, 1);
    CHECK(acc == 0);
  }
}

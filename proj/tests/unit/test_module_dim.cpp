#include <doctest.h>

#include "utb/catalog.hpp"
#include "utb/error.hpp"
#include "utb/module_dim.hpp"
#include "utb/parse.hpp"

#include <map>

using namespace utb;

namespace {

RationalFunction rf(const std::string& s, const CoefficientField& f, int n) { return parse_rational(s, f, n); }

ModuleSpec module(const CoefficientField& f, int n, std::vector<std::string> phis) {
  ModuleSpec m;
  m.field = f;
  m.nvars = n;
  for (const auto& s : phis) m.action.push_back(rf(s, f, n));
  return m;
}

// plain Gaussian elimination on polynomials, independent of the library engines
std::size_t exact_rank(std::vector<LaurentPoly> v) {
  std::map<Exponent, LaurentPoly> rows;
  for (auto p : v) {
    bool changed = true;
    while (!p.is_zero() && changed) {
      changed = false;
      for (const auto& t : p.terms()) {
        auto it = rows.find(t.e);
        if (it == rows.end()) continue;
        const Coeff c = p.field().div(t.c, it->second.terms().back().c);
        p = p - it->second.scaled(c);
        changed = true;
        break;
      }
    }
    if (!p.is_zero()) rows.emplace(p.terms().back().e, p);
  }
  return rows.size();
}

ModuleSpec block_module(const std::string& name, Pair p = Pair{1, 2}) {
  auto e = build(name);
  return ModuleSpec::from_phis(phi_values(e.spec, p));
}

}  // namespace

TEST_CASE("span_dim examples") {
  const auto Q = CoefficientField::rationals();
  auto m1 = module(Q, 1, {"X"});
  for (int r = 0; r <= 10; ++r) CHECK(span_dim(m1, r) == static_cast<std::size_t>(2 * r + 1));

  auto m2 = module(Q, 2, {"X", "Y"});
  for (int r = 0; r <= 6; ++r) {
    std::size_t count = 0;
    for (int a = -r; a <= r; ++a)
      for (int b = -r; b <= r; ++b) count += std::abs(a) + std::abs(b) <= r;
    CHECK(span_dim(m2, r) == count);
    CHECK(count == static_cast<std::size_t>(2 * r * r + 2 * r + 1));
  }

  const auto F2 = CoefficientField::prime(2);
  auto q = module(F2, 1, {"X"});
  q.relations = {parse_laurent("1+X+X^2", F2, 1)};
  auto ranks = span_ranks(q, 8);
  REQUIRE(ranks.size() == 9);
  CHECK(ranks[0] == 1);
  for (int r = 1; r <= 8; ++r) CHECK(ranks[static_cast<std::size_t>(r)] == 2);
}

TEST_CASE("quotient by 1+X in two variables grows like the Y-line") {
  const auto Q = CoefficientField::rationals();
  auto m = module(Q, 2, {"X", "Y"});
  m.relations = {parse_laurent("1+X", Q, 2)};
  auto ranks = span_ranks(m, 8);
  REQUIRE(ranks.size() == 9);
  for (int r = 0; r <= 8; ++r) CHECK(ranks[static_cast<std::size_t>(r)] == static_cast<std::size_t>(2 * r + 1));
}

TEST_CASE("evaluation engine agrees with exact elimination") {
  for (std::uint64_t p : {0ULL, 2ULL, 3ULL}) {
    const auto f = p ? CoefficientField::prime(p) : CoefficientField::rationals();
    CAPTURE(p);
    // one variable: X^a (X+1)^b, denominators cleared by X^r (X+1)^r
    auto m = module(f, 1, {"X", "X+1"});
    auto ranks = span_ranks(m, 6);
    REQUIRE(ranks.size() == 7);
    const auto x = LaurentPoly::variable(f, 1, 0);
    const auto x1 = x + LaurentPoly::constant(f, 1, 1);
    for (int r = 0; r <= 6; ++r) {
      std::vector<LaurentPoly> elems;
      for (int a = -r; a <= r; ++a)
        for (int b = -r; b <= r; ++b)
          if (std::abs(a) + std::abs(b) <= r) elems.push_back(x.pow(static_cast<unsigned>(a + r)) * x1.pow(static_cast<unsigned>(b + r)));
      CHECK(ranks[static_cast<std::size_t>(r)] == exact_rank(elems));
    }
    // two disjoint copies: the product filtration
    auto m2 = module(f, 2, {"X", "X+1", "Y", "Y+1"});
    auto r2 = span_ranks(m2, 3);
    REQUIRE(r2.size() == 4);
    const auto y = LaurentPoly::variable(f, 2, 1);
    const auto y1 = y + LaurentPoly::constant(f, 2, 1);
    const auto X = LaurentPoly::variable(f, 2, 0);
    const auto X1 = X + LaurentPoly::constant(f, 2, 1);
    for (int r = 0; r <= 3; ++r) {
      std::vector<LaurentPoly> elems;
      for (int a = -r; a <= r; ++a)
        for (int b = -r; b <= r; ++b)
          for (int c = -r; c <= r; ++c)
            for (int d = -r; d <= r; ++d)
              if (std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d) <= r)
                elems.push_back(X.pow(static_cast<unsigned>(a + r)) * X1.pow(static_cast<unsigned>(b + r)) *
                                y.pow(static_cast<unsigned>(c + r)) * y1.pow(static_cast<unsigned>(d + r)));
      CHECK(r2[static_cast<std::size_t>(r)] == exact_rank(elems));
    }
  }
  // a genuinely joint component
  const auto Q = CoefficientField::rationals();
  auto m = module(Q, 2, {"X", "Y", "X+Y"});
  auto ranks = span_ranks(m, 3);
  const auto X = LaurentPoly::variable(Q, 2, 0), Y = LaurentPoly::variable(Q, 2, 1);
  for (int r = 0; r <= 3; ++r) {
    std::vector<LaurentPoly> elems;
    for (int a = -r; a <= r; ++a)
      for (int b = -r; b <= r; ++b)
        for (int c = -r; c <= r; ++c)
          if (std::abs(a) + std::abs(b) + std::abs(c) <= r)
            elems.push_back(X.pow(static_cast<unsigned>(a + 2 * r)) * Y.pow(static_cast<unsigned>(b + 2 * r)) *
                            (X + Y).pow(static_cast<unsigned>(c + r)));
    CHECK(ranks[static_cast<std::size_t>(r)] == exact_rank(elems));
  }
}

TEST_CASE("trdeg examples") {
  const auto Q = CoefficientField::rationals();
  CHECK(trdeg({rf("X", Q, 1), rf("X+1", Q, 1), rf("2", Q, 1)}) == 1);
  CHECK(trdeg({rf("X", Q, 2), rf("Y", Q, 2)}) == 2);
  CHECK(trdeg({rf("X", Q, 1), rf("X^2", Q, 1)}) == 1);
  // inseparable: the Jacobian misses X^p
  const auto F3 = CoefficientField::prime(3);
  CHECK(trdeg({rf("X^3", F3, 1)}) == 0);
  CHECK(trdeg({rf("X1", Q, 3), rf("X2", Q, 3), rf("X3", Q, 3), rf("X1+X2+X3", Q, 3)}) == 3);
}

TEST_CASE("principal_quotient_dim examples") {
  const auto Q = CoefficientField::rationals();
  const auto F2 = CoefficientField::prime(2);
  CHECK(principal_quotient_dim(3, parse_laurent("1+X+Y+Z", Q, 3), true) == 2);
  CHECK(principal_quotient_dim(1, parse_laurent("1+X+X^2", F2, 1), true) == 0);
  CHECK(principal_quotient_dim(2, parse_laurent("1+X", Q, 2), true) == 1);
  try {
    principal_quotient_dim(2, parse_laurent("X*Y^-1", Q, 2));
    FAIL("unit relation accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnitRelation);
  }
}

TEST_CASE("dimension_estimate on catalog blocks") {
  for (int d = 1; d <= 3; ++d)
    for (const std::string p : {"2", "3"}) {
      CAPTURE(d);
      CAPTURE(p);
      auto lr = dimension_estimate(block_module("lamplighter(" + std::to_string(d) + "," + p + ")"));
      CHECK(lr.dimension == d);
      CHECK(lr.provenance == Provenance::FreeModule);
      REQUIRE(lr.fit);
      CHECK(std::abs(lr.fit->exponent - d) <= 0.25);
      CHECK(lr.shortcuts_agree_with_fit());

      auto br = dimension_estimate(block_module("baumslag(" + std::to_string(d) + "," + p + ")"));
      CHECK(br.dimension == d);
      CHECK(br.provenance == Provenance::Trdeg);
      REQUIRE(br.fit);
      CHECK(std::abs(br.fit->exponent - d) <= 0.25);
      CHECK(br.shortcuts_agree_with_fit());
    }
  auto g = dimension_estimate(block_module("g23x"));
  CHECK(g.dimension == 1);
  CHECK(g.trdeg_result == 1);
  auto gx = dimension_estimate(block_module("gx_x1_x2"));
  CHECK(gx.dimension == 1);
  CHECK(gx.provenance == Provenance::Trdeg);
  CHECK(gx.shortcuts_agree_with_fit());

  const auto F2 = CoefficientField::prime(2);
  auto q = module(F2, 3, {"X", "Y", "Z"});
  q.relations = {parse_laurent("1+X+Y+Z", F2, 3)};
  auto qr = dimension_estimate(q);
  CHECK(qr.dimension == 2);
  CHECK(qr.provenance == Provenance::QuotientRule);
  REQUIRE(qr.fit);
  CHECK(std::abs(qr.fit->exponent - 2) <= 0.25);
}

TEST_CASE("growth fit flags ambiguity") {
  std::vector<std::pair<int, std::size_t>> t;
  for (int r : {2, 4, 6, 8, 12}) t.emplace_back(r, static_cast<std::size_t>(std::pow(r, 1.5) * 10));
  auto f = fit_growth(t);
  CHECK(f.ambiguous);
  CHECK(f.candidates == std::vector<int>{1, 2});
}

TEST_CASE("span properties") {
  const auto Q = CoefficientField::rationals();
  // monotone, and a different generating set of the same group agrees after reindexing
  auto a = module(Q, 2, {"X", "Y"});
  auto b = module(Q, 2, {"X*Y", "Y", "X^2*Y"});
  auto ra = span_ranks(a, 12), rb = span_ranks(b, 6);
  for (std::size_t r = 1; r < ra.size(); ++r) CHECK(ra[r] >= ra[r - 1]);
  for (std::size_t r = 1; r < rb.size(); ++r) CHECK(rb[r] >= rb[r - 1]);
  for (int r = 1; r <= 6; ++r) {
    CHECK(rb[static_cast<std::size_t>(r)] <= ra[static_cast<std::size_t>(3 * r)]);
    CHECK(ra[static_cast<std::size_t>(r)] <= rb[static_cast<std::size_t>(r)]);
  }
  // trdeg bounds and dimension <= trdeg in characteristic 0
  for (const auto& phis : std::vector<std::vector<std::string>>{{"X", "X+1"}, {"X", "Y", "X+Y"}, {"X*Y", "X^-1"}}) {
    auto m = module(Q, 2, phis);
    int t = trdeg(m.action);
    CHECK(t <= static_cast<int>(phis.size()));
    auto rep = dimension_estimate(m);
    CHECK(rep.dimension <= t);
  }
  CHECK(trdeg({rf("X", Q, 3), rf("Y", Q, 3), rf("Z", Q, 3), rf("X*Y+Z", Q, 3)}) >= 3);
}

TEST_CASE("is_wreath_block examples") {
  {
    auto e = build("lamplighter(2,2)");
    auto rep = decompose(e.spec, TOrder::partial_u(2));
    auto w = is_wreath_block(rep.pairs[0], ModuleSpec::from_phis(rep.pairs[0].phi));
    CHECK(w.holds);
  }
  {
    auto e = build("g_alpha(2,2)");
    auto rep = decompose(e.spec, TOrder::partial_u(2));
    auto w = is_wreath_block(rep.pairs[0], ModuleSpec::from_phis(rep.pairs[0].phi));
    CHECK_FALSE(w.holds);
    CHECK_FALSE(w.violated.empty());
  }
  {
    auto e = build("xyz");
    auto rep = decompose(e.spec, TOrder::partial_u(3));
    const auto& b = rep.at(Pair{1, 2});
    auto w = is_wreath_block(b, ModuleSpec::from_phis(b.phi));
    CHECK(w.holds);
  }
  {
    const auto Q = CoefficientField::rationals();
    auto m = module(Q, 2, {"X", "X^2", "Y"});
    PairResult fake;
    fake.status = PairStatus::Valid;
    auto w = is_wreath_block(fake, m);
    CHECK_FALSE(w.holds);
    REQUIRE_FALSE(w.violated.empty());
    CHECK(w.violated.front().rfind("a:", 0) == 0);
  }
}

TEST_CASE("module spec json round trip") {
  const auto F2 = CoefficientField::prime(2);
  auto m = module(F2, 3, {"X", "Y", "Z"});
  m.relations = {parse_laurent("1+X+Y+Z", F2, 3)};
  auto back = ModuleSpec::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(span_dim(back, 4) == span_dim(m, 4));
}

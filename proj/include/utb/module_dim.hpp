#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "utb/blocks.hpp"
#include "utb/parse.hpp"
#include "utb/rational_function.hpp"

namespace utb {

// A finitely generated k[A]-module inside k(X_1..X_n): A acts by
// multiplication with the phi-values. With relations the module is instead
// k[X^{+-1}]/(relations) and the phi-values must be monomials.
struct ModuleSpec {
  CoefficientField field;
  int nvars = 0;
  std::vector<RationalFunction> action;
  std::vector<RationalFunction> generators;  // empty means {1}
  std::vector<LaurentPoly> relations;

  static ModuleSpec from_phis(const std::vector<RationalFunction>& phis);
  void validate() const;
  Json to_json() const;
  static ModuleSpec from_json(const Json& j);
};

struct SpanOptions {
  std::size_t rank_budget = 600;  // largest rank the evaluation engine will build
  std::uint64_t seed = 0x13198a2e03707344ULL;
};

// ranks[r] = dim V_r for r = 0..result.size()-1. Stops early (shorter result)
// when the budget would be exceeded.
std::vector<std::size_t> span_ranks(const ModuleSpec& m, int max_radius, const SpanOptions& opt = SpanOptions());
std::size_t span_dim(const ModuleSpec& m, int radius, const SpanOptions& opt = SpanOptions());

// Jacobian rank at random points of the fingerprint field (max over a few).
int trdeg(const std::vector<RationalFunction>& phis, std::uint64_t seed = 0x452821e638d01377ULL);

// k[Z^d]/(relation) has dimension d-1; verify re-derives it from span growth.
int principal_quotient_dim(int d, const LaurentPoly& relation, bool verify = false);

enum class Provenance { SpanFit, Trdeg, QuotientRule, FreeModule };
std::string provenance_name(Provenance p);

struct GrowthFit {
  double exponent = 0;
  double residual = 0;
  bool ambiguous = false;
  std::vector<int> candidates;
};

// log R = c + d log r + e/r over the points with r >= 1
GrowthFit fit_growth(const std::vector<std::pair<int, std::size_t>>& table, double tolerance = 0.25);

struct DimOptions {
  std::vector<int> radii{2, 4, 6, 8, 12};
  double tolerance = 0.25;
  SpanOptions span;
};

struct DimensionReport {
  std::vector<std::pair<int, std::size_t>> span_table;
  std::optional<GrowthFit> fit;
  std::optional<int> trdeg_result;
  std::optional<int> quotient_rule_result;
  std::optional<int> free_module_result;
  bool budget_exhausted = false;
  int dimension = 0;
  Provenance provenance = Provenance::SpanFit;
  bool ambiguous = false;
  std::vector<int> candidates;
  std::vector<std::string> notes;

  // every applicable exact shortcut equals the rounded fit
  bool shortcuts_agree_with_fit() const;
  Json to_json() const;
};

DimensionReport dimension_estimate(const ModuleSpec& m, const DimOptions& opt = DimOptions());

struct WreathCheck {
  bool holds = false;
  std::vector<std::string> violated;  // "a", "b", "c" with a reason each
  int radius = 0;
  int exponent_bound = 0;
  Json to_json() const;
};

// Bounded certificate that a dimension-2 block is Z^2 wr Z (or Z^2 wr Z/p).
WreathCheck is_wreath_block(const PairResult& block, const ModuleSpec& m, int exponent_bound = 3, int radius = 4);

}  // namespace utb

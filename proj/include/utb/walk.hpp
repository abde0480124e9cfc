#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "utb/group.hpp"
#include "utb/module_dim.hpp"

namespace utb {

enum class Stat { Range, GenRange, Drift, Cautious, Return, DeltaRank, Hits };
std::string stat_name(Stat s);
Stat stat_from_name(const std::string& s);

enum class ScaleFn { Sqrt, Linear };
std::string scale_name(ScaleFn f);
ScaleFn scale_from_name(const std::string& s);
double scale_value(ScaleFn f, double t);

// Delta = {a, b} with a^-1 b unipotent. A Delta-step is a step whose
// increment is a or b.
struct DeltaPair {
  Word a;
  Word b;
};

struct WalkConfig {
  GroupSpec spec;
  StepMeasure measure;
  std::int64_t n = 1000;
  std::int64_t walkers = 100;
  std::uint64_t seed = 1;
  std::vector<std::int64_t> checkpoints;  // empty means {n}
  std::vector<Stat> stats;                // empty means every applicable one
  std::vector<double> epsilons{1.0};      // cautiousness
  ScaleFn scale = ScaleFn::Sqrt;
  // hits: gamma_t = round(hit_drift * t) unless gamma is set
  std::vector<double> hit_drift;
  std::function<std::vector<std::int64_t>(std::int64_t)> gamma;
  std::size_t rank_budget = 256;  // evaluation width for non-monomial Delta-rank
  unsigned threads = 0;           // 0: hardware concurrency
  bool keep_per_walker = false;

  void validate() const;
  std::vector<std::int64_t> effective_checkpoints() const;
  Json to_json() const;  // everything that affects results
};

enum class RelationKind { Identity, ConjugateVector, UserPlugin };
std::string relation_name(RelationKind k);

// Equivalence on (element, time). ConjugateVector: the class of X_t is the
// k-line through the block coordinate of X_t u X_t^-1, which only depends on
// the diagonal part of X_t. UserPlugin: class key from (element key,
// abelian coordinates, t).
struct AdmissibleRelation {
  RelationKind kind = RelationKind::Identity;
  std::function<std::uint64_t(std::uint64_t, const std::vector<std::int64_t>&, std::int64_t)> plugin;

  static AdmissibleRelation identity() { return {}; }
  static AdmissibleRelation conjugate_vector() { return {RelationKind::ConjugateVector, {}}; }
  static AdmissibleRelation user(std::function<std::uint64_t(std::uint64_t, const std::vector<std::int64_t>&, std::int64_t)> f) {
    return {RelationKind::UserPlugin, std::move(f)};
  }
};

struct Estimate {
  double mean = 0;
  double se = 0;
  std::int64_t count = 0;
  Json to_json() const;
};

struct WalkerRow {
  std::int64_t t = 0;
  std::int64_t range = 0;
  std::int64_t gen_range = 0;
  std::int64_t delta_rank = 0;
  std::int64_t delta_steps = 0;
};

struct WalkStats {
  std::vector<std::int64_t> checkpoints;
  std::int64_t walkers = 0;
  std::string engine;    // "diagonal-monomial" or "fingerprint"
  std::string relation;
  std::optional<Pair> delta_block;
  std::string delta_engine;  // "monomial" or "evaluation"
  bool delta_rank_truncated = false;

  std::map<std::int64_t, Estimate> range, gen_range, abelian_drift, return_freq, delta_rank, delta_steps, hits;
  std::map<std::pair<std::int64_t, double>, Estimate> cautious_prob;
  std::vector<std::vector<WalkerRow>> per_walker;

  Json to_json() const;
  std::string to_csv() const;
};

// Throws Admissibility when pilot trajectories find (x,i) ~ (y,i), x != y.
void check_admissible(const WalkConfig& cfg, const AdmissibleRelation& rel,
                      const std::optional<DeltaPair>& delta = std::nullopt);

WalkStats simulate(const WalkConfig& cfg, const AdmissibleRelation& rel = AdmissibleRelation::identity(),
                   const std::optional<DeltaPair>& delta = std::nullopt);

// (e, first unipotent generator)
DeltaPair default_delta(const GroupSpec& spec);

// Exact mu^{*t}(e) for t = 0..tmax by propagating the distribution.
class ReturnOracle {
 public:
  ReturnOracle(const GroupSpec& spec, const StepMeasure& mu, std::size_t state_budget = 4000000);
  ~ReturnOracle();
  ReturnOracle(const ReturnOracle&) = delete;
  ReturnOracle& operator=(const ReturnOracle&) = delete;
  double step();  // advance one step, return the mass at e
  std::int64_t time() const;
  std::size_t states() const;

 private:
  struct Impl;
  Impl* impl_;
};

std::vector<double> exact_return_probabilities(const GroupSpec& spec, const StepMeasure& mu, int tmax,
                                               std::size_t state_budget = 4000000);

struct CautiousRow {
  std::int64_t t = 0;
  double epsilon = 0;
  Estimate prob;
  int span_radius = 0;
  std::optional<std::size_t> span;  // span_dim at span_radius when a module is given
  std::optional<double> span_rate;  // log(span) / t
};

struct CautiousTable {
  ScaleFn scale = ScaleFn::Sqrt;
  double delta = 0.5;
  std::vector<CautiousRow> rows;
  Json to_json() const;
};

CautiousTable cautiousness_probe(WalkConfig cfg, ScaleFn f, const std::vector<double>& epsilons,
                                 const std::optional<ModuleSpec>& module = std::nullopt, double delta = 0.5);

struct TransienceRow {
  std::int64_t t = 0;
  Estimate freq;
  std::int64_t returns = 0;
  bool missing = false;  // fewer than min_count returns observed
  double partial_sum = 0;
};

struct TransienceTable {
  std::vector<TransienceRow> rows;
  std::optional<double> exponent;  // fitted decay, freq ~ t^-exponent
  bool consistent = false;         // exponent > 1
  Json to_json() const;
  // |sum_{t<=tmax} freq - sum exact| / sum exact
  double relative_error(const std::vector<double>& exact, std::int64_t tmax) const;
};

// checkpoints default to every t in 1..n
TransienceTable strong_transience_probe(WalkConfig cfg, std::int64_t min_count = 10, std::int64_t fit_from = 8);

struct RecurrentStage {
  int stage = 0;
  double a = 0;
  double b = 0;
  double C = 0;
  std::int64_t N = 0;
  double envelope_sum = 0;  // sum_{t<=N} C / (2 t^{d/2})
  double partial_sum = 0;   // sum_{t<=N} mu_bar^{*t}(e) / 2, exact
  bool nb_ok = false;       // N b <= 1/2
  bool sum_ok = false;      // partial_sum >= stage
  StepMeasure measure;      // normalized a_1 mu_1 + .. + a_n mu_n
  Json to_json(const GroupSpec& spec) const;
};

struct RecurrentOptions {
  double identity_mass = 0.875;  // laziness of each mu_i
  std::int64_t max_N = 20000;
  std::size_t state_budget = 4000000;
};

GroupSpec recurrent_group(int growth_degree);  // Z or Z^2
std::vector<RecurrentStage> recurrent_measure_stages(int growth_degree, int stages,
                                                     const RecurrentOptions& opt = RecurrentOptions());

}  // namespace utb

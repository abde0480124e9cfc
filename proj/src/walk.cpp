#include "utb/walk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "utb/catalog.hpp"
#include "utb/echelon.hpp"
#include "utb/error.hpp"
#include "utb/torder.hpp"

namespace utb {

std::string stat_name(Stat s) {
  switch (s) {
    case Stat::Range: return "range";
    case Stat::GenRange: return "genrange";
    case Stat::Drift: return "drift";
    case Stat::Cautious: return "cautious";
    case Stat::Return: return "return";
    case Stat::DeltaRank: return "deltarank";
    case Stat::Hits: return "hits";
  }
  return "?";
}

Stat stat_from_name(const std::string& s) {
  for (Stat x : {Stat::Range, Stat::GenRange, Stat::Drift, Stat::Cautious, Stat::Return, Stat::DeltaRank, Stat::Hits})
    if (stat_name(x) == s) return x;
  throw Error(ErrorKind::InvalidArgument, "unknown statistic '" + s + "'");
}

std::string scale_name(ScaleFn f) { return f == ScaleFn::Sqrt ? "sqrt" : "linear"; }

ScaleFn scale_from_name(const std::string& s) {
  if (s == "sqrt") return ScaleFn::Sqrt;
  if (s == "linear") return ScaleFn::Linear;
  throw Error(ErrorKind::InvalidArgument, "unknown scale '" + s + "'");
}

double scale_value(ScaleFn f, double t) { return f == ScaleFn::Sqrt ? std::sqrt(t) : t; }

std::string relation_name(RelationKind k) {
  switch (k) {
    case RelationKind::Identity: return "identity";
    case RelationKind::ConjugateVector: return "conjugate-vector";
    case RelationKind::UserPlugin: return "user";
  }
  return "?";
}

void WalkConfig::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "horizon n must be positive");
  if (walkers < 1) throw Error(ErrorKind::InvalidArgument, "need at least one walker");
  for (auto c : checkpoints)
    if (c < 1 || c > n) throw Error(ErrorKind::InvalidArgument, "checkpoint " + std::to_string(c) + " outside 1..n");
  for (double e : epsilons)
    if (!(e > 0)) throw Error(ErrorKind::InvalidArgument, "epsilons must be positive");
  if (rank_budget < 32) throw Error(ErrorKind::InvalidArgument, "rank budget below 32");
  measure.validate(spec);
}

std::vector<std::int64_t> WalkConfig::effective_checkpoints() const {
  std::vector<std::int64_t> c = checkpoints.empty() ? std::vector<std::int64_t>{n} : checkpoints;
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

Json WalkConfig::to_json() const {
  Json st = Json::array();
  for (Stat s : stats) st.push_back(stat_name(s));
  return Json{{"spec", spec.to_json()},
              {"measure", measure.to_json(spec)},
              {"n", n},
              {"walkers", walkers},
              {"seed", seed},
              {"checkpoints", effective_checkpoints()},
              {"stats", st},
              {"epsilons", epsilons},
              {"scale", scale_name(scale)},
              {"hit_drift", hit_drift},
              {"custom_gamma", static_cast<bool>(gamma)},
              {"rank_budget", rank_budget}};
}

Json Estimate::to_json() const { return Json{{"mean", mean}, {"se", se}, {"count", count}}; }

DeltaPair default_delta(const GroupSpec& spec) {
  const auto& g = spec.generators();
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g[k].matrix.is_unipotent() && !(g[k].matrix == spec.identity()))
      return DeltaPair{Word{}, Word{Letter{static_cast<int>(k), false}}};
  throw Error(ErrorKind::InvalidArgument, "no unipotent generator to serve as delta");
}

namespace {

constexpr std::uint64_t kSignShift = 56;

std::uint64_t hash_ints(const std::vector<int>& v, std::uint64_t h) {
  for (int x : v) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(x))) + 0x9e3779b97f4a7c15ULL;
  return h;
}

// diagonal with entries +-X^e
bool diag_monomial(const ExactMatrix& m, std::vector<int>& exps, unsigned& signs) {
  if (!m.is_diagonal()) return false;
  exps.clear();
  signs = 0;
  for (int i = 0; i < m.size(); ++i) {
    const RationalFunction& d = m(i, i);
    if (!d.is_monomial()) return false;
    const Term& t = d.num().leading();
    if (t.c == -1 && !d.field().is_prime()) signs |= 1u << i;
    else if (t.c != 1 && !(d.field().characteristic() == 2 && t.c == -1))
      return false;
    exps.insert(exps.end(), t.e.begin(), t.e.end());
  }
  return true;
}

struct AtomInfo {
  double p = 0;
  Word word;
  bool identity = false;
  std::vector<int> exps;  // diagonal-monomial engine
  unsigned signs = 0;
  FpMatrix fp;
  std::vector<std::int64_t> ab;  // abelian coordinates
  int delta_role = 0;            // 1: a, 2: b
  std::vector<int> rexp;         // ratio at the block, monomial case
  Fp r3;
  std::vector<std::uint64_t> rk;
};

class Alias {
 public:
  explicit Alias(const std::vector<double>& w) : prob_(w.size()), alias_(w.size()) {
    const std::size_t n = w.size();
    double total = 0;
    for (double x : w) total += x;
    std::vector<double> s(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = w[i] * static_cast<double>(n) / total;
      (s[i] < 1 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t l = small.back(), g = large.back();
      small.pop_back();
      prob_[l] = s[l];
      alias_[l] = g;
      s[g] -= 1 - s[l];
      if (s[g] < 1) {
        large.pop_back();
        small.push_back(g);
      }
    }
    for (auto i : large) prob_[i] = 1, alias_[i] = i;
    for (auto i : small) prob_[i] = 1, alias_[i] = i;
  }
  std::size_t sample(std::mt19937_64& rng) const {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * static_cast<double>(prob_.size());
    const auto col = std::min(static_cast<std::size_t>(u), prob_.size() - 1);
    return u - static_cast<double>(col) < prob_[col] ? col : alias_[col];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

struct Model {
  const WalkConfig* cfg = nullptr;
  int size = 0, nvars = 0;
  bool fast = false;
  std::vector<AtomInfo> atoms;
  std::unique_ptr<Alias> alias;
  std::unique_ptr<GroupFingerprint> gf;
  FpMatrix identity;
  std::vector<int> ab_gens;  // generator index -> abelian coordinate or -1
  int m = 0;

  bool want[7] = {};
  bool want_ratio = false;
  std::optional<Pair> block;
  bool ratio_monomial = true;
  std::vector<int> a_rexp;  // ratio of the Delta atom a
  std::vector<std::uint64_t> a_rk;
  std::vector<std::vector<std::uint64_t>> kpts;
  const FingerprintRing* ring = nullptr;
  RelationKind rel = RelationKind::Identity;
  const AdmissibleRelation* relation = nullptr;
  bool delta = false;
  std::vector<std::vector<std::int64_t>> gamma;  // index t

  bool has(Stat s) const { return want[static_cast<int>(s)]; }
};

Model build_model(const WalkConfig& cfg, const AdmissibleRelation& rel, const std::optional<DeltaPair>& dp,
                  std::int64_t horizon) {
  Model M;
  M.cfg = &cfg;
  M.size = cfg.spec.size();
  M.nvars = cfg.spec.nvars();
  M.rel = rel.kind;
  M.relation = &rel;
  if (rel.kind == RelationKind::UserPlugin && !rel.plugin)
    throw Error(ErrorKind::InvalidArgument, "user relation without a plugin");

  std::vector<Stat> stats = cfg.stats;
  if (stats.empty()) {
    stats = {Stat::Range, Stat::GenRange, Stat::Drift, Stat::Cautious, Stat::Return, Stat::Hits};
    if (dp) stats.push_back(Stat::DeltaRank);
  }
  for (Stat s : stats) M.want[static_cast<int>(s)] = true;

  std::optional<DeltaPair> d = dp;
  if (!d && (M.has(Stat::DeltaRank) || (M.has(Stat::GenRange) && rel.kind == RelationKind::ConjugateVector)))
    d = default_delta(cfg.spec);
  M.delta = M.has(Stat::DeltaRank);

  const auto& gens = cfg.spec.generators();
  for (const auto& g : gens) M.ab_gens.push_back(g.matrix.is_unipotent() ? -1 : M.m++);

  M.gf = std::make_unique<GroupFingerprint>(cfg.spec, FingerprintContext(derive_seed(cfg.seed, "walk-fingerprint")));
  M.ring = &M.gf->ring();
  M.identity = M.gf->identity();

  ExactMatrix ea, eb;
  if (d) {
    ea = cfg.spec.eval(d->a);
    eb = cfg.spec.eval(d->b);
    const ExactMatrix u = ea.inverse() * eb;
    if (!u.is_unipotent() || u == cfg.spec.identity())
      throw Error(ErrorKind::InvalidArgument, "delta atoms must differ by a non-trivial unipotent");
    M.block = t_max_coordinate(u, TOrder::row_major(M.size)).front();
    M.want_ratio = true;
  }
  auto ratio = [&](const ExactMatrix& em) {
    return at(em, Pair{M.block->i, M.block->i}) / at(em, Pair{M.block->j, M.block->j});
  };
  if (d) {
    const RationalFunction ra = ratio(ea);
    if (ra.is_monomial()) M.a_rexp = ra.num().leading().e;
    else M.ratio_monomial = false;
  }

  M.fast = true;
  std::vector<double> w;
  for (const auto& a : cfg.measure.atoms) {
    AtomInfo ai;
    ai.p = a.p;
    ai.word = a.word;
    ai.ab.assign(static_cast<std::size_t>(M.m), 0);
    for (const auto& l : a.word)
      if (M.ab_gens[static_cast<std::size_t>(l.gen)] >= 0) ai.ab[static_cast<std::size_t>(M.ab_gens[static_cast<std::size_t>(l.gen)])] += l.inv ? -1 : 1;
    const ExactMatrix em = cfg.spec.eval(a.word);
    ai.identity = em == cfg.spec.identity();
    if (!diag_monomial(em, ai.exps, ai.signs)) M.fast = false;
    ai.fp = M.gf->eval(a.word);
    if (d) {
      if (em == ea) ai.delta_role = 1;
      else if (em == eb) ai.delta_role = 2;
      const RationalFunction r = ratio(em);
      if (r.is_monomial()) ai.rexp = r.num().leading().e;
      else M.ratio_monomial = false;
      fingerprint_at(r, *M.ring, M.gf->points(), ai.r3);
    }
    M.atoms.push_back(std::move(ai));
    w.push_back(a.p);
  }
  M.alias = std::make_unique<Alias>(w);

  if (d && !M.ratio_monomial) {
    // evaluation points where every atom ratio is finite and nonzero
    std::vector<RationalFunction> ratios;
    for (const auto& a : cfg.measure.atoms) ratios.push_back(ratio(cfg.spec.eval(a.word)));
    ratios.push_back(ratio(ea));
    FingerprintContext ctx(derive_seed(cfg.seed, "walk-delta-points"));
    std::size_t idx = 0;
    while (M.kpts.size() < cfg.rank_budget) {
      if (idx > 4 * cfg.rank_budget + 64) throw Error(ErrorKind::AllPoles, "delta rank: too many poles");
      auto pt = ctx.point(idx++, M.nvars, *M.ring);
      bool ok = true;
      std::vector<std::uint64_t> vals;
      for (const auto& r : ratios) {
        std::uint64_t v;
        if (!M.ring->eval(r, pt, v) || v == 0) {
          ok = false;
          break;
        }
        vals.push_back(v);
      }
      if (!ok) continue;
      for (std::size_t k = 0; k + 1 < vals.size(); ++k) M.atoms[k].rk.push_back(vals[k]);
      M.a_rk.push_back(vals.back());
      M.kpts.push_back(std::move(pt));
    }
  }

  if (M.has(Stat::Hits)) {
    M.gamma.resize(static_cast<std::size_t>(horizon + 1));
    for (std::int64_t t = 0; t <= horizon; ++t) {
      if (cfg.gamma) {
        M.gamma[static_cast<std::size_t>(t)] = cfg.gamma(t);
        if (static_cast<int>(M.gamma[static_cast<std::size_t>(t)].size()) != M.m)
          throw Error(ErrorKind::ArityMismatch, "gamma must return one coordinate per abelian generator");
      } else {
        std::vector<std::int64_t> g(static_cast<std::size_t>(M.m), 0);
        for (int k = 0; k < M.m && k < static_cast<int>(cfg.hit_drift.size()); ++k)
          g[static_cast<std::size_t>(k)] = std::llround(cfg.hit_drift[static_cast<std::size_t>(k)] * static_cast<double>(t));
        M.gamma[static_cast<std::size_t>(t)] = std::move(g);
      }
    }
  }
  return M;
}

struct WalkerState {
  std::vector<int> exps;
  unsigned signs = 0;
  FpMatrix x;
  std::vector<std::int64_t> y;
  std::vector<int> rexp;
  Fp r3;
  std::vector<std::uint64_t> rk;

  WalkerState(const Model& M) {
    if (M.fast) {
      exps.assign(static_cast<std::size_t>(M.size * M.nvars), 0);
    } else {
      x = M.identity;
    }
    y.assign(static_cast<std::size_t>(M.m), 0);
    if (M.want_ratio) {
      rexp.assign(static_cast<std::size_t>(M.nvars), 0);
      r3 = Fp::constant(M.ring, 1);
      if (!M.ratio_monomial) rk.assign(M.kpts.size(), 1);
    }
  }

  void apply(const Model& M, const AtomInfo& a) {
    if (a.identity) return;
    if (M.fast) {
      for (std::size_t k = 0; k < exps.size(); ++k) exps[k] += a.exps[k];
      signs ^= a.signs;
    } else {
      x = x * a.fp;
    }
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += a.ab[k];
    if (M.want_ratio) {
      if (M.ratio_monomial) {
        for (std::size_t k = 0; k < rexp.size(); ++k) rexp[k] += a.rexp[k];
      } else {
        for (std::size_t k = 0; k < rk.size(); ++k) rk[k] = M.ring->mul(rk[k], a.rk[k]);
      }
      r3 = r3 * a.r3;
    }
  }

  std::uint64_t key() const {
    if (!x.size()) return hash_ints(exps, 0x243f6a8885a308d3ULL ^ (static_cast<std::uint64_t>(signs) << kSignShift));
    return hash_matrix(x);
  }

  std::uint64_t diag_key() const {
    if (!x.size()) return key();
    std::uint64_t h = 0x13198a2e03707344ULL;
    for (int i = 0; i < x.size(); ++i)
      for (auto c : x(i, i).v) h = mix64(h ^ c) + 0x9e3779b97f4a7c15ULL;
    return h;
  }

  bool is_identity(const Model& M) const {
    if (!x.size()) {
      if (signs) return false;
      for (int e : exps)
        if (e) return false;
      return true;
    }
    return x == M.identity;
  }

  // the k-line through the block coordinate of X u X^-1
  std::uint64_t line_key(const Model& M) const {
    if (M.ratio_monomial) return hash_ints(rexp, 0xa4093822299f31d0ULL);
    const std::uint64_t inv0 = M.ring->inv(r3.v[0]);
    std::uint64_t h = 0x082efa98ec4e6c89ULL;
    for (int k = 1; k < kFingerprintPoints; ++k) h = mix64(h ^ M.ring->mul(r3.v[static_cast<std::size_t>(k)], inv0));
    return h;
  }
};

struct Acc {
  double s = 0, s2 = 0;
  void add(double x) {
    s += x;
    s2 += x * x;
  }
};

Estimate finish(const Acc& a, std::int64_t n) {
  Estimate e;
  e.count = n;
  const double N = static_cast<double>(n);
  e.mean = a.s / N;
  if (n > 1) {
    const double var = std::max(0.0, (a.s2 - a.s * a.s / N) / (N - 1));
    e.se = std::sqrt(var / N);
  }
  return e;
}

constexpr int kCells = 7;  // range, genrange, drift, return, deltarank, deltasteps, hits
constexpr std::int64_t kChunk = 64;

struct ChunkOut {
  std::vector<Acc> cells;     // checkpoint * kCells
  std::vector<Acc> cautious;  // checkpoint * eps
  bool truncated = false;
  std::vector<std::vector<WalkerRow>> rows;
};

void run_walker(const Model& M, std::int64_t walker, const std::vector<std::int64_t>& cps, ChunkOut& out) {
  const WalkConfig& cfg = *M.cfg;
  std::mt19937_64 rng(mix64(cfg.seed ^ mix64(0x5157a11e0000ULL + static_cast<std::uint64_t>(walker))));
  WalkerState st(M);
  std::unordered_set<std::uint64_t> visited, classes, dmono;
  const bool track_range = M.has(Stat::Range) || (M.has(Stat::GenRange) && M.rel == RelationKind::Identity);
  const bool track_classes = M.has(Stat::GenRange) && M.rel != RelationKind::Identity;
  if (track_range) visited.reserve(static_cast<std::size_t>(cps.back()) + 1);
  std::optional<DenseEchelon> ech;
  if (M.delta && !M.ratio_monomial) ech.emplace(*M.ring, M.kpts.size());
  std::int64_t drank = 0, dsteps = 0, hits = 0;
  double maxnorm = 0;
  std::size_t ci = 0;
  std::vector<WalkerRow> rows;
  const std::size_t E = cfg.epsilons.size();
  for (std::int64_t t = 1; ci < cps.size(); ++t) {
    const AtomInfo& a = M.atoms[M.alias->sample(rng)];
    if (M.delta && a.delta_role) {
      ++dsteps;
      // conjugate of u by X_{t-1} a, read at the block: ratio(X_{t-1}) ratio(a)
      if (M.ratio_monomial) {
        std::vector<int> e = st.rexp;
        for (std::size_t k = 0; k < e.size(); ++k) e[k] += M.a_rexp[k];
        if (dmono.insert(hash_ints(e, 0xa4093822299f31d0ULL)).second) ++drank;
      } else if (ech->rank() + 16 >= ech->width()) {
        out.truncated = true;
      } else {
        std::vector<std::uint64_t> v = st.rk;
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = M.ring->mul(v[k], M.a_rk[k]);
        if (ech->insert(std::move(v))) ++drank;
      }
    }
    st.apply(M, a);
    if (track_range) visited.insert(st.key());
    if (track_classes) {
      if (M.rel == RelationKind::ConjugateVector) classes.insert(st.line_key(M));
      else classes.insert(M.relation->plugin(st.key(), st.y, t));
    }
    if (M.has(Stat::Cautious)) {
      double s = 0;
      for (auto v : st.y) s += static_cast<double>(v) * static_cast<double>(v);
      maxnorm = std::max(maxnorm, std::sqrt(s));
    }
    if (M.has(Stat::Hits) && st.y == M.gamma[static_cast<std::size_t>(t)]) ++hits;
    if (t != cps[ci]) continue;

    Acc* c = &out.cells[ci * kCells];
    const auto range = static_cast<std::int64_t>(visited.size());
    const std::int64_t gen = track_classes ? static_cast<std::int64_t>(classes.size()) : range;
    if (M.has(Stat::Range)) c[0].add(static_cast<double>(range));
    if (M.has(Stat::GenRange)) c[1].add(static_cast<double>(gen));
    if (M.has(Stat::Drift)) {
      double s = 0;
      for (auto v : st.y) s += static_cast<double>(v) * static_cast<double>(v);
      c[2].add(std::sqrt(s));
    }
    if (M.has(Stat::Return)) c[3].add(st.is_identity(M) ? 1.0 : 0.0);
    if (M.delta) {
      c[4].add(static_cast<double>(drank));
      c[5].add(static_cast<double>(dsteps));
    }
    if (M.has(Stat::Hits)) c[6].add(static_cast<double>(hits));
    if (M.has(Stat::Cautious)) {
      const double f = scale_value(cfg.scale, static_cast<double>(t));
      for (std::size_t e = 0; e < E; ++e) out.cautious[ci * E + e].add(maxnorm < cfg.epsilons[e] * f ? 1.0 : 0.0);
    }
    if (cfg.keep_per_walker) rows.push_back(WalkerRow{t, range, gen, drank, dsteps});
    ++ci;
  }
  if (cfg.keep_per_walker) out.rows.push_back(std::move(rows));
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

template <class F>
void parallel_for(std::size_t jobs, unsigned threads, F&& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next++;
      if (j >= jobs) return;
      try {
        body(j);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        next = jobs;
        return;
      }
    }
  };
  const unsigned w = worker_count(threads, jobs);
  if (w <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace

void check_admissible(const WalkConfig& cfg, const AdmissibleRelation& rel, const std::optional<DeltaPair>& delta) {
  if (rel.kind == RelationKind::Identity) return;
  WalkConfig pilot = cfg;
  pilot.n = std::min<std::int64_t>(cfg.n, 512);
  pilot.walkers = std::min<std::int64_t>(cfg.walkers, 32);
  pilot.seed = derive_seed(cfg.seed, "admissibility");
  pilot.stats = {Stat::GenRange};
  const Model M = build_model(pilot, rel, delta, pilot.n);
  std::unordered_map<std::uint64_t, std::uint64_t> line_owner;             // class -> diagonal part
  std::map<std::pair<std::int64_t, std::uint64_t>, std::uint64_t> owner;  // (t, class) -> element
  for (std::int64_t w = 0; w < pilot.walkers; ++w) {
    std::mt19937_64 rng(mix64(pilot.seed ^ mix64(static_cast<std::uint64_t>(w))));
    WalkerState st(M);
    for (std::int64_t t = 1; t <= pilot.n; ++t) {
      st.apply(M, M.atoms[M.alias->sample(rng)]);
      if (rel.kind == RelationKind::ConjugateVector) {
        const auto [it, fresh] = line_owner.emplace(st.line_key(M), st.diag_key());
        if (!fresh && it->second != st.diag_key())
          throw Error(ErrorKind::Admissibility,
                      "conjugate-vector relation: two distinct diagonal parts give the same line (t=" +
                          std::to_string(t) + ")");
      } else {
        const std::uint64_t k = st.key();
        const auto [it, fresh] = owner.emplace(std::make_pair(t, rel.plugin(k, st.y, t)), k);
        if (!fresh && it->second != k)
          throw Error(ErrorKind::Admissibility, "user relation identifies distinct elements at t=" + std::to_string(t));
      }
    }
  }
}

WalkStats simulate(const WalkConfig& cfg, const AdmissibleRelation& rel, const std::optional<DeltaPair>& delta) {
  cfg.validate();
  const auto cps = cfg.effective_checkpoints();
  const Model M = build_model(cfg, rel, delta, cps.back());
  if (M.has(Stat::GenRange)) check_admissible(cfg, rel, delta);

  const std::size_t chunks = static_cast<std::size_t>((cfg.walkers + kChunk - 1) / kChunk);
  std::vector<ChunkOut> outs(chunks);
  const std::size_t E = cfg.epsilons.size();
  parallel_for(chunks, cfg.threads, [&](std::size_t c) {
    ChunkOut& o = outs[c];
    o.cells.assign(cps.size() * kCells, Acc{});
    o.cautious.assign(cps.size() * E, Acc{});
    const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t hi = std::min(cfg.walkers, lo + kChunk);
    for (std::int64_t w = lo; w < hi; ++w) run_walker(M, w, cps, o);
  });

  // chunk order, so the sums do not depend on the thread count
  std::vector<Acc> cells(cps.size() * kCells), caut(cps.size() * E);
  WalkStats s;
  for (auto& o : outs) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      cells[k].s += o.cells[k].s;
      cells[k].s2 += o.cells[k].s2;
    }
    for (std::size_t k = 0; k < caut.size(); ++k) {
      caut[k].s += o.cautious[k].s;
      caut[k].s2 += o.cautious[k].s2;
    }
    s.delta_rank_truncated = s.delta_rank_truncated || o.truncated;
    for (auto& r : o.rows) s.per_walker.push_back(std::move(r));
  }
  s.checkpoints = cps;
  s.walkers = cfg.walkers;
  s.engine = M.fast ? "diagonal-monomial" : "fingerprint";
  s.relation = relation_name(rel.kind);
  if (M.delta) {
    s.delta_block = M.block;
    s.delta_engine = M.ratio_monomial ? "monomial" : "evaluation";
  }
  for (std::size_t ci = 0; ci < cps.size(); ++ci) {
    const std::int64_t t = cps[ci];
    const Acc* c = &cells[ci * kCells];
    if (M.has(Stat::Range)) s.range[t] = finish(c[0], cfg.walkers);
    if (M.has(Stat::GenRange)) s.gen_range[t] = finish(c[1], cfg.walkers);
    if (M.has(Stat::Drift)) s.abelian_drift[t] = finish(c[2], cfg.walkers);
    if (M.has(Stat::Return)) s.return_freq[t] = finish(c[3], cfg.walkers);
    if (M.delta) {
      s.delta_rank[t] = finish(c[4], cfg.walkers);
      s.delta_steps[t] = finish(c[5], cfg.walkers);
    }
    if (M.has(Stat::Hits)) s.hits[t] = finish(c[6], cfg.walkers);
    if (M.has(Stat::Cautious))
      for (std::size_t e = 0; e < E; ++e) s.cautious_prob[{t, cfg.epsilons[e]}] = finish(caut[ci * E + e], cfg.walkers);
  }
  return s;
}

Json WalkStats::to_json() const {
  auto table = [](const std::map<std::int64_t, Estimate>& m) {
    Json j = Json::object();
    for (const auto& [t, e] : m) j[std::to_string(t)] = e.to_json();
    return j;
  };
  Json j{{"checkpoints", checkpoints}, {"walkers", walkers}, {"engine", engine}, {"relation", relation}};
  if (!range.empty()) j["range"] = table(range);
  if (!gen_range.empty()) j["gen_range"] = table(gen_range);
  if (!abelian_drift.empty()) j["abelian_drift"] = table(abelian_drift);
  if (!return_freq.empty()) j["return_freq"] = table(return_freq);
  if (!hits.empty()) j["hits"] = table(hits);
  if (!delta_rank.empty()) {
    j["delta_rank"] = table(delta_rank);
    j["delta_steps"] = table(delta_steps);
    j["delta_block"] = delta_block->str();
    j["delta_engine"] = delta_engine;
    j["delta_rank_truncated"] = delta_rank_truncated;
  }
  if (!cautious_prob.empty()) {
    Json c = Json::array();
    for (const auto& [k, e] : cautious_prob) {
      Json r = e.to_json();
      r["t"] = k.first;
      r["epsilon"] = k.second;
      c.push_back(r);
    }
    j["cautious_prob"] = c;
  }
  return j;
}

std::string WalkStats::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "stat,t,epsilon,mean,se\n";
  auto dump = [&](const char* name, const std::map<std::int64_t, Estimate>& m) {
    for (const auto& [t, e] : m) os << name << ',' << t << ",," << e.mean << ',' << e.se << '\n';
  };
  dump("range", range);
  dump("genrange", gen_range);
  dump("drift", abelian_drift);
  dump("return", return_freq);
  dump("deltarank", delta_rank);
  dump("deltasteps", delta_steps);
  dump("hits", hits);
  for (const auto& [k, e] : cautious_prob)
    os << "cautious," << k.first << ',' << k.second << ',' << e.mean << ',' << e.se << '\n';
  return os.str();
}

// ---- exact return probabilities

struct ReturnOracle::Impl {
  const FingerprintRing* ring = nullptr;
  std::size_t budget = 0;
  std::int64_t t = 0;
  bool packed = false;
  // packed engine: coordinates in 16-bit fields, diagonal signs above bit 56
  std::vector<std::pair<std::uint64_t, unsigned>> pdisp;  // displacement + offsets, sign mask
  std::vector<double> prob;
  std::uint64_t offsets = 0, origin = 0;
  std::unordered_map<std::uint64_t, double> pd;
  // fingerprint engine
  std::unique_ptr<GroupFingerprint> gf;
  std::vector<FpMatrix> mats;
  FpMatrix id;
  std::unordered_map<std::uint64_t, std::pair<FpMatrix, double>> fd;
  std::size_t max_field_steps = 0;
};

ReturnOracle::ReturnOracle(const GroupSpec& spec, const StepMeasure& mu, std::size_t state_budget) : impl_(new Impl) {
  mu.validate(spec);
  Impl& I = *impl_;
  I.budget = state_budget;
  std::vector<std::vector<int>> ex;
  std::vector<unsigned> sg;
  bool fast = true;
  for (const auto& a : mu.atoms) {
    std::vector<int> e;
    unsigned s = 0;
    if (!diag_monomial(spec.eval(a.word), e, s)) {
      fast = false;
      break;
    }
    ex.push_back(std::move(e));
    sg.push_back(s);
    I.prob.push_back(a.p);
  }
  if (fast) {
    std::vector<std::size_t> coords;
    int maxstep = 1;
    const std::size_t width = ex.empty() ? 0 : ex[0].size();
    for (std::size_t k = 0; k < width; ++k)
      for (const auto& e : ex)
        if (e[k]) {
          coords.push_back(k);
          break;
        }
    for (const auto& e : ex)
      for (int v : e) maxstep = std::max(maxstep, std::abs(v));
    if (coords.size() <= 3 && spec.size() <= 8) {
      I.packed = true;
      for (std::size_t c = 0; c < coords.size(); ++c) I.offsets |= std::uint64_t{1} << 15 << (16 * c);
      I.origin = I.offsets;
      for (std::size_t a = 0; a < ex.size(); ++a) {
        std::uint64_t d = 0;
        for (std::size_t c = 0; c < coords.size(); ++c)
          d |= static_cast<std::uint64_t>(ex[a][coords[c]] + (1 << 15)) << (16 * c);
        I.pdisp.emplace_back(d, sg[a]);
      }
      I.max_field_steps = static_cast<std::size_t>(((1 << 15) - 1) / maxstep);
      I.pd[I.origin] = 1.0;
      return;
    }
  }
  I.prob.clear();
  I.gf = std::make_unique<GroupFingerprint>(spec, FingerprintContext(0x5eed0f0cacc1eULL));
  I.id = I.gf->identity();
  for (const auto& a : mu.atoms) {
    I.mats.push_back(I.gf->eval(a.word));
    I.prob.push_back(a.p);
  }
  I.fd[hash_matrix(I.id)] = {I.id, 1.0};
}

ReturnOracle::~ReturnOracle() { delete impl_; }

std::int64_t ReturnOracle::time() const { return impl_->t; }
std::size_t ReturnOracle::states() const { return impl_->packed ? impl_->pd.size() : impl_->fd.size(); }

double ReturnOracle::step() {
  Impl& I = *impl_;
  ++I.t;
  if (I.packed) {
    if (static_cast<std::size_t>(I.t) > I.max_field_steps) throw Error(ErrorKind::Budget, "oracle: coordinate range exceeded");
    std::unordered_map<std::uint64_t, double> next;
    next.reserve(I.pd.size() * 2);
    for (const auto& [k, p] : I.pd)
      for (std::size_t a = 0; a < I.pdisp.size(); ++a) {
        const std::uint64_t body = (k & ((std::uint64_t{1} << kSignShift) - 1)) + I.pdisp[a].first - I.offsets;
        const std::uint64_t sign = (k >> kSignShift) ^ I.pdisp[a].second;
        next[body | sign << kSignShift] += p * I.prob[a];
      }
    if (next.size() > I.budget) throw Error(ErrorKind::Budget, "oracle: state budget exceeded at t=" + std::to_string(I.t));
    I.pd.swap(next);
    auto it = I.pd.find(I.origin);
    return it == I.pd.end() ? 0.0 : it->second;
  }
  std::unordered_map<std::uint64_t, std::pair<FpMatrix, double>> next;
  next.reserve(I.fd.size() * 2);
  for (const auto& [k, v] : I.fd)
    for (std::size_t a = 0; a < I.mats.size(); ++a) {
      FpMatrix m = v.first * I.mats[a];
      const std::uint64_t h = hash_matrix(m);
      auto it = next.find(h);
      if (it == next.end()) next.emplace(h, std::make_pair(std::move(m), v.second * I.prob[a]));
      else it->second.second += v.second * I.prob[a];
    }
  if (next.size() > I.budget) throw Error(ErrorKind::Budget, "oracle: state budget exceeded at t=" + std::to_string(I.t));
  I.fd.swap(next);
  auto it = I.fd.find(hash_matrix(I.id));
  return it == I.fd.end() ? 0.0 : it->second.second;
}

std::vector<double> exact_return_probabilities(const GroupSpec& spec, const StepMeasure& mu, int tmax,
                                               std::size_t state_budget) {
  ReturnOracle o(spec, mu, state_budget);
  std::vector<double> p{1.0};
  for (int t = 1; t <= tmax; ++t) p.push_back(o.step());
  return p;
}

// ---- probes

Json CautiousTable::to_json() const {
  Json rs = Json::array();
  for (const auto& r : rows) {
    Json j{{"t", r.t}, {"epsilon", r.epsilon}, {"prob", r.prob.to_json()}, {"span_radius", r.span_radius}};
    if (r.span) j["span"] = *r.span;
    if (r.span_rate) j["span_rate"] = *r.span_rate;
    rs.push_back(j);
  }
  return Json{{"scale", scale_name(scale)}, {"delta", delta}, {"rows", rs}};
}

CautiousTable cautiousness_probe(WalkConfig cfg, ScaleFn f, const std::vector<double>& epsilons,
                                 const std::optional<ModuleSpec>& module, double delta) {
  cfg.scale = f;
  cfg.epsilons = epsilons;
  cfg.stats = {Stat::Cautious};
  const WalkStats s = simulate(cfg);
  CautiousTable tab;
  tab.scale = f;
  tab.delta = delta;
  std::map<int, std::optional<std::size_t>> spans;
  for (std::int64_t t : s.checkpoints) {
    const int radius = static_cast<int>(std::floor(delta * scale_value(f, static_cast<double>(t))));
    if (module && !spans.count(radius)) {
      try {
        spans[radius] = span_dim(*module, radius);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Budget) throw;
        spans[radius] = std::nullopt;  // beyond the rank budget: reported missing
      }
    }
    for (double eps : epsilons) {
      CautiousRow r;
      r.t = t;
      r.epsilon = eps;
      r.prob = s.cautious_prob.at({t, eps});
      r.span_radius = radius;
      if (module && spans[radius]) {
        r.span = *spans[radius];
        r.span_rate = std::log(static_cast<double>(*r.span)) / static_cast<double>(t);
      }
      tab.rows.push_back(r);
    }
  }
  return tab;
}

Json TransienceTable::to_json() const {
  Json rs = Json::array();
  for (const auto& r : rows) {
    Json j{{"t", r.t}, {"returns", r.returns}, {"partial_sum", r.partial_sum}, {"missing", r.missing}};
    if (!r.missing) j["freq"] = r.freq.to_json();
    rs.push_back(j);
  }
  Json j{{"rows", rs}, {"consistent", consistent}};
  if (exponent) j["exponent"] = *exponent;
  return j;
}

double TransienceTable::relative_error(const std::vector<double>& exact, std::int64_t tmax) const {
  double a = 0, b = 0;
  for (const auto& r : rows)
    if (r.t <= tmax) a += r.freq.mean;
  for (std::int64_t t = 1; t <= tmax && t < static_cast<std::int64_t>(exact.size()); ++t) b += exact[static_cast<std::size_t>(t)];
  if (b == 0) throw Error(ErrorKind::InvalidArgument, "oracle sum is zero");
  return std::abs(a - b) / b;
}

TransienceTable strong_transience_probe(WalkConfig cfg, std::int64_t min_count, std::int64_t fit_from) {
  if (cfg.checkpoints.empty())
    for (std::int64_t t = 1; t <= cfg.n; ++t) cfg.checkpoints.push_back(t);
  cfg.stats = {Stat::Return};
  const WalkStats s = simulate(cfg);
  TransienceTable tab;
  double sum = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int pts = 0;
  for (const auto& [t, e] : s.return_freq) {
    TransienceRow r;
    r.t = t;
    r.freq = e;
    r.returns = std::llround(e.mean * static_cast<double>(s.walkers));
    r.missing = r.returns < min_count;
    sum += e.mean;
    r.partial_sum = sum;
    if (!r.missing && t >= fit_from) {
      const double x = std::log(static_cast<double>(t)), y = std::log(e.mean);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++pts;
    }
    tab.rows.push_back(r);
  }
  if (pts >= 3) {
    const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
    tab.exponent = -slope;
    tab.consistent = *tab.exponent > 1;
  }
  return tab;
}

// ---- staged recurrent measure

GroupSpec recurrent_group(int growth_degree) {
  if (growth_degree != 1 && growth_degree != 2)
    throw Error(ErrorKind::InvalidArgument, "growth degree must be 1 or 2");
  return build("lattice(" + std::to_string(growth_degree) + ")").spec;
}

Json RecurrentStage::to_json(const GroupSpec& spec) const {
  return Json{{"stage", stage},        {"a", a},
              {"b", b},                {"C", C},
              {"N", N},                {"envelope_sum", envelope_sum},
              {"partial_sum", partial_sum}, {"Nb_le_half", nb_ok},
              {"sum_ge_stage", sum_ok}, {"measure", measure.to_json(spec)}};
}

namespace {

// lazy, uniform over the steps +-k e_j with k <= i
std::vector<Atom> stage_atoms(int d, int i, double identity_mass) {
  std::vector<Atom> out{Atom{Word{}, identity_mass}};
  const double w = (1 - identity_mass) / (2.0 * d * i);
  for (int k = 1; k <= i; ++k)
    for (int j = 0; j < d; ++j)
      for (bool inv : {false, true}) out.push_back(Atom{Word(static_cast<std::size_t>(k), Letter{j, inv}), w});
  return out;
}

}  // namespace

std::vector<RecurrentStage> recurrent_measure_stages(int growth_degree, int stages, const RecurrentOptions& opt) {
  if (stages < 0) throw Error(ErrorKind::InvalidArgument, "stages must be non-negative");
  if (!(opt.identity_mass > 0 && opt.identity_mass < 1))
    throw Error(ErrorKind::InvalidArgument, "identity mass must lie in (0,1)");
  const GroupSpec spec = recurrent_group(growth_degree);
  const double half_d = growth_degree / 2.0;
  std::vector<RecurrentStage> out;
  std::vector<double> a;
  double prev_b = 0, prev_C = 0;
  for (int n = 1; n <= stages; ++n) {
    a.push_back(n == 1 ? 1.0 : prev_b / 2);
    double total = 0;
    for (double x : a) total += x;
    StepMeasure mu;
    for (int i = 1; i <= n; ++i)
      for (auto& at : stage_atoms(growth_degree, i, opt.identity_mass)) {
        at.p *= a[static_cast<std::size_t>(i - 1)] / total;
        auto same = std::find_if(mu.atoms.begin(), mu.atoms.end(), [&](const Atom& x) { return x.word == at.word; });
        if (same == mu.atoms.end()) mu.atoms.push_back(at);
        else same->p += at.p;
      }

    // smallest N with C_N sum_{t<=N} 1/(2 t^{d/2}) >= n, where
    // C_N = min(C_{n-1}, min_{t<=N} t^{d/2} p_t)
    ReturnOracle oracle(spec, mu, opt.state_budget);
    double C = n == 1 ? 1e300 : prev_C, inv_sum = 0, exact_sum = 0;
    std::int64_t N = 0;
    for (std::int64_t t = 1;; ++t) {
      if (t > opt.max_N)
        throw Error(ErrorKind::Infeasible, "stage " + std::to_string(n) + ": sum_{t<=N} C_n/(2 t^{d/2}) >= " +
                                               std::to_string(n) + " fails for N <= " + std::to_string(opt.max_N));
      const double p = oracle.step();
      const double td = std::pow(static_cast<double>(t), half_d);
      C = std::min(C, td * p);
      inv_sum += 1 / (2 * td);
      exact_sum += p / 2;
      if (C * inv_sum >= n) {
        N = t;
        break;
      }
    }
    RecurrentStage s;
    s.stage = n;
    s.a = a.back();
    s.C = C;
    s.N = N;
    s.envelope_sum = C * inv_sum;
    s.partial_sum = exact_sum;
    s.b = n == 1 ? 1.0 / (2.0 * static_cast<double>(N)) : std::min(1.0 / (2.0 * static_cast<double>(N)), prev_b / 2);
    s.nb_ok = static_cast<double>(N) * s.b <= 0.5;
    s.sum_ok = s.partial_sum >= n;
    if (!s.nb_ok) throw Error(ErrorKind::Infeasible, "stage " + std::to_string(n) + ": N_n b_n <= 1/2 fails");
    s.measure = std::move(mu);
    prev_b = s.b;
    prev_C = C;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace utb

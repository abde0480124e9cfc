#include "utb/blocks.hpp"

#include <unordered_set>

namespace utb {

namespace {

// Breadth-first enumeration of distinct group elements (by fingerprint),
// with parent links for word reconstruction.
class Ball {
 public:
  Ball(const GroupSpec& spec, const GroupFingerprint& fp) : spec_(spec), fp_(fp) {
    nodes_.push_back(Node{0, Letter{-1, false}});
    frontier_.push_back({0, fp.identity()});
    seen_.insert(hash_matrix(fp.identity()));
  }

  // expand one layer; calls visit(node, matrix) for each new element.
  // Returns false when the frontier is empty or the budget is hit.
  template <class F>
  bool expand(std::size_t budget, F&& visit) {
    std::vector<std::pair<std::uint32_t, FpMatrix>> next;
    const int ng = static_cast<int>(spec_.generators().size());
    for (const auto& [node, m] : frontier_) {
      const Letter last = nodes_[node].letter;
      for (int g = 0; g < ng; ++g) {
        for (bool inv : {false, true}) {
          if (last.gen == g && last.inv != inv) continue;  // free reduction
          Letter l{g, inv};
          FpMatrix x = m * fp_.letter(l);
          if (!seen_.insert(hash_matrix(x)).second) continue;
          nodes_.push_back(Node{node, l});
          const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
          visit(id, x);
          next.emplace_back(id, std::move(x));
          if (seen_.size() >= budget) {
            exhausted_ = true;
            frontier_.clear();
            return false;
          }
        }
      }
    }
    frontier_ = std::move(next);
    return !frontier_.empty();
  }

  Word word(std::uint32_t node) const {
    Word w;
    while (node != 0) {
      w.push_back(nodes_[node].letter);
      node = nodes_[node].parent;
    }
    return Word(w.rbegin(), w.rend());
  }

  std::size_t size() const { return seen_.size(); }
  bool exhausted() const { return exhausted_; }

 private:
  struct Node {
    std::uint32_t parent;
    Letter letter;
  };
  const GroupSpec& spec_;
  const GroupFingerprint& fp_;
  std::vector<Node> nodes_;
  std::vector<std::pair<std::uint32_t, FpMatrix>> frontier_;
  std::unordered_set<std::uint64_t> seen_;
  bool exhausted_ = false;
};

struct Candidate {
  Word word;
  FpMatrix m;
  bool commutator = false;
};

Word concat(std::initializer_list<const Word*> parts) {
  Word w;
  for (const Word* p : parts) w.insert(w.end(), p->begin(), p->end());
  return w;
}

// exact check of a witness; nullopt when symbolic evaluation blows up
std::optional<bool> verify_exact(const GroupSpec& spec, const Word& w, Pair p, const TOrder& order) {
  try {
    return valid_wrt(spec.eval(w), p, order);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Blowup) return std::nullopt;
    throw;
  }
}

}  // namespace

std::vector<Pair> BlockReport::valid_pairs() const {
  std::vector<Pair> out;
  for (const auto& r : pairs)
    if (r.status == PairStatus::Valid) out.push_back(r.pair);
  return out;
}

const PairResult& BlockReport::at(Pair p) const {
  for (const auto& r : pairs)
    if (r.pair == p) return r;
  throw Error(ErrorKind::InvalidArgument, "no pair " + p.str() + " in report");
}

std::vector<RationalFunction> phi_values(const GroupSpec& spec, Pair p) {
  std::vector<RationalFunction> out;
  for (const auto& g : spec.generators()) out.push_back(at(g.matrix, Pair{p.i, p.i}) / at(g.matrix, Pair{p.j, p.j}));
  return out;
}

GroupSpec block_group(const GroupSpec& spec, Pair p) {
  GroupSpec b(spec.field(), spec.nvars(), 2);
  const RationalFunction zero(spec.field(), spec.nvars());
  for (const auto& g : spec.generators()) {
    ExactMatrix m(2, zero);
    m(0, 0) = g.matrix(p.i - 1, p.i - 1);
    m(1, 1) = g.matrix(p.j - 1, p.j - 1);
    b.add_generator(g.name, m);
  }
  ExactMatrix d = ExactMatrix::identity(2, zero);
  d(0, 1) = one_like(zero);
  std::string name = "delta";
  while (b.find(name) >= 0) name += "'";
  b.add_generator(name, d);
  return b;
}

BlockReport decompose(const GroupSpec& spec, const TOrder& order, const BlockOptions& opt) {
  if (opt.depth < 1) throw Error(ErrorKind::InvalidArgument, "depth must be at least 1");
  if (order.size() != spec.size()) throw Error(ErrorKind::ArityMismatch, "order size differs from matrix size");
  BlockReport rep;
  rep.field = spec.field();
  rep.nvars = spec.nvars();
  rep.size = spec.size();
  rep.order = order.name();
  rep.depth = opt.depth;
  for (const auto& p : all_pairs(spec.size())) {
    PairResult r;
    r.pair = p;
    r.phi = phi_values(spec, p);
    rep.pairs.push_back(std::move(r));
  }
  if (rep.pairs.empty()) return rep;
  if (spec.diagonal_only()) {
    rep.diagonal_group = true;
    rep.searched_depth = opt.depth;
    return rep;
  }

  GroupFingerprint fp(spec, FingerprintContext(opt.seed));
  Ball ball(spec, fp);
  std::vector<Candidate> pool;  // unipotents retained for commutators
  std::size_t unresolved = rep.pairs.size();

  auto try_candidate = [&](const Candidate& c) {
    for (auto& r : rep.pairs) {
      if (r.status == PairStatus::Valid) continue;
      if (!valid_wrt(c.m, r.pair, order)) continue;
      auto ok = verify_exact(spec, c.word, r.pair, order);
      if (ok.has_value() && !*ok) continue;  // fingerprint false positive
      r.status = PairStatus::Valid;
      r.witness = c.word;
      r.from_commutator = c.commutator;
      r.exact_verified = ok.has_value();
      --unresolved;
    }
  };

  for (int d = 1; d <= opt.depth && unresolved > 0; ++d) {
    std::vector<Candidate> layer;
    bool more = ball.expand(opt.element_budget, [&](std::uint32_t node, const FpMatrix& m) {
      if (m.is_unipotent() && !m.is_identity()) layer.push_back(Candidate{ball.word(node), m, false});
    });
    for (const auto& c : layer) try_candidate(c);
    // commutators of retained unipotents, each unordered pair once
    std::size_t old = pool.size();
    for (auto& c : layer)
      if (pool.size() < opt.commutator_pool) pool.push_back(std::move(c));
    for (std::size_t b = old; b < pool.size() && unresolved > 0; ++b) {
      for (std::size_t a = 0; a < b && unresolved > 0; ++a) {
        FpMatrix m = pool[a].m * pool[b].m * pool[a].m.inverse() * pool[b].m.inverse();
        ++rep.commutators_tested;
        if (m.is_identity()) continue;
        Word ia = inverse_word(pool[a].word), ib = inverse_word(pool[b].word);
        try_candidate(Candidate{concat({&pool[a].word, &pool[b].word, &ia, &ib}), m, true});
      }
    }
    if (!ball.exhausted()) rep.searched_depth = d;
    if (!more) break;
  }
  rep.elements_searched = ball.size();
  rep.budget_exhausted = ball.exhausted();
  return rep;
}

Json BlockReport::to_json(const GroupSpec& spec) const {
  Json pj = Json::array();
  for (const auto& r : pairs) {
    Json e{{"i", r.pair.i}, {"j", r.pair.j}};
    if (r.status == PairStatus::Valid) {
      e["status"] = "valid";
      e["witness"] = spec.word_letters(r.witness);
      e["witness_length"] = r.witness.size();
      e["witness_kind"] = r.from_commutator ? "commutator" : "word";
      e["verified"] = r.exact_verified ? "exact" : "fingerprint";
    } else {
      e["status"] = diagonal_group ? "no_unipotents" : "no_witness";
      e["searched_depth"] = searched_depth;
    }
    Json phis = Json::object();
    for (std::size_t g = 0; g < r.phi.size(); ++g) phis[spec.generators()[g].name] = r.phi[g].to_string();
    e["phi_values"] = phis;
    e["block_generators"] = block_group(spec, r.pair).to_json()["generators"];
    pj.push_back(e);
  }
  return Json{{"char", field.characteristic()},
              {"vars", nvars},
              {"size", size},
              {"order", order},
              {"depth", depth},
              {"searched_depth", searched_depth},
              {"elements_searched", elements_searched},
              {"commutators_tested", commutators_tested},
              {"budget_exhausted", budget_exhausted},
              {"diagonal_group", diagonal_group},
              {"pairs", pj}};
}

ActionResult act_nontrivially(const GroupSpec& spec, const Word& g, const TOrder& total,
                              const std::function<bool(Pair)>& non_liouville, const BlockOptions& opt) {
  if (!total.is_total()) throw Error(ErrorKind::InvalidArgument, "act_nontrivially needs a total order");
  ActionResult res;
  GroupFingerprint fp(spec, FingerprintContext(opt.seed));
  const FpMatrix gm = fp.eval(g);
  const FpMatrix gi = gm.inverse();
  const Word ginv = inverse_word(g);
  std::vector<Candidate> conj;

  auto consider = [&](const Candidate& c) -> bool {
    ++res.candidates_tested;
    if (!c.m.is_unipotent() || c.m.is_identity()) return false;
    auto mx = t_max_coordinate(c.m, total);
    if (mx.empty() || !non_liouville(mx[0])) return false;
    ExactMatrix h = spec.eval(c.word);
    if (!h.is_unipotent()) return false;
    auto emx = t_max_coordinate(h, total);
    if (emx.empty() || emx[0] != mx[0]) return false;
    res.acts = true;
    res.witness = c.word;
    res.block = mx[0];
    return true;
  };

  auto add_conjugates = [&](const Word& x, const FpMatrix& xm) -> bool {
    FpMatrix xi = xm.inverse();
    Word xinv = inverse_word(x);
    for (int s = 0; s < 2; ++s) {
      Candidate c{concat({&x, s ? &ginv : &g, &xinv}), xm * (s ? gi : gm) * xi, false};
      if (consider(c)) return true;
      if (conj.size() < opt.commutator_pool) conj.push_back(std::move(c));
    }
    return false;
  };

  if (add_conjugates({}, fp.identity())) return res;
  Ball ball(spec, fp);
  bool found = false;
  for (int d = 1; d <= opt.depth && !found; ++d) {
    bool more = ball.expand(opt.element_budget, [&](std::uint32_t node, const FpMatrix& m) {
      if (!found && add_conjugates(ball.word(node), m)) found = true;
    });
    if (!more) break;
  }
  if (found) return res;
  for (std::size_t a = 0; a < conj.size(); ++a)
    for (std::size_t b = 0; b < conj.size(); ++b) {
      if (a == b) continue;
      Candidate c{concat({&conj[a].word, &conj[b].word}), conj[a].m * conj[b].m, true};
      if (consider(c)) return res;
    }
  return res;
}

}  // namespace utb

#include "utb/classifier.hpp"

#include <algorithm>

#include "utb/error.hpp"

namespace utb {

namespace {

struct Rule {
  const char* id;
  const char* citation;
};

constexpr Rule kAbelian{"abelian", "abelian groups have trivial boundary for every measure (Choquet-Deny)"};
constexpr Rule kDim3{"dim>=3",
                     "a valid block of dimension at least 3 forces non-trivial boundary for every non-degenerate "
                     "finite-entropy measure"};
constexpr Rule kCharpLe2{"char-p dim<=2",
                         "positive characteristic with every block of dimension at most 2: trivial boundary for "
                         "centered measures with finite second moment"};
constexpr Rule kCharpLe1{"char-p dim<=1",
                         "positive characteristic with every block of dimension at most 1: trivial boundary for "
                         "centered measures with finite first moment"};
constexpr Rule kChar0Le1{"char-0 dim<=1",
                         "every block of dimension at most 1: trivial boundary for centered measures with finite "
                         "second moment"};
constexpr Rule kWreath{"wreath dim 2",
                       "a dimension-2 block isomorphic to a rank-two lamplighter over Z^2: trivial boundary for "
                       "centered measures with finite second moment"};
constexpr Rule kRootOfUnity{"root of unity",
                            "dimension-2 block whose constants are roots of unity: a finite-index subgroup is a "
                            "quotient of a rank-two wreath product, trivial for centered finite second moment"};
constexpr Rule kGAlpha{"G_alpha pattern",
                       "dimension-2 block with a constant of infinite order independent from the variables: "
                       "non-trivial for every finite-entropy non-degenerate measure"};
constexpr Rule kConjectural{"char-0 dim 2 open",
                            "characteristic 0 dimension-2 block outside the wreath and G_alpha patterns: "
                            "non-triviality is conjectured, not proved"};
constexpr Rule kNoBlocks{"no valid block", "no valid block was found within the search depth; nothing is certified"};

bool is_abelian(const GroupSpec& spec) {
  const auto& g = spec.generators();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (!(g[i].matrix * g[j].matrix == g[j].matrix * g[i].matrix)) return false;
  return true;
}

enum class Dim2Kind { Wreath, RootOfUnity, GAlpha, Open };

// Constants against non-constant phi-values of a dimension-2 block. A -1
// among the constants takes the root-of-unity path even when the wreath
// certificate also holds, since that is the rule that explains it.
Dim2Kind dim2_kind(const PairResult& block, bool wreath) {
  bool unit_monomials = true, has_var = false, infinite_const = false, minus_one = false;
  for (const auto& f : block.phi) {
    if (f.is_constant()) {
      const Coeff& c = f.num().leading().c;
      if (!root_of_unity_check(c)) infinite_const = true;
      minus_one = minus_one || c == -1;
      continue;
    }
    has_var = true;
    const Coeff& c = f.num().leading().c;
    unit_monomials = unit_monomials && f.is_monomial() && (c == 1 || c == -1);
  }
  const bool pattern = has_var && unit_monomials;
  if (pattern && minus_one && !infinite_const) return Dim2Kind::RootOfUnity;
  if (wreath) return Dim2Kind::Wreath;
  if (!pattern) return Dim2Kind::Open;
  return infinite_const ? Dim2Kind::GAlpha : Dim2Kind::Open;
}

}  // namespace

bool root_of_unity_check(const Coeff& alpha) {
  if (alpha == 0) throw Error(ErrorKind::InvalidArgument, "alpha must be nonzero");
  return alpha == 1 || alpha == -1;
}

Verdict classify(const GroupSpec& spec, const BlockReport& blocks, const std::vector<DimensionReport>& dims,
                 const std::vector<bool>& wreath_flags) {
  const auto pairs = blocks.valid_pairs();
  if (dims.size() != pairs.size())
    throw Error(ErrorKind::InvalidArgument, "classify needs one dimension report per valid block");
  if (!wreath_flags.empty() && wreath_flags.size() != pairs.size())
    throw Error(ErrorKind::InvalidArgument, "classify needs one wreath flag per valid block");

  Verdict v;
  auto decide = [&](Outcome o, MomentClass m, const Rule& r) {
    v.outcome = o;
    v.moment_class = m;
    v.rule = r.id;
    v.citation = r.citation;
  };

  if (is_abelian(spec)) {
    decide(Outcome::Trivial, MomentClass::AnyFiniteEntropyNondegenerate, kAbelian);
    for (std::size_t k = 0; k < pairs.size(); ++k)
      v.basis.push_back({pairs[k], dims[k].dimension, kAbelian.id, kAbelian.citation});
    return v;
  }
  if (pairs.empty()) {
    decide(Outcome::Unknown, MomentClass::AnyFiniteEntropyNondegenerate, kNoBlocks);
    v.caveats.push_back("block search reached depth " + std::to_string(blocks.searched_depth) + " without a witness");
    return v;
  }

  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (dims[k].ambiguous) {
      decide(Outcome::Unknown, MomentClass::AnyFiniteEntropyNondegenerate,
             Rule{"ambiguous dimension", "a block dimension could not be resolved"});
      std::string c;
      for (int x : dims[k].candidates) c += (c.empty() ? "" : " or ") + std::to_string(x);
      v.caveats.push_back("block " + pairs[k].str() + ": dimension is " + c);
      v.basis.push_back({pairs[k], dims[k].dimension, "ambiguous", "fitted exponent between candidates " + c});
      return v;
    }

  const bool charp = spec.field().is_prime();
  int maxdim = 0;
  for (const auto& d : dims) maxdim = std::max(maxdim, d.dimension);

  bool galpha = false, open = false;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const int d = dims[k].dimension;
    const Rule* r;
    if (d >= 3) {
      r = &kDim3;
      if (dims[k].provenance == Provenance::SpanFit)
        v.caveats.push_back("block " + pairs[k].str() + ": dimension from span growth only, not certified");
    } else if (charp) {
      r = maxdim >= 2 ? &kCharpLe2 : &kCharpLe1;
    } else if (d <= 1) {
      r = &kChar0Le1;
    } else {
      switch (dim2_kind(blocks.at(pairs[k]), !wreath_flags.empty() && wreath_flags[k])) {
        case Dim2Kind::Wreath: r = &kWreath; break;
        case Dim2Kind::RootOfUnity: r = &kRootOfUnity; break;
        case Dim2Kind::GAlpha:
          r = &kGAlpha;
          galpha = true;
          break;
        default:
          r = &kConjectural;
          open = true;
      }
    }
    v.basis.push_back({pairs[k], d, r->id, r->citation});
  }

  if (maxdim >= 3) {
    decide(Outcome::Nontrivial, MomentClass::AnyFiniteEntropyNondegenerate, kDim3);
  } else if (charp) {
    if (maxdim == 2) decide(Outcome::Trivial, MomentClass::CenteredSecondMoment, kCharpLe2);
    else decide(Outcome::Trivial, MomentClass::CenteredFirstMoment, kCharpLe1);
  } else if (galpha) {
    decide(Outcome::Nontrivial, MomentClass::AnyFiniteEntropyNondegenerate, kGAlpha);
  } else if (open) {
    decide(Outcome::ConjecturalNontrivial, MomentClass::AnyFiniteEntropyNondegenerate, kConjectural);
  } else if (maxdim == 2) {
    // every dimension-2 block is a wreath or root-of-unity block
    const bool any_root = std::any_of(v.basis.begin(), v.basis.end(), [](const BasisItem& b) { return b.rule == kRootOfUnity.id; });
    decide(Outcome::Trivial, MomentClass::CenteredSecondMoment, any_root ? kRootOfUnity : kWreath);
  } else {
    decide(Outcome::Trivial, MomentClass::CenteredSecondMoment, kChar0Le1);
  }
  if (blocks.budget_exhausted) v.caveats.push_back("block search stopped at the element budget");
  for (const auto& b : blocks.pairs)
    if (b.status == PairStatus::Valid && !b.exact_verified)
      v.caveats.push_back("block " + b.pair.str() + ": witness verified on fingerprints only");
  return v;
}

void classify_elements(Verdict& v, const GroupSpec& spec, const std::vector<Word>& words, const TOrder& total,
                       const BlockOptions& opt) {
  std::vector<Pair> hot;
  for (const auto& b : v.basis)
    if (b.rule == kDim3.id || b.rule == kGAlpha.id) hot.push_back(b.pair);
  auto pred = [&](Pair p) { return std::find(hot.begin(), hot.end(), p) != hot.end(); };
  std::vector<ElementVerdict> out;
  for (const auto& w : words) {
    ElementVerdict e;
    e.element = spec.format_word(w);
    if (hot.empty()) {
      e.detail = "no block of the verdict carries non-trivial boundary";
    } else {
      const ActionResult a = act_nontrivially(spec, w, total, pred, opt);
      e.acts_nontrivially = a.acts;
      e.detail = a.acts ? "unipotent " + spec.format_word(a.witness) + " over block " + a.block.str()
                        : "no witness within depth " + std::to_string(opt.depth);
    }
    out.push_back(std::move(e));
  }
  v.per_element = std::move(out);
}

Json Verdict::to_json() const {
  Json basis_j = Json::array();
  for (const auto& b : basis)
    basis_j.push_back(Json{{"pair", b.pair.str()}, {"dimension", b.dimension}, {"rule", b.rule}, {"citation", b.citation}});
  Json j{{"outcome", outcome_name(outcome)},
         {"moment_class", moment_class_name(moment_class)},
         {"rule", rule},
         {"citation", citation},
         {"basis", basis_j},
         {"caveats", caveats}};
  if (per_element) {
    Json pe = Json::object();
    for (const auto& e : *per_element)
      pe[e.element] = Json{{"acts_nontrivially", e.acts_nontrivially}, {"detail", e.detail}};
    j["per_element"] = pe;
  }
  return j;
}

std::string Verdict::citation_trail() const {
  std::string s = std::string(outcome_name(outcome)) + " (" + moment_class_name(moment_class) + ")\n";
  s += "  by " + rule + ": " + citation + "\n";
  for (const auto& b : basis)
    s += "  block " + b.pair.str() + " dim " + std::to_string(b.dimension) + ": " + b.rule + "\n";
  for (const auto& c : caveats) s += "  caveat: " + c + "\n";
  return s;
}

}  // namespace utb

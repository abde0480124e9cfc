#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "utb/group.hpp"
#include "utb/torder.hpp"

namespace utb {

struct BlockOptions {
  int depth = 8;
  std::size_t element_budget = 2000000;  // distinct group elements visited
  std::size_t commutator_pool = 48;      // retained unipotents combined pairwise
  std::uint64_t seed = 0x243f6a8885a308d3ULL;
};

enum class PairStatus { Valid, NoWitness };

struct PairResult {
  Pair pair;
  PairStatus status = PairStatus::NoWitness;
  Word witness;
  bool from_commutator = false;
  bool exact_verified = false;  // false: accepted on fingerprints after symbolic blowup
  std::vector<RationalFunction> phi;  // g_ii / g_jj per generator
};

struct BlockReport {
  CoefficientField field;
  int nvars = 0;
  int size = 0;
  std::string order;
  int depth = 0;
  int searched_depth = 0;
  std::size_t elements_searched = 0;
  std::size_t commutators_tested = 0;
  bool budget_exhausted = false;
  bool diagonal_group = false;  // every element diagonal: certified, no unipotents at all
  std::vector<PairResult> pairs;

  std::vector<Pair> valid_pairs() const;
  const PairResult& at(Pair p) const;
  Json to_json(const GroupSpec& spec) const;
};

std::vector<RationalFunction> phi_values(const GroupSpec& spec, Pair p);
// the 2x2 basic block: diag(g_ii, g_jj) for every generator g, plus delta
GroupSpec block_group(const GroupSpec& spec, Pair p);

BlockReport decompose(const GroupSpec& spec, const TOrder& order, const BlockOptions& opt = BlockOptions());

struct ActionResult {
  bool acts = false;
  Word witness;
  Pair block;
  std::size_t candidates_tested = 0;
};

// Search conjugates of g (and g^-1) by words of length <= depth, and their
// pairwise products, for a unipotent h whose T-maximal coordinate lies over
// a block accepted by non_liouville.
ActionResult act_nontrivially(const GroupSpec& spec, const Word& g, const TOrder& total,
                              const std::function<bool(Pair)>& non_liouville, const BlockOptions& opt = BlockOptions());

}  // namespace utb

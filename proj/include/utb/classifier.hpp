#pragma once

#include <optional>
#include <string>
#include <vector>

#include "utb/blocks.hpp"
#include "utb/module_dim.hpp"
#include "utb/verdict.hpp"

namespace utb {

struct BasisItem {
  Pair pair;
  int dimension = 0;
  std::string rule;      // short rule id, e.g. "dim>=3"
  std::string citation;  // what the rule says
};

struct ElementVerdict {
  std::string element;
  bool acts_nontrivially = false;
  std::string detail;
};

struct Verdict {
  Outcome outcome = Outcome::Unknown;
  MomentClass moment_class = MomentClass::AnyFiniteEntropyNondegenerate;
  std::string rule;  // the rule that decided the outcome
  std::string citation;
  std::vector<BasisItem> basis;
  std::vector<std::string> caveats;
  std::optional<std::vector<ElementVerdict>> per_element;

  Json to_json() const;
  std::string citation_trail() const;  // human-readable
};

// the only rational roots of unity are 1 and -1
bool root_of_unity_check(const Coeff& alpha);

// dims and wreath_flags are aligned with blocks.valid_pairs(); a wreath flag
// only matters for dimension-2 blocks.
Verdict classify(const GroupSpec& spec, const BlockReport& blocks, const std::vector<DimensionReport>& dims,
                 const std::vector<bool>& wreath_flags);

// Fill per_element: does each word act non-trivially on the boundary through
// a block the verdict marked non-Liouville?
void classify_elements(Verdict& v, const GroupSpec& spec, const std::vector<Word>& words, const TOrder& total,
                       const BlockOptions& opt = BlockOptions());

}  // namespace utb

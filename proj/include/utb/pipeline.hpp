#pragma once

#include <optional>
#include <vector>

#include "utb/blocks.hpp"
#include "utb/classifier.hpp"
#include "utb/module_dim.hpp"

namespace utb {

struct AnalysisOptions {
  BlockOptions blocks;
  DimOptions dim;
  int exponent_bound = 3;  // wreath check
  int wreath_radius = 4;
  std::optional<TOrder> order;  // default: the partial order U
};

struct Analysis {
  BlockReport blocks;
  // aligned with blocks.valid_pairs()
  std::vector<ModuleSpec> modules;
  std::vector<DimensionReport> dims;
  std::vector<std::optional<WreathCheck>> wreath;  // only for char-0 dimension-2 blocks
  Verdict verdict;

  std::vector<bool> wreath_flags() const;
  Json to_json(const GroupSpec& spec) const;
};

// blocks -> dim -> wreath check -> classify. Blocks with identical phi-sets
// share one dimension estimate.
Analysis analyze(const GroupSpec& spec, const AnalysisOptions& opt = AnalysisOptions());

}  // namespace utb

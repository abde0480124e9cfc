#pragma once

#include <optional>
#include <string>
#include <vector>

#include "utb/group.hpp"
#include "utb/verdict.hpp"

namespace utb {

struct CatalogEntry {
  std::string name;  // canonical, e.g. "lamplighter(3,2)"
  std::string family;
  std::vector<std::string> params;
  GroupSpec spec;
  std::optional<int> expected_dimension;
  std::string dimension_basis;
  std::optional<Outcome> expected_outcome;
  std::optional<MomentClass> expected_moment;
  std::string verdict_basis;

  Json to_json() const;
};

// "lamplighter(3,2)", "xyz", "g_alpha(-1,2)", ...
CatalogEntry build(const std::string& name);
CatalogEntry build(const std::string& family, const std::vector<std::string>& params);
std::vector<std::string> catalog_families();

enum class MeasureKind { UniformSymmetric, BasePlusLamp, LazyUniform };
MeasureKind measure_kind_from_name(const std::string& s);
StepMeasure default_measure(const CatalogEntry& entry, MeasureKind kind);
StepMeasure default_measure(const GroupSpec& spec, MeasureKind kind);

// the subgroup generated by the diagonal generators (the base Z^d for
// wreath-type entries)
GroupSpec base_group(const GroupSpec& spec);

}  // namespace utb

#include "utb/pipeline.hpp"

#include <map>

namespace utb {

std::vector<bool> Analysis::wreath_flags() const {
  std::vector<bool> f;
  for (const auto& w : wreath) f.push_back(w && w->holds);
  return f;
}

Json Analysis::to_json(const GroupSpec& spec) const {
  Json dj = Json::array();
  const auto pairs = blocks.valid_pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    Json j{{"pair", pairs[k].str()}, {"module", modules[k].to_json()}, {"report", dims[k].to_json()}};
    if (wreath[k]) j["wreath"] = wreath[k]->to_json();
    dj.push_back(std::move(j));
  }
  return Json{{"blocks", blocks.to_json(spec)}, {"dimensions", dj}, {"verdict", verdict.to_json()}};
}

Analysis analyze(const GroupSpec& spec, const AnalysisOptions& opt) {
  Analysis a;
  const TOrder order = opt.order ? *opt.order : TOrder::partial_u(spec.size());
  a.blocks = decompose(spec, order, opt.blocks);
  std::map<std::string, DimensionReport> seen;
  for (const auto& p : a.blocks.valid_pairs()) {
    const PairResult& b = a.blocks.at(p);
    ModuleSpec m = ModuleSpec::from_phis(b.phi);
    const std::string key = m.to_json().dump();
    auto it = seen.find(key);
    if (it == seen.end()) it = seen.emplace(key, dimension_estimate(m, opt.dim)).first;
    const DimensionReport& d = it->second;
    std::optional<WreathCheck> w;
    if (!spec.field().is_prime() && !d.ambiguous && d.dimension == 2)
      w = is_wreath_block(b, m, opt.exponent_bound, opt.wreath_radius);
    a.modules.push_back(std::move(m));
    a.dims.push_back(d);
    a.wreath.push_back(std::move(w));
  }
  a.verdict = classify(spec, a.blocks, a.dims, a.wreath_flags());
  return a;
}

}  // namespace utb

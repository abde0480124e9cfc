#include "utb/torder.hpp"

#include <algorithm>

namespace utb {

bool u_less(Pair a, Pair b) { return a != b && a.i <= b.i && a.j >= b.j; }

std::vector<Pair> all_pairs(int n) {
  std::vector<Pair> out;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) out.push_back(Pair{i, j});
  return out;
}

TOrder TOrder::partial_u(int n) {
  TOrder t;
  t.n_ = n;
  t.name_ = "U";
  return t;
}

TOrder TOrder::row_major(int n) {
  auto p = all_pairs(n);
  std::sort(p.begin(), p.end(), [](Pair a, Pair b) { return a.i != b.i ? a.i < b.i : a.j > b.j; });
  return from_ranked(n, p, "rowmajor");
}

TOrder TOrder::col_major(int n) {
  auto p = all_pairs(n);
  std::sort(p.begin(), p.end(), [](Pair a, Pair b) { return a.j != b.j ? a.j > b.j : a.i < b.i; });
  return from_ranked(n, p, "colmajor");
}

TOrder TOrder::from_ranked(int n, std::vector<Pair> ranked, std::string name) {
  auto all = all_pairs(n);
  if (ranked.size() != all.size()) throw Error(ErrorKind::InvalidArgument, "order must rank every coordinate once");
  for (const auto& p : all)
    if (std::count(ranked.begin(), ranked.end(), p) != 1)
      throw Error(ErrorKind::InvalidArgument, "coordinate " + p.str() + " missing or repeated");
  for (std::size_t a = 0; a < ranked.size(); ++a)
    for (std::size_t b = a + 1; b < ranked.size(); ++b)
      if (u_less(ranked[b], ranked[a]))
        throw Error(ErrorKind::InvalidArgument,
                    "order does not extend U: " + ranked[b].str() + " <_U " + ranked[a].str());
  TOrder t;
  t.n_ = n;
  t.name_ = std::move(name);
  t.ranked_ = std::move(ranked);
  return t;
}

int TOrder::rank(Pair p) const {
  for (std::size_t k = 0; k < ranked_.size(); ++k)
    if (ranked_[k] == p) return static_cast<int>(k);
  throw Error(ErrorKind::InvalidArgument, "coordinate " + p.str() + " outside the order");
}

bool TOrder::greater(Pair a, Pair b) const {
  if (ranked_.empty()) return u_less(b, a);
  return rank(a) > rank(b);
}

TOrder order_from_json(const Json& j, int n) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "U") return TOrder::partial_u(n);
    if (s == "rowmajor") return TOrder::row_major(n);
    if (s == "colmajor") return TOrder::col_major(n);
    throw Error(ErrorKind::InvalidArgument, "unknown order " + s);
  }
  std::vector<Pair> ranked;
  for (const auto& p : j) ranked.push_back(Pair{p.at(0).get<int>(), p.at(1).get<int>()});
  return TOrder::from_ranked(n, ranked);
}

Json order_to_json(const TOrder& t) {
  if (!t.is_total() || t.name() != "custom") return t.name();
  Json arr = Json::array();
  for (const auto& p : t.ranked()) arr.push_back(Json::array({p.i, p.j}));
  return arr;
}

}  // namespace utb

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "utb/group.hpp"

namespace utb {

// The partial order U on coordinates, (i,j) <=_U (i',j') iff i <= i' and
// j >= j', or a total order extending it.
class TOrder {
 public:
  static TOrder partial_u(int n);
  static TOrder row_major(int n);
  static TOrder col_major(int n);
  // ranked ascending; must list every pair once and extend U
  static TOrder from_ranked(int n, std::vector<Pair> ranked, std::string name = "custom");

  int size() const { return n_; }
  bool is_total() const { return !ranked_.empty(); }
  const std::string& name() const { return name_; }
  const std::vector<Pair>& ranked() const { return ranked_; }

  bool greater(Pair a, Pair b) const;  // a >_T b
  bool geq(Pair a, Pair b) const { return a == b || greater(a, b); }

 private:
  int rank(Pair p) const;
  int n_ = 0;
  std::string name_;
  std::vector<Pair> ranked_;
};

bool u_less(Pair a, Pair b);  // strict
std::vector<Pair> all_pairs(int n);

// maximal nonzero off-diagonal coordinates of a unipotent matrix: one pair
// for a total order, the set of maximal pairs for U; empty for identity
template <class Scalar>
std::vector<Pair> t_max_coordinate(const UTMatrix<Scalar>& u, const TOrder& order) {
  std::vector<Pair> nz;
  for (const auto& p : all_pairs(u.size()))
    if (!is_zero(u(p.i - 1, p.j - 1))) nz.push_back(p);
  std::vector<Pair> out;
  for (const auto& p : nz) {
    bool dominated = false;
    for (const auto& q : nz)
      if (order.greater(q, p)) dominated = true;
    if (!dominated) out.push_back(p);
  }
  return out;
}

// u unipotent and zero at every coordinate >=_T p
template <class Scalar>
bool in_nt(const UTMatrix<Scalar>& u, Pair p, const TOrder& order) {
  if (!u.is_unipotent()) return false;
  for (const auto& q : all_pairs(u.size()))
    if (order.geq(q, p) && !is_zero(u(q.i - 1, q.j - 1))) return false;
  return true;
}

// literal witness test: unipotent, nonzero at p, zero strictly above p
template <class Scalar>
bool valid_wrt(const UTMatrix<Scalar>& u, Pair p, const TOrder& order) {
  if (!u.is_unipotent() || is_zero(u(p.i - 1, p.j - 1))) return false;
  for (const auto& q : all_pairs(u.size()))
    if (order.greater(q, p) && !is_zero(u(q.i - 1, q.j - 1))) return false;
  return true;
}

TOrder order_from_json(const Json& j, int n);
Json order_to_json(const TOrder& t);

}  // namespace utb

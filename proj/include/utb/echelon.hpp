#pragma once

#include <cstdint>
#include <vector>

#include "utb/fingerprint.hpp"

namespace utb {

// Incremental row echelon form over a fingerprint ring.
class DenseEchelon {
 public:
  DenseEchelon(const FingerprintRing& ring, std::size_t width) : ring_(&ring), width_(width) {}
  std::size_t rank() const { return rows_.size(); }
  std::size_t width() const { return width_; }

  // true when v was independent of the rows so far (and is now a row)
  bool insert(std::vector<std::uint64_t> v) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const std::size_t p = pivots_[i];
      const std::uint64_t c = v[p];
      if (!c) continue;
      ring_->axpy(c, rows_[i].data() + p, v.data() + p, width_ - p);
    }
    std::size_t p = 0;
    while (p < width_ && !v[p]) ++p;
    if (p == width_) return false;
    const std::uint64_t inv = ring_->inv(v[p]);
    for (std::size_t j = p; j < width_; ++j) v[j] = ring_->mul(v[j], inv);
    rows_.push_back(std::move(v));
    pivots_.push_back(p);
    return true;
  }

 private:
  const FingerprintRing* ring_;
  std::size_t width_;
  std::vector<std::vector<std::uint64_t>> rows_;
  std::vector<std::size_t> pivots_;
};

}  // namespace utb

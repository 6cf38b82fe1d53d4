#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "moran/error.hpp"

namespace moran {

/// Binary indexed (Fenwick) tree over non-negative integer weights:
/// O(log n) point update and O(log n) inverse-prefix-sum search.
class WeightIndex {
 public:
  WeightIndex() = default;

  explicit WeightIndex(std::span<const std::uint64_t> weights)
      : weights_(weights.begin(), weights.end()), tree_(weights.size() + 1, 0) {
    for (std::size_t i = 1; i <= weights_.size(); ++i) {
      tree_[i] += weights_[i - 1];
      if (tree_[i] < weights_[i - 1]) fail(ErrorCode::WeightOverflow, "total vertex weight exceeds 64 bits");
      total_ += weights_[i - 1];
      if (total_ < weights_[i - 1]) fail(ErrorCode::WeightOverflow, "total vertex weight exceeds 64 bits");
      const std::size_t parent = i + (i & (~i + 1));
      if (parent <= weights_.size()) tree_[parent] += tree_[i];
    }
    top_ = weights_.empty() ? 0 : std::bit_floor(weights_.size());
  }

  std::size_t size() const noexcept { return weights_.size(); }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t weight(std::size_t i) const { return weights_[i]; }

  void set(std::size_t i, std::uint64_t w) {
    const std::uint64_t old = weights_[i];
    if (w == old) return;
    weights_[i] = w;
    total_ = total_ - old + w;
    // unsigned wrap-around makes the decrement case work too
    const std::uint64_t delta = w - old;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  /// The index i with prefix(i) <= r < prefix(i + 1); requires r < total().
  std::size_t find(std::uint64_t r) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= r) {
        pos = next;
        r -= tree_[next];
      }
    }
    return pos;
  }

  std::uint64_t prefix(std::size_t count) const {
    std::uint64_t sum = 0;
    for (std::size_t k = count; k > 0; k -= k & (~k + 1)) sum += tree_[k];
    return sum;
  }

 private:
  std::vector<std::uint64_t> weights_;
  std::vector<std::uint64_t> tree_;  // 1-based
  std::uint64_t total_ = 0;
  std::size_t top_ = 0;
};

}  // namespace moran

#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace specialism {

// Disjoint sets with union by size and path halving. Tracks the number of
// sets and the size of the largest one so threshold sweeps can read them
// after each batch of unions.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1), sets_(n), largest_(n ? 1 : 0) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Returns true when x and y were in different sets.
  bool unite(std::uint32_t x, std::uint32_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (size_[x] < size_[y] || (size_[x] == size_[y] && y < x)) std::swap(x, y);
    parent_[y] = x;
    size_[x] += size_[y];
    if (size_[x] > largest_) largest_ = size_[x];
    --sets_;
    return true;
  }

  bool same(std::uint32_t x, std::uint32_t y) { return find(x) == find(y); }
  std::uint32_t set_size(std::uint32_t x) { return size_[find(x)]; }

  std::size_t element_count() const { return parent_.size(); }
  std::size_t set_count() const { return sets_; }
  std::size_t largest_set() const { return largest_; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
  std::size_t sets_;
  std::size_t largest_;
};

}  // namespace specialism

#pragma once

#include <cstddef>
#include <vector>

#include "skma/error.hpp"

namespace skma {

// Assignment of n curves to K clusters. Labels are 0-based in memory;
// every file format and CLI surface renders them 1-based.
struct Partition {
  std::vector<std::size_t> labels;
  std::size_t k = 0;

  Partition() = default;
  Partition(std::vector<std::size_t> labels_, std::size_t k_)
      : labels(std::move(labels_)), k(k_) {
    if (k == 0) throw InvalidArgument("Partition: k must be positive");
    for (std::size_t l : labels)
      if (l >= k) throw InvalidArgument("Partition: label out of range");
  }

  std::size_t size() const { return labels.size(); }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(k, 0);
    for (std::size_t l : labels) ++s[l];
    return s;
  }

  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> m(k);
    for (std::size_t i = 0; i < labels.size(); ++i) m[labels[i]].push_back(i);
    return m;
  }

  bool has_empty_cluster() const {
    for (std::size_t s : sizes())
      if (s == 0) return true;
    return false;
  }
};

}  // namespace skma

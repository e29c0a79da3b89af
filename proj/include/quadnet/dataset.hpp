#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "quadnet/linalg.hpp"
#include "quadnet/rng.hpp"

namespace quadnet {

struct Dataset {
  Matrix features;          // rows = samples
  std::vector<int> labels;  // one per row
  int num_classes = 0;
  std::string generator;
  std::map<std::string, std::string> parameters;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  /// Checks rows(features) == len(labels) and labels in [0, num_classes).
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Shuffled split into sizes floor(ratio * n) and the remainder.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double ratio, RngStream& rng);

/// CSV layout: header `x0,...,x{d-1},label`, floats with 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
Dataset read_dataset_csv(std::istream& in);
void save_dataset_csv(const std::string& path, const Dataset& ds);
Dataset load_dataset_csv(const std::string& path);

}  // namespace quadnet

#include "quadnet/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "quadnet/errors.hpp"
#include "quadnet/format.hpp"

namespace quadnet {

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw ValidationError("dataset: " + std::to_string(features.rows()) + " feature rows but " +
                          std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ValidationError("dataset: label " + std::to_string(y) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.features = Matrix(indices.size(), dim());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = features.row(indices[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels[indices[i]]);
  }
  out.num_classes = num_classes;
  out.generator = generator;
  out.parameters = parameters;
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double ratio, RngStream& rng) {
  if (ds.size() == 0) throw ValidationError("train_test_split: empty dataset");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("train_test_split: ratio must be in (0,1)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ds.size())));
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return {ds.subset(train), ds.subset(test)};
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  ds.validate();
  for (std::size_t k = 0; k < ds.dim(); ++k) out << 'x' << k << ',';
  out << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) out << fmt17(v) << ',';
    out << ds.labels[i] << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("dataset csv: missing header");
  std::size_t columns = 1;
  for (char c : line) columns += (c == ',');
  if (columns < 2) throw ValidationError("dataset csv: need at least one feature column");
  const std::size_t d = columns - 1;
  std::vector<double> values;
  std::vector<int> labels;
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        if (col < d) {
          values.push_back(std::stod(cell));
        } else if (col == d) {
          labels.push_back(std::stoi(cell));
          max_label = std::max(max_label, labels.back());
        }
      } catch (const std::exception&) {
        throw ValidationError("dataset csv: bad number '" + cell + "' on line " + std::to_string(line_no));
      }
      ++col;
    }
    if (col != columns) throw ValidationError("dataset csv: wrong column count on line " + std::to_string(line_no));
  }
  Dataset ds;
  ds.features = Matrix(labels.size(), d);
  std::copy(values.begin(), values.end(), ds.features.flat().begin());
  ds.labels = std::move(labels);
  ds.num_classes = max_label + 1;
  ds.generator = "csv";
  ds.validate();
  return ds;
}

void save_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  write_dataset_csv(out, ds);
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  return read_dataset_csv(in);
}

}  // namespace quadnet

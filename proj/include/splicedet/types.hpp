#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace splicedet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array2D = Eigen::ArrayXXd;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

/// Per-feature keep/drop mask; one byte per schema entry so it serializes as-is.
using Mask = std::vector<std::uint8_t>;

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::size_t mask_popcount(const Mask& m) {
  std::size_t n = 0;
  for (auto b : m) n += (b != 0);
  return n;
}

}  // namespace splicedet

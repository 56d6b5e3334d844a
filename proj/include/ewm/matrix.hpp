#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ewm {

/// Dense n x n matrix of doubles, row-major. Indexed (row, col) = (outcome v, seed s)
/// everywhere in this library.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * n_, n_}; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::vector<double> row_sums() const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) out[r] += (*this)(r, c);
    return out;
  }

  std::vector<double> col_sums() const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) out[c] += (*this)(r, c);
    return out;
  }

  SquareMatrix scaled(double k) const {
    SquareMatrix out = *this;
    for (double& x : out.data_) x *= k;
    return out;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

}  // namespace ewm

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace losemb {

/// Dense row-major matrix of doubles, one row per node.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  /// Takes ownership of `values`; throws ValidationError if the size is wrong
  /// or any value is non-finite.
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * dim_, dim_};
  }
  std::span<double> row(std::size_t r) { return {values_.data() + r * dim_, dim_}; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * dim_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * dim_ + c]; }

  std::span<const double> values() const { return values_; }

  void append_row(std::span<const double> row);

  bool same_shape(const EmbeddingMatrix& other) const {
    return rows_ == other.rows_ && dim_ == other.dim_;
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

}  // namespace losemb

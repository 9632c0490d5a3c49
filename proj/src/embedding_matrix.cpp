#include "losemb/embedding_matrix.hpp"

#include <cmath>
#include <string>

#include "losemb/error.hpp"

namespace losemb {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), values_(rows * dim, 0.0) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (values_.size() != rows_ * dim_) {
    throw ValidationError("embedding matrix expects " + std::to_string(rows_ * dim_) +
                          " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("non-finite embedding value at row " + std::to_string(i / dim_) +
                            ", column " + std::to_string(i % dim_));
    }
  }
}

void EmbeddingMatrix::append_row(std::span<const double> row) {
  if (rows_ == 0 && values_.empty() && dim_ == 0) dim_ = row.size();
  if (row.size() != dim_) {
    throw ValidationError("row of dimension " + std::to_string(row.size()) +
                          " appended to matrix of dimension " + std::to_string(dim_));
  }
  for (double v : row) {
    if (!std::isfinite(v)) throw ValidationError("non-finite value in appended row");
  }
  values_.insert(values_.end(), row.begin(), row.end());
  ++rows_;
}

}  // namespace losemb

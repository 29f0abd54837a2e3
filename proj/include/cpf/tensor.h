#ifndef CPF_TENSOR_H
#define CPF_TENSOR_H

#include <span>
#include <string>
#include <vector>

namespace cpf {

using real_t = double;

/// Dense row-major tensor of 64-bit reals.
///
/// Rank is implied by the shape vector; scalars are represented as the
/// single-element shape {1}. The element count always equals the product
/// of the shape dimensions.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<real_t> values);

  static Tensor scalar(real_t v);
  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, real_t v);
  static Tensor vector(std::vector<real_t> values);
  static Tensor matrix(int rows, int cols, std::vector<real_t> values);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int size() const { return static_cast<int>(data_.size()); }
  bool empty() const { return data_.empty(); }

  bool is_scalar() const { return data_.size() == 1; }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  real_t* data() { return data_.data(); }
  const real_t* data() const { return data_.data(); }
  std::vector<real_t>& values() { return data_; }
  const std::vector<real_t>& values() const { return data_; }

  real_t& operator[](int i) { return data_[static_cast<size_t>(i)]; }
  real_t operator[](int i) const { return data_[static_cast<size_t>(i)]; }

  /// Matrix element access; requires rank 2.
  real_t& at(int r, int c) { return data_[static_cast<size_t>(r) * cols() + c]; }
  real_t at(int r, int c) const { return data_[static_cast<size_t>(r) * cols() + c]; }

  int rows() const { return rank() == 2 ? shape_[0] : (rank() == 1 ? 1 : 0); }
  int cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? shape_[0] : 0); }

  std::span<real_t> row(int r);
  std::span<const real_t> row(int r) const;

  real_t scalar_value() const;

  void fill(real_t v);
  void zero() { fill(0.0); }

  bool all_finite() const;

  /// Sum of squared entries.
  real_t squared_norm() const;
  real_t norm() const;

  /// Human-readable shape, e.g. "[4x8]".
  std::string shape_str() const;

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

private:
  std::vector<int> shape_;
  std::vector<real_t> data_;
};

/// In-place y += x. Shapes must match.
void add_in_place(Tensor& y, const Tensor& x);
/// In-place y += a * x. Shapes must match.
void axpy(Tensor& y, real_t a, const Tensor& x);

}  // namespace cpf

#endif

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace act {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major fp64 array. A tensor produced under an active Tape carries a
// handle to the node that produced it; copies share that handle, and values
// are immutable once a tensor is tracked.
class Tensor {
 public:
  // Rank-0 scalar holding 0.
  Tensor();
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor filled(Shape shape, double value);
  static Tensor vector(std::vector<double> values);
  // Rows must share one length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  // Negative axes count from the back.
  std::size_t dim(int axis) const;

  std::span<const double> values() const noexcept { return data_; }
  const double* data() const noexcept { return data_.data(); }
  // Throws if the tensor is tracked by a tape.
  std::span<double> mutable_values();

  double operator[](std::size_t i) const { return data_[i]; }
  double at(std::initializer_list<std::size_t> index) const;
  double item() const;

  bool tracked() const noexcept { return tape_id_ != 0; }
  std::uint64_t tape_id() const noexcept { return tape_id_; }
  std::uint32_t node() const noexcept { return node_; }

  // Copy of the values with no tape association.
  Tensor detach() const&;
  Tensor detach() &&;

  bool all_finite() const noexcept;

 private:
  friend class Tape;

  Shape shape_;
  std::vector<double> data_;
  std::uint64_t tape_id_ = 0;
  std::uint32_t node_ = 0;
};

}  // namespace act

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace phc {

/// n points in R^d, stored row-major. Coordinates are always finite.
class PointCloud {
public:
  PointCloud() = default;
  /// Zero-initialized cloud. Throws parameter_error if n or d is zero.
  PointCloud(std::size_t n, std::size_t d);
  /// Takes ownership of row-major coordinates; validates shape and finiteness.
  PointCloud(std::size_t n, std::size_t d, std::vector<double> coords);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }

  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * d_, d_}; }
  std::span<double> point(std::size_t i) { return {coords_.data() + i * d_, d_}; }
  double& operator()(std::size_t i, std::size_t j) { return coords_[i * d_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return coords_[i * d_ + j]; }

  const std::vector<double>& coords() const noexcept { return coords_; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> coords_;
};

/// Symmetric n x n matrix with zero diagonal and nonnegative entries.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  /// Validates symmetry (exact), zero diagonal and nonnegativity.
  DistanceMatrix(std::size_t n, std::vector<double> entries);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  const std::vector<double>& entries() const noexcept { return entries_; }

private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

DistanceMatrix pairwise_distances(const PointCloud& cloud);

}  // namespace phc

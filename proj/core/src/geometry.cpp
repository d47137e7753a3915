#include "phcollapse/geometry.hpp"

#include <cmath>
#include <string>

#include "phcollapse/error.hpp"

namespace phc {

PointCloud::PointCloud(std::size_t n, std::size_t d) : PointCloud(n, d, std::vector<double>(n * d, 0.0)) {}

PointCloud::PointCloud(std::size_t n, std::size_t d, std::vector<double> coords)
    : n_(n), d_(d), coords_(std::move(coords)) {
  if (n_ == 0 || d_ == 0) throw parameter_error("point cloud needs n >= 1 and d >= 1");
  if (coords_.size() != n_ * d_)
    throw parameter_error("point cloud expects " + std::to_string(n_ * d_) + " coordinates, got " +
                          std::to_string(coords_.size()));
  for (double x : coords_)
    if (!std::isfinite(x)) throw parameter_error("point cloud coordinates must be finite");
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n_ * n_) throw parameter_error("distance matrix must be n x n");
  for (std::size_t i = 0; i < n_; ++i) {
    if (entries_[i * n_ + i] != 0.0) throw parameter_error("distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double a = entries_[i * n_ + j];
      if (a != entries_[j * n_ + i]) throw parameter_error("distance matrix must be symmetric");
      if (!(a >= 0.0) || !std::isfinite(a)) throw parameter_error("distances must be finite and nonnegative");
    }
  }
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return std::sqrt(s);
}

DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n == 0) throw parameter_error("empty point cloud");
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = euclidean_distance(cloud.point(i), cloud.point(j));
      e[i * n + j] = r;
      e[j * n + i] = r;
    }
  return DistanceMatrix(n, std::move(e));
}

}  // namespace phc

#include "regor/features.hpp"

#include "regor/errors.hpp"
#include "regor/spatial_index.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace regor {

FeatureSet::FeatureSet(std::vector<float> values, std::size_t dimension)
    : values_(std::move(values)), dimension_(dimension) {
  if (dimension_ == 0) throw InvalidArgument("feature dimension must be at least 1");
  if (values_.size() % dimension_ != 0) throw InvalidArgument("feature buffer is not N x D");
  for (float v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("feature set contains a non-finite entry");
  }
}

FeatureSet FeatureSet::subset(std::span<const std::uint32_t> indices) const {
  std::vector<float> out;
  out.reserve(indices.size() * dimension_);
  for (auto i : indices) {
    const auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  FeatureSet fs;
  fs.values_ = std::move(out);
  fs.dimension_ = dimension_;
  return fs;
}

void require_matching(const FeatureSet& features, const PointCloud& cloud) {
  if (features.size() != cloud.size()) {
    throw InvalidArgument("feature count " + std::to_string(features.size()) +
                          " does not match cloud size " + std::to_string(cloud.size()));
  }
}

double feature_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DimensionMismatch("feature dimensions differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

Vec3 normal_of(const PointCloud& cloud, std::span<const std::uint32_t> neighbors, const Vec3& p,
               const Vec3& centroid) {
  if (neighbors.size() < 3) return Vec3::Zero();
  Vec3 mean = Vec3::Zero();
  for (auto j : neighbors) mean += cloud[j];
  mean /= static_cast<double>(neighbors.size());
  Mat3 cov = Mat3::Zero();
  for (auto j : neighbors) {
    const Vec3 d = cloud[j] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Vec3 n = eig.eigenvectors().col(0);
  if (n.dot(centroid - p) < 0.0) n = -n;
  return n;
}

std::size_t bin_of(double value, double lo, double hi) {
  const double scaled = (value - lo) / (hi - lo) * static_cast<double>(kDescriptorBins);
  const auto b = static_cast<long>(std::floor(scaled));
  return static_cast<std::size_t>(std::clamp<long>(b, 0, kDescriptorBins - 1));
}

void describe_point(const PointCloud& cloud, const std::vector<Vec3>& normals,
                    std::span<const std::uint32_t> neighbors, std::uint32_t self, float* out) {
  std::fill(out, out + kDescriptorDimension, 0.0f);
  if (neighbors.size() < 6) return;  // self + fewer than 5 neighbors
  const Vec3& p = cloud[self];
  const Vec3& u = normals[self];
  if (u.isZero()) return;
  std::array<double, kDescriptorDimension> hist{};
  std::size_t count = 0;
  for (auto j : neighbors) {
    if (j == self || normals[j].isZero()) continue;
    Vec3 d = cloud[j] - p;
    const double dist = d.norm();
    if (dist == 0.0) continue;
    d /= dist;
    Vec3 v = d.cross(u);
    const double vn = v.norm();
    if (vn == 0.0) continue;
    v /= vn;
    const Vec3 w = u.cross(v);
    const Vec3& nq = normals[j];
    const double alpha = v.dot(nq);
    const double phi = u.dot(d);
    const double theta = std::atan2(w.dot(nq), u.dot(nq));
    hist[bin_of(alpha, -1.0, 1.0)] += 1.0;
    hist[kDescriptorBins + bin_of(phi, -1.0, 1.0)] += 1.0;
    hist[2 * kDescriptorBins + bin_of(theta, -std::numbers::pi, std::numbers::pi)] += 1.0;
    ++count;
  }
  if (count < 5) return;
  const double norm = 3.0 * static_cast<double>(count);
  for (std::size_t b = 0; b < kDescriptorDimension; ++b) out[b] = static_cast<float>(hist[b] / norm);
}

void check_descriptor_input(const PointCloud& cloud, double support_radius) {
  if (cloud.size() < 10) throw TooFewPoints("descriptor needs at least 10 points");
  if (!(support_radius > 0.0)) throw InvalidArgument("support radius must be positive");
}

}  // namespace

std::vector<Vec3> estimate_normals(const PointCloud& cloud, double support_radius) {
  if (!(support_radius > 0.0)) throw InvalidArgument("support radius must be positive");
  const SpatialIndex index(cloud);
  const Vec3 centroid = cloud.centroid();
  std::vector<Vec3> normals(cloud.size());
  const auto n = static_cast<std::int64_t>(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto nbrs = index.radius_neighbors(cloud[i], support_radius);
    normals[i] = normal_of(cloud, nbrs, cloud[i], centroid);
  }
  return normals;
}

FeatureSet compute_weak_descriptor(const PointCloud& cloud, double support_radius) {
  check_descriptor_input(cloud, support_radius);
  const SpatialIndex index(cloud);
  const Vec3 centroid = cloud.centroid();
  const auto n = static_cast<std::int64_t>(cloud.size());
  std::vector<std::vector<std::uint32_t>> neighborhoods(cloud.size());
  std::vector<Vec3> normals(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    neighborhoods[i] = index.radius_neighbors(cloud[i], support_radius);
    normals[i] = normal_of(cloud, neighborhoods[i], cloud[i], centroid);
  }
  std::vector<float> values(cloud.size() * kDescriptorDimension);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    describe_point(cloud, normals, neighborhoods[i], static_cast<std::uint32_t>(i),
                   values.data() + i * kDescriptorDimension);
  }
  return FeatureSet(std::move(values), kDescriptorDimension);
}

namespace serial {

FeatureSet compute_weak_descriptor(const PointCloud& cloud, double support_radius) {
  check_descriptor_input(cloud, support_radius);
  const Vec3 centroid = cloud.centroid();
  const double r_sq = support_radius * support_radius;
  std::vector<std::vector<std::uint32_t>> neighborhoods(cloud.size());
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    for (std::uint32_t j = 0; j < cloud.size(); ++j) {
      if ((cloud[j] - cloud[i]).squaredNorm() <= r_sq) neighborhoods[i].push_back(j);
    }
  }
  std::vector<Vec3> normals(cloud.size());
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    normals[i] = normal_of(cloud, neighborhoods[i], cloud[i], centroid);
  }
  std::vector<float> values(cloud.size() * kDescriptorDimension);
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    describe_point(cloud, normals, neighborhoods[i], i, values.data() + i * kDescriptorDimension);
  }
  return FeatureSet(std::move(values), kDescriptorDimension);
}

}  // namespace serial

namespace {

static_assert(std::endian::native == std::endian::little, "feature I/O assumes a little-endian host");

template <typename T>
void read_raw(std::istream& in, T& value, const std::filesystem::path& path) {
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError("truncated feature file " + path.string());
  }
}

}  // namespace

FeatureSet read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  read_raw(in, n, path);
  read_raw(in, d, path);
  if (d == 0) throw ParseError("feature file " + path.string() + " declares dimension 0");
  std::vector<float> values(static_cast<std::size_t>(n) * d);
  if (!values.empty() &&
      !in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(float)))) {
    throw ParseError("truncated feature file " + path.string());
  }
  try {
    return FeatureSet(std::move(values), d);
  } catch (const InvalidArgument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_feature_file(const std::filesystem::path& path, const FeatureSet& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature file " + path.string());
  const auto n = static_cast<std::uint32_t>(features.size());
  const auto d = static_cast<std::uint32_t>(features.dimension());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  const auto values = features.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw IoError("failed writing feature file " + path.string());
}

}  // namespace regor

#include "regor/consistency.hpp"

#include "regor/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace regor {

void ConsistencyParams::validate() const {
  if (!(sigma > 0.0)) throw InvalidConfig("sigma must be positive");
  if (!(sigma_d > 0.0)) throw InvalidConfig("sigma_d must be positive");
  if (!(a > 0.0 && a < 1.0)) throw InvalidConfig("a must lie in (0, 1)");
}

std::uint64_t ConsistencyMatrix::row_sum(std::size_t j) const {
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < n_; ++k) s += values_[j * n_ + k];
  return s;
}

std::uint64_t ConsistencyMatrix::column_sum(std::size_t k) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += values_[j * n_ + k];
  return s;
}

std::uint64_t ConsistencyMatrix::max_column_sum() const {
  std::vector<std::uint64_t> sums(n_, 0);
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t k = 0; k < n_; ++k) sums[k] += values_[j * n_ + k];
  }
  return sums.empty() ? 0 : *std::max_element(sums.begin(), sums.end());
}

bool pairwise_consistency(const PositionedPair& gi, const PositionedPair& gj, double sigma) {
  const double dp = (gi.source - gj.source).norm();
  const double dq = (gi.target - gj.target).norm();
  return std::abs(dp - dq) <= sigma;
}

bool ctc_score(const PositionedPair& gj, const PositionedPair& gk, const PositionedPair& center,
               const ConsistencyParams& params) {
  return (pairwise_consistency(gj, center, params.sigma) &&
          pairwise_consistency(center, gk, params.sigma)) ||
         pairwise_consistency(gj, gk, params.sigma / 2.0);
}

namespace {

// Packed rows of the first-order relation, used by the second-order kernel.
struct BitRows {
  std::size_t words = 0;
  std::vector<std::uint64_t> bits;

  bool test(std::size_t j, std::size_t k) const { return (bits[j * words + k / 64] >> (k % 64)) & 1u; }
};

BitRows first_order_bits(std::span<const PositionedPair> set, double sigma) {
  const std::size_t n = set.size();
  BitRows rows{(n + 63) / 64, {}};
  rows.bits.assign(n * rows.words, 0);
  const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t j = 0; j < sn; ++j) {
    std::uint64_t* row = rows.bits.data() + j * rows.words;
    for (std::size_t k = 0; k < n; ++k) {
      if (pairwise_consistency(set[j], set[k], sigma)) row[k / 64] |= std::uint64_t{1} << (k % 64);
    }
  }
  return rows;
}

}  // namespace

ConsistencyMatrix first_order_matrix(std::span<const PositionedPair> set, double sigma) {
  const std::size_t n = set.size();
  ConsistencyMatrix s(n);
  const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t j = 0; j < sn; ++j) {
    for (std::size_t k = 0; k < n; ++k) s(j, k) = pairwise_consistency(set[j], set[k], sigma) ? 1 : 0;
  }
  for (std::size_t j = 0; j < n; ++j) s(j, j) = 1;
  return s;
}

ConsistencyMatrix ctc_matrix(std::span<const PositionedPair> set, const PositionedPair& center,
                             const ConsistencyParams& params) {
  const std::size_t n = set.size();
  ConsistencyMatrix s(n);
  // The center term factorizes: precompute s_sigma(g_j, center) once per row.
  std::vector<char> with_center(n);
  for (std::size_t j = 0; j < n; ++j) with_center[j] = pairwise_consistency(set[j], center, params.sigma);
  const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t j = 0; j < sn; ++j) {
    for (std::size_t k = static_cast<std::size_t>(j); k < n; ++k) {
      const bool v = (with_center[j] && with_center[k]) ||
                     pairwise_consistency(set[j], set[k], params.sigma / 2.0);
      s(j, k) = v ? 1 : 0;
      s(k, j) = v ? 1 : 0;
    }
  }
  for (std::size_t j = 0; j < n; ++j) s(j, j) = 1;
  return s;
}

ConsistencyMatrix second_order_matrix(std::span<const PositionedPair> set, double sigma) {
  const std::size_t n = set.size();
  const BitRows rows = first_order_bits(set, sigma);
  ConsistencyMatrix s(n);
  const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t j = 0; j < sn; ++j) {
    const std::uint64_t* rj = rows.bits.data() + j * rows.words;
    for (std::size_t k = static_cast<std::size_t>(j) + 1; k < n; ++k) {
      if (!rows.test(j, k)) continue;
      const std::uint64_t* rk = rows.bits.data() + k * rows.words;
      std::uint32_t common = 0;
      for (std::size_t w = 0; w < rows.words; ++w) common += std::popcount(rj[w] & rk[w]);
      s(j, k) = common;
      s(k, j) = common;
    }
  }
  for (std::size_t j = 0; j < n; ++j) s(j, j) = 1;
  return s;
}

double local_score(const ConsistencyMatrix& s, double a) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("a must lie in (0, 1)");
  if (s.size() == 0) return 0.0;
  return static_cast<double>(s.max_column_sum()) / (a * static_cast<double>(s.size()));
}

std::vector<std::uint32_t> select_top_consistent(const ConsistencyMatrix& s, std::size_t count) {
  if (count < 3) throw InvalidArgument("select_top_consistent needs count >= 3");
  std::vector<std::uint64_t> sums(s.size());
  std::vector<std::uint32_t> candidates;
  for (std::size_t j = 0; j < s.size(); ++j) {
    sums[j] = s.row_sum(j);
    if (sums[j] > 1) candidates.push_back(static_cast<std::uint32_t>(j));
  }
  if (candidates.size() < 3) {
    throw TooFewConsistent(std::to_string(candidates.size()) + " correspondences have mutual support");
  }
  const std::size_t take = std::min(count, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), [&](std::uint32_t x, std::uint32_t y) {
                      return sums[x] > sums[y] || (sums[x] == sums[y] && x < y);
                    });
  candidates.resize(take);
  return candidates;
}

std::size_t top_consistent_count(std::size_t n, double fraction) {
  const auto scaled = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::max<std::size_t>(3, scaled);
}

LocalConsistency parse_local_consistency(std::string_view name) {
  if (name == "sc") return LocalConsistency::kPairwise;
  if (name == "ctc") return LocalConsistency::kCenterAware;
  throw InvalidConfig("unknown consistency mode '" + std::string(name) + "' (expected sc|ctc)");
}

std::string_view to_string(LocalConsistency mode) {
  return mode == LocalConsistency::kPairwise ? "sc" : "ctc";
}

namespace serial {

ConsistencyMatrix ctc_matrix(std::span<const PositionedPair> set, const PositionedPair& center,
                             const ConsistencyParams& params) {
  ConsistencyMatrix s(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    for (std::size_t k = 0; k < set.size(); ++k) s(j, k) = ctc_score(set[j], set[k], center, params) ? 1 : 0;
  }
  for (std::size_t j = 0; j < set.size(); ++j) s(j, j) = 1;
  return s;
}

ConsistencyMatrix second_order_matrix(std::span<const PositionedPair> set, double sigma) {
  const std::size_t n = set.size();
  std::vector<char> first(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) first[j * n + k] = pairwise_consistency(set[j], set[k], sigma);
  }
  ConsistencyMatrix s(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k) {
        s(j, k) = 1;
        continue;
      }
      if (!first[j * n + k]) continue;
      std::uint32_t common = 0;
      for (std::size_t m = 0; m < n; ++m) common += first[j * n + m] && first[m * n + k];
      s(j, k) = common;
    }
  }
  return s;
}

}  // namespace serial

}  // namespace regor

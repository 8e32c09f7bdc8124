#pragma once

#include "regor/types.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace regor {

struct ConsistencyParams {
  double sigma = 0.1;    ///< distance-difference tolerance (m)
  double sigma_d = 0.1;  ///< correction radius (m)
  double a = 0.5;        ///< inlier-ratio threshold in (0, 1)

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

/// Symmetric N x N score matrix with unit diagonal. Entries are 0/1 for the
/// first-order and center-aware measures, counts for second-order.
class ConsistencyMatrix {
 public:
  explicit ConsistencyMatrix(std::size_t n) : n_(n), values_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  std::uint32_t operator()(std::size_t j, std::size_t k) const { return values_[j * n_ + k]; }
  std::uint32_t& operator()(std::size_t j, std::size_t k) { return values_[j * n_ + k]; }

  std::uint64_t row_sum(std::size_t j) const;
  std::uint64_t column_sum(std::size_t k) const;
  /// Matrix 1-norm: the largest absolute column sum.
  std::uint64_t max_column_sum() const;

  friend bool operator==(const ConsistencyMatrix&, const ConsistencyMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint32_t> values_;
};

/// 1 iff | |p_i - p_j| - |q_i - q_j| | <= sigma.
bool pairwise_consistency(const PositionedPair& gi, const PositionedPair& gj, double sigma);

/// Center-aware three-point test: (s_sigma(g_j, c) AND s_sigma(c, g_k)) OR s_{sigma/2}(g_j, g_k).
bool ctc_score(const PositionedPair& gj, const PositionedPair& gk, const PositionedPair& center,
               const ConsistencyParams& params);

/// First-order matrix [s_sigma(g_j, g_k)].
ConsistencyMatrix first_order_matrix(std::span<const PositionedPair> set, double sigma);

ConsistencyMatrix ctc_matrix(std::span<const PositionedPair> set, const PositionedPair& center,
                             const ConsistencyParams& params);

/// SC2(j,k) = s(j,k) * sum_m s(j,m) s(m,k); diagonal pinned to 1.
ConsistencyMatrix second_order_matrix(std::span<const PositionedPair> set, double sigma);

/// |S|_1 / (a N) with |S|_1 the maximum column sum.
double local_score(const ConsistencyMatrix& s, double a);

/// Indices of the `count` rows with the highest row sums among rows whose sum
/// exceeds 1 (ties: smallest index). Throws TooFewConsistent if fewer than 3
/// rows qualify, InvalidArgument if count < 3.
std::vector<std::uint32_t> select_top_consistent(const ConsistencyMatrix& s, std::size_t count);

/// max(3, ceil(fraction * n)).
std::size_t top_consistent_count(std::size_t n, double fraction);

/// Local scoring measure used by the ablation switch.
enum class LocalConsistency { kPairwise, kCenterAware };

LocalConsistency parse_local_consistency(std::string_view name);
std::string_view to_string(LocalConsistency mode);

namespace serial {
ConsistencyMatrix ctc_matrix(std::span<const PositionedPair> set, const PositionedPair& center,
                             const ConsistencyParams& params);
ConsistencyMatrix second_order_matrix(std::span<const PositionedPair> set, double sigma);
}  // namespace serial

}  // namespace regor

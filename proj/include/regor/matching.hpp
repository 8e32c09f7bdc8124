#pragma once

#include "regor/features.hpp"
#include "regor/types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace regor {

/// Sparse boolean relation over (source row, target column), shape rows x cols.
/// Each row holds its true columns in ascending order.
class MatchMatrix {
 public:
  MatchMatrix(std::size_t rows, std::size_t cols) : cols_(cols), entries_(rows) {}

  std::size_t rows() const noexcept { return entries_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<std::uint32_t>& row(std::size_t m) const { return entries_[m]; }
  std::vector<std::uint32_t>& row(std::size_t m) { return entries_[m]; }
  bool contains(std::size_t m, std::uint32_t n) const;
  std::size_t count() const;

 private:
  std::size_t cols_;
  std::vector<std::vector<std::uint32_t>> entries_;
};

/// Feature-space nearest target of every source row (ties: smallest index).
MatchMatrix nn_match(const FeatureSet& src, const FeatureSet& dst);

/// The k feature-nearest targets of every source row, k clipped to |dst|.
/// Rank 1 (the strict nearest) is included.
MatchMatrix mnn_match(const FeatureSet& src, const FeatureSet& dst, std::size_t k);

/// Strict mutual nearest neighbours.
CorrespondenceSet mutual_match(const FeatureSet& p, const FeatureSet& q);

/// Relaxed reciprocity: keep (m, n) when n is m's nearest and m is among n's k
/// nearest, or m is n's nearest and n is among m's k nearest. All matrices are
/// oriented source-rows x target-columns; Q->P relations are transposed.
CorrespondenceSet generalized_mutual_match(const FeatureSet& p, const FeatureSet& q, std::size_t k);

enum class MatchingMode { kNearest, kMutual, kGeneralizedMutual };

MatchingMode parse_matching_mode(std::string_view name);
std::string_view to_string(MatchingMode mode);

/// Dispatches on the ablation switch. `k` only matters for GMM.
CorrespondenceSet match_features(const FeatureSet& p, const FeatureSet& q, MatchingMode mode,
                                 std::size_t k);

namespace serial {
MatchMatrix nn_match(const FeatureSet& src, const FeatureSet& dst);
MatchMatrix mnn_match(const FeatureSet& src, const FeatureSet& dst, std::size_t k);
}  // namespace serial

}  // namespace regor

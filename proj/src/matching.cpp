#include "regor/matching.hpp"

#include "regor/errors.hpp"

#include <algorithm>
#include <string>

namespace regor {

bool MatchMatrix::contains(std::size_t m, std::uint32_t n) const {
  const auto& r = entries_[m];
  return std::binary_search(r.begin(), r.end(), n);
}

std::size_t MatchMatrix::count() const {
  std::size_t total = 0;
  for (const auto& r : entries_) total += r.size();
  return total;
}

namespace {

void check_inputs(const FeatureSet& a, const FeatureSet& b) {
  if (a.empty() || b.empty()) throw EmptySet("feature matching needs two non-empty sets");
  if (a.dimension() != b.dimension()) throw DimensionMismatch("feature dimensions differ");
}

// Row-major |a| x |b| table of feature distances; both matching directions
// read the same values so their tie-breaking agrees.
std::vector<double> distance_table(const FeatureSet& a, const FeatureSet& b, bool parallel) {
  const auto rows = static_cast<std::int64_t>(a.size());
  const std::size_t cols = b.size();
  std::vector<double> table(a.size() * cols);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t m = 0; m < rows; ++m) {
    for (std::size_t n = 0; n < cols; ++n) table[m * cols + n] = feature_distance(a.row(m), b.row(n));
  }
  return table;
}

// k smallest of `count` values read through `at`, ordered by (distance, index).
template <typename At>
std::vector<std::uint32_t> smallest_k(std::size_t count, std::size_t k, At at) {
  std::vector<std::uint32_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = static_cast<std::uint32_t>(i);
  const auto less = [&](std::uint32_t x, std::uint32_t y) {
    const double dx = at(x);
    const double dy = at(y);
    return dx < dy || (dx == dy && x < y);
  };
  k = std::min(k, count);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), less);
  idx.resize(k);
  return idx;
}

// Per-row k-nearest lists in rank order, in both directions.
struct KnnTables {
  std::vector<std::vector<std::uint32_t>> forward;   // p row -> q ranks
  std::vector<std::vector<std::uint32_t>> backward;  // q row -> p ranks
};

KnnTables knn_tables(const FeatureSet& p, const FeatureSet& q, std::size_t k, bool parallel) {
  const auto table = distance_table(p, q, parallel);
  const std::size_t np = p.size();
  const std::size_t nq = q.size();
  KnnTables out{std::vector<std::vector<std::uint32_t>>(np), std::vector<std::vector<std::uint32_t>>(nq)};
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t m = 0; m < static_cast<std::int64_t>(np); ++m) {
    out.forward[m] = smallest_k(nq, k, [&](std::uint32_t n) { return table[m * nq + n]; });
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t n = 0; n < static_cast<std::int64_t>(nq); ++n) {
    out.backward[n] = smallest_k(np, k, [&](std::uint32_t m) { return table[m * nq + n]; });
  }
  return out;
}

MatchMatrix to_matrix(std::vector<std::vector<std::uint32_t>> ranks, std::size_t cols) {
  MatchMatrix out(ranks.size(), cols);
  for (std::size_t m = 0; m < ranks.size(); ++m) {
    std::sort(ranks[m].begin(), ranks[m].end());
    out.row(m) = std::move(ranks[m]);
  }
  return out;
}

MatchMatrix knn_matrix(const FeatureSet& src, const FeatureSet& dst, std::size_t k, bool parallel) {
  check_inputs(src, dst);
  if (k == 0) throw InvalidArgument("k must be at least 1");
  const auto table = distance_table(src, dst, parallel);
  const std::size_t cols = dst.size();
  std::vector<std::vector<std::uint32_t>> ranks(src.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t m = 0; m < static_cast<std::int64_t>(src.size()); ++m) {
    ranks[m] = smallest_k(cols, k, [&](std::uint32_t n) { return table[m * cols + n]; });
  }
  return to_matrix(std::move(ranks), cols);
}

bool ranked_within(const std::vector<std::uint32_t>& ranks, std::uint32_t value) {
  return std::find(ranks.begin(), ranks.end(), value) != ranks.end();
}

}  // namespace

MatchMatrix nn_match(const FeatureSet& src, const FeatureSet& dst) { return knn_matrix(src, dst, 1, true); }

MatchMatrix mnn_match(const FeatureSet& src, const FeatureSet& dst, std::size_t k) {
  return knn_matrix(src, dst, k, true);
}

CorrespondenceSet mutual_match(const FeatureSet& p, const FeatureSet& q) {
  check_inputs(p, q);
  const auto knn = knn_tables(p, q, 1, true);
  std::vector<Correspondence> out;
  for (std::uint32_t m = 0; m < p.size(); ++m) {
    const std::uint32_t n = knn.forward[m].front();
    if (knn.backward[n].front() == m) out.push_back({m, n});
  }
  return CorrespondenceSet(std::move(out));
}

CorrespondenceSet generalized_mutual_match(const FeatureSet& p, const FeatureSet& q, std::size_t k) {
  check_inputs(p, q);
  if (k == 0) throw InvalidArgument("k must be at least 1");
  const auto knn = knn_tables(p, q, k, true);
  std::vector<Correspondence> out;
  // M1(P->Q) AND transpose(M2(Q->P)): n is m's nearest, m within n's top-k.
  for (std::uint32_t m = 0; m < p.size(); ++m) {
    const std::uint32_t n = knn.forward[m].front();
    if (ranked_within(knn.backward[n], m)) out.push_back({m, n});
  }
  // transpose(M1(Q->P)) AND M2(P->Q): m is n's nearest, n within m's top-k.
  for (std::uint32_t n = 0; n < q.size(); ++n) {
    const std::uint32_t m = knn.backward[n].front();
    if (ranked_within(knn.forward[m], n)) out.push_back({m, n});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return CorrespondenceSet(std::move(out));
}

MatchingMode parse_matching_mode(std::string_view name) {
  if (name == "nn") return MatchingMode::kNearest;
  if (name == "mm") return MatchingMode::kMutual;
  if (name == "gmm") return MatchingMode::kGeneralizedMutual;
  throw InvalidConfig("unknown matching mode '" + std::string(name) + "' (expected nn|mm|gmm)");
}

std::string_view to_string(MatchingMode mode) {
  switch (mode) {
    case MatchingMode::kNearest: return "nn";
    case MatchingMode::kMutual: return "mm";
    case MatchingMode::kGeneralizedMutual: return "gmm";
  }
  return "gmm";
}

CorrespondenceSet match_features(const FeatureSet& p, const FeatureSet& q, MatchingMode mode,
                                 std::size_t k) {
  switch (mode) {
    case MatchingMode::kNearest: {
      const auto nn = nn_match(p, q);
      std::vector<Correspondence> out;
      out.reserve(nn.rows());
      for (std::uint32_t m = 0; m < nn.rows(); ++m) out.push_back({m, nn.row(m).front()});
      return CorrespondenceSet(std::move(out));
    }
    case MatchingMode::kMutual: return mutual_match(p, q);
    case MatchingMode::kGeneralizedMutual: return generalized_mutual_match(p, q, k);
  }
  return {};
}

namespace serial {

MatchMatrix nn_match(const FeatureSet& src, const FeatureSet& dst) { return knn_matrix(src, dst, 1, false); }

MatchMatrix mnn_match(const FeatureSet& src, const FeatureSet& dst, std::size_t k) {
  return knn_matrix(src, dst, k, false);
}

}  // namespace serial

}  // namespace regor

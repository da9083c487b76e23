#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvgad/matrix.hpp"
#include "mvgad/spectral.hpp"

namespace mvgad::fusion {

// One data source: m samples by d_k features, rows aligned across views.
struct ViewFeatureSpace {
  std::string view_id;
  DenseMatrix x;
};

// Column-wise concatenation of every view; view j occupies columns
// [view_boundaries[j], view_boundaries[j + 1]).
struct FullFeatureSpace {
  DenseMatrix x;
  std::vector<std::size_t> view_boundaries;

  DenseMatrix slice(std::size_t view) const;
};

FullFeatureSpace build_full_space(const std::vector<ViewFeatureSpace>& views);

struct MembershipMatrix {
  DenseMatrix mu;  // m x k, rows sum to 1
  std::string source;
};

inline constexpr double kMembershipEpsilon = 1e-12;

// Soft membership from inverse squared distance to each centroid.
MembershipMatrix membership(const spectral::ClusterAssignment& assignment,
                            const DenseMatrix& y, std::string source = {});

// M[i][j] = sum_c mu(i,c) mu(j,c). Invariant to relabeling the clusters,
// bit for bit.
DenseMatrix co_membership(const MembershipMatrix& mu);

enum class ScoreMode { vs_full, pairwise };

struct ConsistencyScore {
  std::vector<double> scores;
  ScoreMode mode = ScoreMode::vs_full;
};

// vs_full: mean over views of the average |M_full[i][j] - M_view[i][j]|
// over j != i. pairwise: the same against every other view instead of the
// full space.
ConsistencyScore consistency_score(const std::vector<MembershipMatrix>& views,
                                   const MembershipMatrix& full, ScoreMode mode);

struct FusionSettings {
  std::size_t k = 2;
  spectral::Algorithm algorithm = spectral::Algorithm::basic;
  std::optional<double> sigma;
  ScoreMode mode = ScoreMode::vs_full;
  std::uint64_t seed = 0;
};

struct FusionResult {
  FullFeatureSpace full;
  std::vector<spectral::ClusterAssignment> view_assignments;
  spectral::ClusterAssignment full_assignment;
  ConsistencyScore score;
};

// Spectral-clusters every view and the full space with one shared k, turns
// each clustering into memberships over its own embedding, and scores the
// cross-view disagreement.
FusionResult score_views(const std::vector<ViewFeatureSpace>& views,
                         const FusionSettings& settings);

std::string_view to_string(ScoreMode mode);
std::optional<ScoreMode> parse_score_mode(std::string_view name);

}  // namespace mvgad::fusion

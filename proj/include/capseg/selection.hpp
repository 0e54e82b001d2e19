#pragma once

#include <filesystem>
#include <vector>

#include "capseg/matrix.hpp"

namespace capseg {

struct ScorerParams {
  int k_neighbors = 5;
  double heat_t = 0.0;  // <= 0 selects the mean squared k-NN distance
  int keep = 20;
  // Rows beyond this are thinned with a fixed stride before scoring, which
  // bounds the O(n^2) neighbour search.
  std::size_t max_samples = 4000;
};

struct FeatureRanking {
  std::vector<double> scores;
  std::vector<int> selected;  // ascending score, ties by lower index
};

void validate(const ScorerParams& params);

/// Laplacian score of every column (lower preserves locality better).
/// Columns are standardised first; constant columns score +infinity.
std::vector<double> laplacian_scores(const Matrix& samples, const ScorerParams& params);

FeatureRanking select_features(const std::vector<double>& scores, int keep);

/// CSV `feature_index,score,selected`.
void write_ranking_csv(const std::filesystem::path& path, const FeatureRanking& ranking);

}  // namespace capseg

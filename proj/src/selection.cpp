#include "capseg/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "capseg/error.hpp"

namespace capseg {

void validate(const ScorerParams& params) {
  if (params.k_neighbors < 1) throw Error(Errc::InvalidParam, "k_neighbors must be >= 1");
  if (params.keep < 1) throw Error(Errc::InvalidParam, "keep must be >= 1");
}

std::vector<double> laplacian_scores(const Matrix& input, const ScorerParams& params) {
  validate(params);
  const std::size_t k = static_cast<std::size_t>(params.k_neighbors);

  // Stride-thin oversized inputs.
  Matrix samples;
  if (params.max_samples > 0 && input.rows() > params.max_samples) {
    const double step = static_cast<double>(input.rows()) / params.max_samples;
    for (std::size_t i = 0; i < params.max_samples; ++i) {
      samples.append_row(input.row(static_cast<std::size_t>(i * step)));
    }
  } else {
    samples = input;
  }
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  if (n < k + 1) {
    throw Error(Errc::TooFewSamples, "need at least k_neighbors + 1 rows");
  }

  // Standardise columns; constant columns become zero and score +inf.
  Matrix z(n, d);
  std::vector<bool> constant(d, false);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += samples(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (samples(r, c) - mean) * (samples(r, c) - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      constant[c] = true;
      continue;
    }
    for (std::size_t r = 0; r < n; ++r) z(r, c) = (samples(r, c) - mean) / sd;
  }

  // k nearest neighbours of every row, ties to the lower index.
  std::vector<std::vector<std::pair<double, std::size_t>>> knn(n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = z(i, c) - z(j, c);
        s += diff * diff;
      }
      dist[j] = {j == i ? std::numeric_limits<double>::infinity() : s, j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    knn[i].assign(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
  }

  double t = params.heat_t;
  if (t <= 0) {
    double total = 0.0;
    for (const auto& row : knn) {
      for (const auto& [d2, j] : row) total += d2;
    }
    t = total / static_cast<double>(n * k);
    if (!(t > 0)) t = 1.0;
  }

  // Symmetric edge set: i~j if either is among the other's neighbours.
  std::map<std::pair<std::size_t, std::size_t>, double> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [d2, j] : knn[i]) {
      edges[{std::min(i, j), std::max(i, j)}] = std::exp(-d2 / t);
    }
  }
  std::vector<double> degree(n, 0.0);
  double weight_sum = 0.0;
  for (const auto& [e, wt] : edges) {
    degree[e.first] += wt;
    degree[e.second] += wt;
    weight_sum += wt;
  }
  if (!(weight_sum > 0)) throw Error(Errc::DegenerateGraph, "all affinity weights are zero");
  const double volume = std::accumulate(degree.begin(), degree.end(), 0.0);

  std::vector<double> scores(d, std::numeric_limits<double>::infinity());
  std::vector<double> f(n);
  for (std::size_t c = 0; c < d; ++c) {
    if (constant[c]) continue;
    double weighted_mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) weighted_mean += z(r, c) * degree[r];
    weighted_mean /= volume;
    for (std::size_t r = 0; r < n; ++r) f[r] = z(r, c) - weighted_mean;

    double smoothness = 0.0;  // f' L f
    for (const auto& [e, wt] : edges) {
      const double diff = f[e.first] - f[e.second];
      smoothness += wt * diff * diff;
    }
    double spread = 0.0;  // f' D f
    for (std::size_t r = 0; r < n; ++r) spread += degree[r] * f[r] * f[r];
    if (spread > 0) scores[c] = smoothness / spread;
  }
  return scores;
}

FeatureRanking select_features(const std::vector<double>& scores, int keep) {
  if (keep < 1 || static_cast<std::size_t>(keep) > scores.size()) {
    throw Error(Errc::InvalidParam, "keep must lie in [1, " + std::to_string(scores.size()) + "]");
  }
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(keep));
  return {scores, order};
}

void write_ranking_csv(const std::filesystem::path& path, const FeatureRanking& ranking) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << "feature_index,score,selected\n";
  for (std::size_t i = 0; i < ranking.scores.size(); ++i) {
    const bool chosen = std::find(ranking.selected.begin(), ranking.selected.end(),
                                  static_cast<int>(i)) != ranking.selected.end();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", ranking.scores[i]);
    out << i << ',' << buf << ',' << (chosen ? 1 : 0) << '\n';
  }
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

}  // namespace capseg

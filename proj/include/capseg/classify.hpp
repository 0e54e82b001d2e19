#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "capseg/matrix.hpp"

namespace capseg {

enum class KernelType { Linear, Rbf };

std::string_view to_string(KernelType kernel);
KernelType parse_kernel(std::string_view text);

struct SvmParams {
  KernelType kernel = KernelType::Rbf;
  double C = 1.0;
  double gamma = 0.0;  // <= 0 means 1 / d
  double tol = 1e-3;
  long max_iter = 10'000'000;
};

void validate(const SvmParams& params);

struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Self-contained binary classifier: picks its input columns, standardises
/// them and evaluates f(x) = sum_i coef_i K(sv_i, x) + bias.
struct SvmModel {
  KernelType kernel = KernelType::Rbf;
  double C = 1.0;
  double gamma = 0.0;  // resolved value, never "auto"
  double tol = 1e-3;
  int input_dim = 0;            // width of rows passed to predict
  std::vector<int> selected;    // columns of those rows fed to the kernel
  FeatureScaler scaler;         // per selected column
  Matrix support_vectors;       // standardised, M x d
  std::vector<double> dual_coefs;  // alpha_i * y_i
  double bias = 0.0;
  int trained_for = 0;          // superpixel count the model belongs to
  bool converged = true;

  std::size_t dimension() const noexcept { return selected.size(); }

  /// Decision value for one full-width row.
  double decision(std::span<const double> row) const;
};

struct SvmTraining {
  SvmModel model;
  std::vector<double> alpha;  // one per training row, in [0, C]
  long iterations = 0;
};

/// SMO on the dual with maximal-violating-pair / second-order working set
/// selection, stopping once the violation gap falls below `tol`.
/// Labels are 0/1; `selected` empty means all columns.
SvmTraining svm_train_detailed(const Matrix& samples, std::span<const std::uint8_t> labels,
                               const SvmParams& params, std::vector<int> selected = {},
                               int trained_for = 0);

SvmModel svm_train(const Matrix& samples, std::span<const std::uint8_t> labels,
                   const SvmParams& params, std::vector<int> selected = {}, int trained_for = 0);

struct SvmPrediction {
  std::vector<std::uint8_t> labels;
  std::vector<double> decision;
};

SvmPrediction svm_predict(const SvmModel& model, const Matrix& samples);

void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);

/// Text form used by save_model; exposed for in-memory round trips.
std::string serialize_model(const SvmModel& model);
SvmModel deserialize_model(std::string_view text);

}  // namespace capseg

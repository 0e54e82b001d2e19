#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <string>
#include <unordered_map>

#include "capseg/classify.hpp"
#include "capseg/error.hpp"

namespace capseg {

std::string_view to_string(KernelType kernel) {
  return kernel == KernelType::Linear ? "linear" : "rbf";
}

KernelType parse_kernel(std::string_view text) {
  if (text == "linear") return KernelType::Linear;
  if (text == "rbf") return KernelType::Rbf;
  throw Error(Errc::InvalidParam, "unknown kernel '" + std::string(text) + "'");
}

void validate(const SvmParams& params) {
  if (!(params.C > 0)) throw Error(Errc::InvalidParam, "C must be > 0");
  if (!(params.tol > 0)) throw Error(Errc::InvalidParam, "tol must be > 0");
  if (params.max_iter < 1) throw Error(Errc::InvalidParam, "max_iter must be >= 1");
}

namespace {

double kernel_value(KernelType kernel, double gamma, std::span<const double> a,
                    std::span<const double> b) {
  if (kernel == KernelType::Linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

// Kernel rows of the training set, least recently used evicted first.
class KernelCache {
 public:
  KernelCache(const Matrix& x, KernelType kernel, double gamma, std::size_t budget_bytes)
      : x_(x), kernel_(kernel), gamma_(gamma) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.rows() * sizeof(double));
    capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      rows_.splice(rows_.begin(), rows_, it->second);
      return it->second->second;
    }
    std::vector<double> values;
    if (rows_.size() >= capacity_) {
      values = std::move(rows_.back().second);
      index_.erase(rows_.back().first);
      rows_.pop_back();
    }
    values.resize(x_.rows());
    for (std::size_t j = 0; j < x_.rows(); ++j) {
      values[j] = kernel_value(kernel_, gamma_, x_.row(i), x_.row(j));
    }
    rows_.emplace_front(i, std::move(values));
    index_[i] = rows_.begin();
    return rows_.front().second;
  }

 private:
  const Matrix& x_;
  KernelType kernel_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::pair<std::size_t, std::vector<double>>> rows_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, std::vector<double>>>::iterator>
      index_;
};

constexpr double kTau = 1e-12;
constexpr std::size_t kCacheBytes = std::size_t{256} << 20;

}  // namespace

double SvmModel::decision(std::span<const double> row) const {
  if (static_cast<int>(row.size()) != input_dim) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(input_dim) +
                                             " columns, got " + std::to_string(row.size()));
  }
  std::vector<double> x(selected.size());
  for (std::size_t c = 0; c < selected.size(); ++c) {
    x[c] = (row[static_cast<std::size_t>(selected[c])] - scaler.mean[c]) / scaler.stddev[c];
  }
  double f = bias;
  for (std::size_t i = 0; i < dual_coefs.size(); ++i) {
    f += dual_coefs[i] * kernel_value(kernel, gamma, support_vectors.row(i), x);
  }
  return f;
}

SvmTraining svm_train_detailed(const Matrix& samples, std::span<const std::uint8_t> labels,
                               const SvmParams& params, std::vector<int> selected,
                               int trained_for) {
  validate(params);
  const std::size_t n = samples.rows();
  if (labels.size() != n) throw Error(Errc::DimensionMismatch, "label count differs from rows");
  if (samples.cols() == 0) throw Error(Errc::InvalidParam, "samples have no columns");
  if (selected.empty()) {
    selected.resize(samples.cols());
    std::iota(selected.begin(), selected.end(), 0);
  }
  for (int c : selected) {
    if (c < 0 || static_cast<std::size_t>(c) >= samples.cols()) {
      throw Error(Errc::InvalidParam, "selected column out of range");
    }
  }
  const bool has_pos = std::any_of(labels.begin(), labels.end(), [](auto v) { return v != 0; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(), [](auto v) { return v == 0; });
  if (!has_pos || !has_neg) throw Error(Errc::SingleClass, "training labels contain one class");

  const std::size_t d = selected.size();
  SvmModel model;
  model.kernel = params.kernel;
  model.C = params.C;
  model.gamma = params.gamma > 0 ? params.gamma : 1.0 / static_cast<double>(d);
  model.tol = params.tol;
  model.input_dim = static_cast<int>(samples.cols());
  model.selected = selected;
  model.trained_for = trained_for;

  model.scaler.mean.assign(d, 0.0);
  model.scaler.stddev.assign(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    const auto col = static_cast<std::size_t>(selected[c]);
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += samples(r, col);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (samples(r, col) - mean) * (samples(r, col) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.scaler.mean[c] = mean;
    model.scaler.stddev[c] = sd > 0 ? sd : 1.0;
  }
  Matrix x(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      x(r, c) = (samples(r, static_cast<std::size_t>(selected[c])) - model.scaler.mean[c]) /
                model.scaler.stddev[c];
    }
  }

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] ? 1.0 : -1.0;

  const double C = params.C;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 0.5 a'Qa - e'a
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = kernel_value(params.kernel, model.gamma, x.row(i), x.row(i));
  }
  KernelCache cache(x, params.kernel, model.gamma, kCacheBytes);

  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  long iter = 0;
  bool converged = false;
  while (iter < params.max_iter) {
    // i: maximal violator in I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = t;
        }
      } else if (!lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i = t;
      }
    }
    if (i == n) {
      converged = true;
      break;
    }
    const std::vector<double> ki = cache.row(i);

    // j: second-order choice within I_low.
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double qit = y[i] * y[t] * ki[t];
      if (y[t] > 0) {
        if (lower(t)) continue;
        const double diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (diff > 0) {
          double quad = diag[i] + diag[t] - 2.0 * y[i] * qit;
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      } else {
        if (upper(t)) continue;
        const double diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (diff > 0) {
          double quad = diag[i] + diag[t] + 2.0 * y[i] * qit;
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    if (gmax + gmax2 < params.tol || j == n) {
      converged = true;
      break;
    }
    ++iter;

    const std::vector<double>& kj = cache.row(j);
    const double qij = y[i] * y[j] * ki[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    double& ai = alpha[i];
    double& aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = diag[i] + diag[j] + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > C) { ai = C; aj = C - diff; }
      } else if (aj > C) {
        aj = C;
        ai = C + diff;
      }
    } else {
      double quad = diag[i] + diag[j] - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) { ai = C; aj = sum - C; }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > C) {
        if (aj > C) { aj = C; ai = sum - C; }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }

    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj);
    }
  }

  // Bias: average over free vectors, else the midpoint of the feasible range.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
  model.bias = -rho;
  model.converged = converged;

  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    model.support_vectors.append_row(x.row(t));
    model.dual_coefs.push_back(alpha[t] * y[t]);
  }
  if (model.dual_coefs.empty()) {
    throw Error(Errc::NotConverged, "solver produced no support vectors");
  }

  return {std::move(model), std::move(alpha), iter};
}

SvmModel svm_train(const Matrix& samples, std::span<const std::uint8_t> labels,
                   const SvmParams& params, std::vector<int> selected, int trained_for) {
  return svm_train_detailed(samples, labels, params, std::move(selected), trained_for).model;
}

SvmPrediction svm_predict(const SvmModel& model, const Matrix& samples) {
  SvmPrediction out;
  if (samples.rows() == 0) return out;
  if (static_cast<int>(samples.cols()) != model.input_dim) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(model.input_dim) +
                                             " columns, got " + std::to_string(samples.cols()));
  }
  out.labels.resize(samples.rows());
  out.decision.resize(samples.rows());
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    out.decision[r] = model.decision(samples.row(r));
    out.labels[r] = out.decision[r] >= 0.0 ? 1 : 0;
  }
  return out;
}

}  // namespace capseg

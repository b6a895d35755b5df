#include "ckme/classifier.hpp"

#include "ckme/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace ckme {

namespace {

constexpr double kTau = 1e-12;

/// SMO state for min 0.5 a^T Q a - e^T a, 0 <= a <= upper, y^T a = 0.
class Smo {
 public:
  Smo(const Matrix& features, const std::vector<int>& labels, double upper)
      : y_(labels), upper_(upper), n_(static_cast<Eigen::Index>(labels.size())) {
    const Eigen::MatrixXd K = features * features.transpose();
    Q_.resize(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j) Q_(i, j) = y_[i] * y_[j] * K(i, j);
    alpha_.assign(n_, 0.0);
    grad_.assign(n_, -1.0);
  }

  /// Returns the maximal KKT violation before the step; selects and applies
  /// one pair update unless the violation is below tol.
  double step(double tol) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n_; ++t) {
      if (in_up(t)) {
        const double v = -y_[t] * grad_[t];
        if (v > gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n_; ++t) {
      if (!in_low(t)) continue;
      const double v = -y_[t] * grad_[t];
      gmin = std::min(gmin, v);
      if (i >= 0 && v < gmax) {
        const double b = gmax - v;
        double a = Q_(i, i) + Q_(t, t) - 2.0 * y_[i] * y_[t] * Q_(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    const double violation = gmax - gmin;
    if (i < 0 || j < 0 || violation < tol) return violation;
    update(i, j);
    return violation;
  }

  double objective() const {
    double f = 0.0;
    for (Eigen::Index t = 0; t < n_; ++t) f += alpha_[t] * (grad_[t] - 1.0);
    return 0.5 * f;
  }

  double bias() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (at_upper(t)) {
        if (y_[t] == -1) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (y_[t] == 1) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
    return -rho;
  }

  /// 0.5 |beta|^2 + upper * sum hinge, using a^T Q a = |beta|^2 and
  /// y_t f(x_t) = G_t + 1 + y_t b.
  double primal(double b) const {
    double norm2 = 0.0;
    double hinge = 0.0;
    for (Eigen::Index t = 0; t < n_; ++t) {
      norm2 += alpha_[t] * (grad_[t] + 1.0);
      hinge += std::max(0.0, -grad_[t] - y_[t] * b);
    }
    return 0.5 * norm2 + upper_ * hinge;
  }

  const std::vector<double>& alpha() const { return alpha_; }

 private:
  bool at_upper(Eigen::Index t) const { return alpha_[t] >= upper_; }
  bool at_lower(Eigen::Index t) const { return alpha_[t] <= 0.0; }
  bool in_up(Eigen::Index t) const { return y_[t] == 1 ? !at_upper(t) : !at_lower(t); }
  bool in_low(Eigen::Index t) const { return y_[t] == 1 ? !at_lower(t) : !at_upper(t); }

  // Two-variable analytic update with box clipping.
  void update(Eigen::Index i, Eigen::Index j) {
    const double C = upper_;
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      double quad = Q_(i, i) + Q_(j, j) + 2.0 * Q_(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > C) {
          ai = C;
          aj = C - diff;
        }
      } else if (aj > C) {
        aj = C;
        ai = C + diff;
      }
    } else {
      double quad = Q_(i, i) + Q_(j, j) - 2.0 * Q_(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) {
          ai = C;
          aj = sum - C;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > C) {
        if (aj > C) {
          aj = C;
          ai = sum - C;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    for (Eigen::Index t = 0; t < n_; ++t) grad_[t] += Q_(t, i) * di + Q_(t, j) * dj;
  }

  std::vector<int> y_;
  double upper_;
  Eigen::Index n_;
  Eigen::MatrixXd Q_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
};

}  // namespace

LinearFit train_linear(const Matrix& features, const std::vector<int>& labels, double reg_c,
                       const SolverOptions& options) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw DataError("train: " + std::to_string(features.rows()) + " examples but " + std::to_string(labels.size()) +
                    " labels");
  }
  if (!(reg_c > 0.0) || !std::isfinite(reg_c)) throw ConfigError("reg_c must be positive");
  if (!(options.tol > 0.0)) throw ConfigError("tol must be positive");
  if (options.max_iter < 1) throw ConfigError("max_iter must be positive");
  bool neg = false, pos = false;
  for (int y : labels) {
    if (y == 1) pos = true;
    else if (y == -1) neg = true;
    else throw DataError("train: labels must be -1 or +1");
  }
  if (!neg || !pos) throw DataError("train: both classes are required, got a single-class training set");
  if (!features.allFinite()) throw DataError("train: non-finite feature value");

  const double upper = reg_c / static_cast<double>(labels.size());
  Smo smo(features, labels, upper);
  LinearFit fit;
  for (fit.iterations = 0; fit.iterations < options.max_iter; ++fit.iterations) {
    const double violation = smo.step(options.tol);
    if (violation < options.tol) {
      fit.converged = true;
      break;
    }
    fit.objective_history.push_back(smo.objective());
    const double primal = smo.primal(smo.bias());
    const double dual = -fit.objective_history.back();
    if (primal - dual <= options.tol * std::max(1.0, std::abs(primal))) {
      fit.converged = true;
      ++fit.iterations;
      break;
    }
  }

  fit.bias = smo.bias();
  fit.beta = Vector::Zero(features.cols());
  const auto& alpha = smo.alpha();
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    if (alpha[t] != 0.0) fit.beta += (alpha[t] * labels[t]) * features.row(t).transpose();
  }
  fit.primal_objective = smo.primal(fit.bias);
  fit.duality_gap = fit.primal_objective + smo.objective();
  if (!fit.converged) {
    std::clog << "warning: linear solver stopped after " << fit.iterations
              << " iterations without reaching tol; using the last iterate\n";
  }
  return fit;
}

LinearModel train(const RffMap& map, const std::vector<MeanEmbedding>& embeddings, const std::vector<int>& labels,
                  double reg_c, const SolverOptions& options, TrainMeta meta) {
  if (embeddings.empty()) throw DataError("train: no embeddings");
  Matrix X(static_cast<Eigen::Index>(embeddings.size()), map.D());
  for (std::size_t k = 0; k < embeddings.size(); ++k) {
    if (embeddings[k].mu.size() != map.D()) throw DataError("train: embedding dimension mismatch");
    X.row(static_cast<Eigen::Index>(k)) = embeddings[k].mu.transpose();
  }
  LinearFit fit = train_linear(X, labels, reg_c, options);
  return LinearModel{map, std::move(fit.beta), fit.bias, reg_c, std::move(meta)};
}

double decision(const LinearModel& model, const Vector& mu) {
  if (mu.size() != model.beta.size()) {
    throw DataError("decision: embedding has dimension " + std::to_string(mu.size()) + ", model expects " +
                    std::to_string(model.beta.size()));
  }
  return mu.dot(model.beta) + model.bias;
}

double decision(const LinearModel& model, const MeanEmbedding& embedding) { return decision(model, embedding.mu); }

}  // namespace ckme

#include "endoreloc/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "endoreloc/image.hpp"

namespace endoreloc {

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

double SvmModel::decision(const Eigen::VectorXd& x) const {
  if (x.size() != support_vectors.cols()) throw Error("SVM input dimension mismatch");
  double f = bias;
  for (Eigen::Index i = 0; i < support_vectors.rows(); ++i)
    f += coefficients(i) * std::exp(-gamma * (support_vectors.row(i).transpose() - x).squaredNorm());
  return f;
}

namespace {

constexpr double kTau = 1e-12;

// Q_ij = y_i y_j K(x_i, x_j) with an LRU cache of whole rows.
class KernelRows {
public:
  KernelRows(const Eigen::MatrixXd& x, std::span<const int> y, double gamma, std::size_t capacity)
      : x_(x), y_(y), gamma_(gamma), capacity_(std::max<std::size_t>(capacity, 2)),
        norms_(x.rowwise().squaredNorm()) {}

  const std::vector<double>& row(Eigen::Index i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> r(static_cast<std::size_t>(x_.rows()));
    const Eigen::VectorXd dots = x_ * x_.row(i).transpose();
    for (Eigen::Index j = 0; j < x_.rows(); ++j) {
      const double d2 = std::max(0.0, norms_(i) + norms_(j) - 2.0 * dots(j));
      r[j] = y_[i] * y_[j] * std::exp(-gamma_ * d2);
    }
    lru_.emplace_front(i, std::move(r));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

private:
  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  double gamma_;
  std::size_t capacity_;
  Eigen::VectorXd norms_;
  std::list<std::pair<Eigen::Index, std::vector<double>>> lru_;
  std::unordered_map<Eigen::Index, decltype(lru_)::iterator> index_;
};

}  // namespace

SvmTrainResult train_svm(const Eigen::MatrixXd& samples, std::span<const int> labels, const SvmParams& params) {
  const Eigen::Index n = samples.rows();
  if (static_cast<std::size_t>(n) != labels.size()) throw Error("SVM sample/label count mismatch");
  if (!(params.C > 0.0)) throw Error("SVM C must be positive");
  if (!(params.gamma > 0.0)) throw Error("SVM gamma must be positive");
  long n_pos = 0, n_neg = 0;
  for (int y : labels) {
    if (y == 1) ++n_pos;
    else if (y == -1) ++n_neg;
    else throw Error("SVM labels must be +1 or -1");
  }
  if (n_pos == 0 || n_neg == 0) throw Error("SVM training needs both classes (single-class input)");

  double c_pos = params.C, c_neg = params.C;
  if (params.balance_classes) {
    const double minority = static_cast<double>(std::min(n_pos, n_neg));
    c_pos = params.C * minority / static_cast<double>(n_pos);
    c_neg = params.C * minority / static_cast<double>(n_neg);
  }
  std::vector<double> upper(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) upper[i] = labels[i] == 1 ? c_pos : c_neg;

  KernelRows q(samples, labels, params.gamma, params.cache_rows);
  std::vector<double> qd(static_cast<std::size_t>(n), 1.0);  // K(x, x) = 1 for RBF
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(n), -1.0);

  auto is_upper = [&](Eigen::Index t) { return alpha[t] >= upper[t]; };
  auto is_lower = [&](Eigen::Index t) { return alpha[t] <= 0.0; };

  long iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    // Maximal violating pair.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1, j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -labels[t] * grad[t];
      const bool in_up = labels[t] == 1 ? !is_upper(t) : !is_lower(t);
      const bool in_low = labels[t] == 1 ? !is_lower(t) : !is_upper(t);
      if (in_up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < params.tolerance) break;

    const std::vector<double>& qi = q.row(i);
    const double qij = qi[j];
    const double ci = upper[i], cj = upper[j];
    const double old_ai = alpha[i], old_aj = alpha[j];
    double& ai = alpha[i];
    double& aj = alpha[j];

    if (labels[i] != labels[j]) {
      double quad = qd[i] + qd[j] + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
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
      if (diff > ci - cj) {
        if (ai > ci) {
          ai = ci;
          aj = ci - diff;
        }
      } else if (aj > cj) {
        aj = cj;
        ai = cj + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > ci) {
        if (ai > ci) {
          ai = ci;
          aj = sum - ci;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > cj) {
        if (aj > cj) {
          aj = cj;
          ai = sum - cj;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }

    const double dai = ai - old_ai, daj = aj - old_aj;
    const std::vector<double>& qj = q.row(j);
    const std::vector<double>& qi2 = q.row(i);  // row(j) may have evicted i
    for (Eigen::Index t = 0; t < n; ++t) grad[t] += qi2[t] * dai + qj[t] * daj;
  }

  // Offset from free variables, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  long n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = labels[t] * grad[t];
    if (is_upper(t)) {
      if (labels[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (labels[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  SvmTrainResult result;
  result.iterations = iter;
  result.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), n);
  result.decision_values.resize(n);
  double objective = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    result.decision_values(t) = labels[t] * (grad[t] + 1.0) - rho;
    objective += alpha[t] * (grad[t] - 1.0);
  }
  result.objective = 0.5 * objective;

  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha[t] > 0.0) sv.push_back(t);
  SvmModel& m = result.model;
  m.gamma = params.gamma;
  m.C = params.C;
  m.bias = -rho;
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), samples.cols());
  m.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    m.support_vectors.row(static_cast<Eigen::Index>(k)) = samples.row(sv[k]);
    m.coefficients(static_cast<Eigen::Index>(k)) = alpha[sv[k]] * labels[sv[k]];
  }
  return result;
}

}  // namespace endoreloc

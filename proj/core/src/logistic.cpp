#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "synthrel/error.hpp"
#include "synthrel/learners.hpp"

namespace synthrel::logistic {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double linear_term(std::span<const double> params, std::span<const double> row) {
  double z = params.back();
  for (std::size_t j = 0; j < row.size(); ++j) z += params[j] * row[j];
  return z;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double objective(std::span<const double> params, const FeatureMatrix& X, std::span<const double> y, double l2) {
  if (params.size() != X.cols() + 1) throw InvalidArgument("logistic parameter vector has the wrong length");
  double loss = 0.0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    const double z = linear_term(params, X.row(i));
    loss += softplus(z) - y[i] * z;
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j < X.cols(); ++j) penalty += params[j] * params[j];
  return loss + 0.5 * l2 * penalty;
}

std::vector<double> gradient(std::span<const double> params, const FeatureMatrix& X, std::span<const double> y,
                             double l2) {
  if (params.size() != X.cols() + 1) throw InvalidArgument("logistic parameter vector has the wrong length");
  std::vector<double> g(params.size(), 0.0);
  for (std::size_t i = 0; i < X.rows; ++i) {
    auto row = X.row(i);
    const double r = sigmoid(linear_term(params, row)) - y[i];
    for (std::size_t j = 0; j < row.size(); ++j) g[j] += r * row[j];
    g.back() += r;
  }
  for (std::size_t j = 0; j < X.cols(); ++j) g[j] += l2 * params[j];
  return g;
}

Solution solve(const FeatureMatrix& X, std::span<const double> y, const LogisticParams& p) {
  const std::size_t dim = X.cols() + 1;
  const auto n = static_cast<Eigen::Index>(X.rows);
  const auto d = static_cast<Eigen::Index>(dim);
  Solution sol;
  sol.params.assign(dim, 0.0);

  // Convergence is judged on the per-example gradient so the tolerance does
  // not depend on sample size.
  const double scale = 1.0 / std::max<double>(1.0, static_cast<double>(X.rows));
  double f = objective(sol.params, X, y, p.l2);
  auto g = gradient(sol.params, X, y, p.l2);
  std::vector<double> trial(dim);
  Eigen::MatrixXd H(d, d);

  for (int it = 0; it < p.max_iterations; ++it) {
    if (inf_norm(g) * scale < p.tolerance) {
      sol.converged = true;
      break;
    }

    // Newton direction from the penalized Hessian [X 1]^T W [X 1] + l2 I_w.
    H.setZero();
    std::vector<double> ext(dim, 1.0);
    for (std::size_t i = 0; i < X.rows; ++i) {
      auto row = X.row(i);
      std::copy(row.begin(), row.end(), ext.begin());
      const double pi = sigmoid(linear_term(sol.params, row));
      const double w = pi * (1.0 - pi);
      for (Eigen::Index a = 0; a < d; ++a) {
        const double wa = w * ext[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b <= a; ++b) H(a, b) += wa * ext[static_cast<std::size_t>(b)];
      }
    }
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = a + 1; b < d; ++b) H(a, b) = H(b, a);
    for (Eigen::Index a = 0; a + 1 < d; ++a) H(a, a) += p.l2;
    H.diagonal().array() += 1e-12 * static_cast<double>(n);

    Eigen::Map<const Eigen::VectorXd> grad(g.data(), d);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd dir = -ldlt.solve(grad);
    double slope = grad.dot(dir);
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || !(slope < 0.0)) {
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    // Armijo backtracking along the direction.
    double t = 1.0;
    double ft = 0.0;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      for (std::size_t j = 0; j < dim; ++j) trial[j] = sol.params[j] + t * dir[static_cast<Eigen::Index>(j)];
      ft = objective(trial, X, y, p.l2);
      if (ft <= f + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (!(ft <= f)) break;  // no descent possible at machine precision
    sol.params.swap(trial);
    f = ft;
    g = gradient(sol.params, X, y, p.l2);
    sol.iterations = it + 1;
  }
  if (!sol.converged && inf_norm(g) * scale < p.tolerance) sol.converged = true;
  return sol;
}

}  // namespace synthrel::logistic

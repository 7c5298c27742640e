#pragma once

// Quasi-Newton (BFGS) descent with central finite-difference gradients.

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ril {

using Objective = std::function<double(std::span<const double>)>;

struct LocalOptions {
  double fd_step = 1e-7;
  double gradient_tolerance = 1e-8;
  int max_iterations = 2000;
};

struct LocalResult {
  std::vector<double> x;
  double f = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;      // gradient norm below tolerance
  std::vector<double> history;  // f after every accepted iterate, starting with f(x0)
};

class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class CountingObjective {
 public:
  explicit CountingObjective(const Objective& f) : f_(f) {}

  double operator()(const Eigen::VectorXd& x) {
    ++count_;
    const double v = f_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    if (!std::isfinite(v)) {
      std::string where;
      for (Eigen::Index i = 0; i < x.size(); ++i) where += (i ? "," : "") + std::to_string(x(i));
      throw OptimizationError("objective returned a non-finite value at x = [" + where + "]");
    }
    return v;
  }

  long count() const { return count_; }

 private:
  const Objective& f_;
  long count_ = 0;
};

inline Eigen::VectorXd central_gradient(CountingObjective& f, Eigen::VectorXd x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    x(i) = xi + h;
    const double fp = f(x);
    x(i) = xi - h;
    const double fm = f(x);
    x(i) = xi;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace detail

inline LocalResult local_minimize(const Objective& objective, const std::vector<double>& x0,
                                  const LocalOptions& opts = {}) {
  detail::CountingObjective f(objective);
  const Eigen::Index n = static_cast<Eigen::Index>(x0.size());
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);

  LocalResult out;
  double fx = f(x);
  out.history.push_back(fx);
  Eigen::VectorXd g = detail::central_gradient(f, x, opts.fd_step);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool fresh_hessian = true;

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (g.norm() < opts.gradient_tolerance) break;

    Eigen::VectorXd p = -hinv * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      p = -g;
      slope = -g.squaredNorm();
      fresh_hessian = true;
    }

    // Backtracking line search with the Armijo condition.
    constexpr double c1 = 1e-4;
    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * p;
      f_new = f(x_new);
      if (f_new <= fx + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || f_new > fx) {
      if (fresh_hessian) break;  // steepest descent cannot make progress either
      hinv.setIdentity();
      fresh_hessian = true;
      continue;
    }

    const Eigen::VectorXd g_new = detail::central_gradient(f, x_new, opts.fd_step);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (fresh_hessian) {
        hinv *= sy / y.squaredNorm();
        fresh_hessian = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = hinv * y;
      hinv += ((sy + y.dot(hy)) * rho * rho) * (s * s.transpose()) -
              rho * (hy * s.transpose() + s * hy.transpose());
    }
    x = x_new;
    fx = f_new;
    g = g_new;
    out.history.push_back(fx);
  }

  out.x.assign(x.data(), x.data() + n);
  out.f = fx;
  out.gradient_norm = g.norm();
  out.iterations = it;
  out.evaluations = f.count();
  out.converged = out.gradient_norm < opts.gradient_tolerance;
  return out;
}

}  // namespace ril

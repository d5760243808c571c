#include "grm/laplace.hpp"

#include <chrono>
#include <cmath>

#include "grm/model.hpp"
#include "grm/reparam.hpp"

namespace grm {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

struct SubjectLaplace {
  double marginal;
  double eta;
  double curvature;
  int iterations;
};

// Newton search for the root of g'. The pattern log-likelihood is concave in
// eta, so g' is strictly decreasing and a sign-change bracket safeguards every
// step: Newton proposals outside the bracket fall back to bisection. This
// stays convergent even when sharp items make g nearly piecewise linear.
SubjectLaplace subject_laplace(const ItemSet& items, const ResponseRow& row, double tol,
                               double eta_start) {
  double eta = eta_start;
  JointDensity g = joint_logdensity(items, row, eta);

  auto finish = [&](int iter) {
    const double curvature = -g.d2;
    if (!(curvature > 0.0)) throw ModeFindingError("non-positive curvature at mode");
    return SubjectLaplace{g.value + kHalfLog2Pi - 0.5 * std::log(curvature), eta, curvature,
                          iter};
  };
  if (std::abs(g.d1) < tol) return finish(0);

  // bracket the root: g' > 0 left of the mode, < 0 right of it
  double lo, hi;
  {
    double span = 1.0;
    if (g.d1 > 0.0) {
      lo = eta;
      hi = eta + span;
      while (joint_logdensity(items, row, hi).d1 > 0.0) {
        lo = hi;
        span *= 2.0;
        hi += span;
        if (span > 1e18) throw ModeFindingError("mode bracket expansion failed");
      }
    } else {
      hi = eta;
      lo = eta - span;
      while (joint_logdensity(items, row, lo).d1 < 0.0) {
        hi = lo;
        span *= 2.0;
        lo -= span;
        if (span > 1e18) throw ModeFindingError("mode bracket expansion failed");
      }
    }
  }

  for (int iter = 1; iter <= 100; ++iter) {
    double eta_new = eta + g.d1 / (-g.d2);
    if (!(eta_new > lo && eta_new < hi)) eta_new = 0.5 * (lo + hi);
    eta = eta_new;
    g = joint_logdensity(items, row, eta);
    if (std::abs(g.d1) < tol) return finish(iter);
    if (g.d1 > 0.0)
      lo = eta;
    else
      hi = eta;
    if (hi - lo < 1e-15 * (1.0 + std::abs(eta))) return finish(iter);
  }
  throw ModeFindingError("mode finding exceeded 100 Newton steps");
}

}  // namespace

JointDensity joint_logdensity(const ItemSet& items, const ResponseRow& responses, double eta) {
  const PatternDerivs ll = pattern_loglik_derivs(items, responses, eta);
  JointDensity g;
  g.value = ll.value - 0.5 * eta * eta - kHalfLog2Pi;
  g.d1 = ll.d1 - eta;
  g.d2 = ll.d2 - 1.0;
  return g;
}

ModeResult find_posterior_mode(const ItemSet& items, const ResponseRow& responses,
                               double inner_tolerance, double eta_start) {
  if (!(inner_tolerance > 0.0)) throw std::domain_error("inner tolerance must be positive");
  const SubjectLaplace s = subject_laplace(items, responses, inner_tolerance, eta_start);
  return {s.eta, s.curvature, s.iterations};
}

double marginal_loglik_laplace(const ItemSet& items, const ResponseRow& responses,
                               double inner_tolerance) {
  return subject_laplace(items, responses, inner_tolerance, 0.0).marginal;
}

double dataset_loglik_laplace(const ItemSet& items, const ResponseMatrix& data,
                              double inner_tolerance) {
  if (static_cast<int>(items.size()) != data.items())
    throw DimensionError("data column count does not match item count");
  double total = 0.0;
  for (int i = 0; i < data.subjects(); ++i)
    total += subject_laplace(items, data.y.row(i), inner_tolerance, 0.0).marginal;
  return total;
}

FitResult fit_laplace(const ResponseMatrix& data, const ItemSet& init, const FitConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  validate(data);
  if (static_cast<int>(init.size()) != data.items())
    throw DimensionError("initial item count does not match data columns");
  for (const ItemParameters& item : init) {
    validate(item);
    if (!within_bounds(item, config.bounds))
      throw std::invalid_argument("initial estimates violate box bounds");
  }

  const int n = data.subjects();
  const int dim = 5 * data.items();
  std::vector<int> ids(init.size());
  for (std::size_t j = 0; j < init.size(); ++j) ids[j] = init[j].item_id;

  FitResult result;
  result.method = FitMethod::Laplace;
  result.estimates = init;

  Eigen::VectorXd modes = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd trial_modes(n);

  auto objective = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& warm,
                       Eigen::VectorXd* out_modes) {
    const ItemSet items = unpack_items(u, ids);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const SubjectLaplace s =
          subject_laplace(items, data.y.row(i), config.inner_tolerance, warm[i]);
      total += s.marginal;
      if (out_modes) (*out_modes)[i] = s.eta;
    }
    return total;
  };

  // Forward differences with relative step 1e-6, warm-starting every
  // perturbed evaluation from the base point's subject modes.
  auto fd_gradient = [&](const Eigen::VectorXd& u0, double f0, const Eigen::VectorXd& warm) {
    Eigen::VectorXd grad(dim);
    Eigen::VectorXd up = u0;
    for (int k = 0; k < dim; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(u0[k]));
      up[k] = u0[k] + h;
      grad[k] = (objective(up, warm, nullptr) - f0) / h;
      up[k] = u0[k];
    }
    return grad;
  };

  auto project = [&](const Eigen::VectorXd& v) {
    ItemSet items = unpack_items(v, ids);
    for (ItemParameters& item : items) item = project_to_bounds(item, config.bounds);
    return pack_items(items);
  };

  auto at_bound = [&](const Eigen::VectorXd& v) {
    const ItemSet items = unpack_items(v, ids);
    for (const ItemParameters& item : items) {
      if (item.a >= config.bounds.a_upper - 1e-9 || item.a <= config.bounds.a_lower + 1e-9)
        return true;
      for (int k = 0; k < kThresholds; ++k)
        if (item.b[k] >= config.bounds.b_upper - 1e-9 ||
            item.b[k] <= config.bounds.b_lower + 1e-9)
          return true;
    }
    return false;
  };

  Eigen::VectorXd u = pack_items(init);
  double f;
  FitStatus status = FitStatus::MaxIterations;
  int iterations = 0;

  try {
    f = objective(u, modes, &modes);
    if (!std::isfinite(f)) throw ModeFindingError("objective not finite at start");
    result.loglik_trace.push_back(f);

    Eigen::VectorXd grad = fd_gradient(u, f, modes);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim);
    bool hinv_scaled = false;
    int small_steps = 0;

    for (int iter = 1; iter <= config.max_outer_iterations; ++iter) {
      iterations = iter;
      if (!grad.allFinite()) throw ModeFindingError("gradient not finite");

      Eigen::VectorXd dir = hinv * grad;
      if (dir.dot(grad) <= 0.0) {
        hinv.setIdentity();
        hinv_scaled = false;
        dir = grad;
      }
      // before any curvature information, cap the move at one unit per axis
      if (!hinv_scaled) {
        const double norm = dir.cwiseAbs().maxCoeff();
        if (norm > 1.0) dir /= norm;
      }

      bool accepted = false;
      Eigen::VectorXd u_new;
      double f_new = f;
      for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
        double t = 1.0;
        for (int h = 0; h < 40; ++h, t *= 0.5) {
          Eigen::VectorXd cand = project(u + t * dir);
          if ((cand - u).cwiseAbs().maxCoeff() == 0.0) continue;
          const double fc = objective(cand, modes, &trial_modes);
          if (std::isfinite(fc) && fc > f) {
            accepted = true;
            u_new = std::move(cand);
            f_new = fc;
            break;
          }
        }
        if (!accepted && attempt == 0) {
          // retry once along the raw gradient with a reset approximation
          hinv.setIdentity();
          hinv_scaled = false;
          dir = grad;
        }
      }

      if (!accepted) {
        status = small_steps >= 1 ? FitStatus::Converged
                 : at_bound(u)    ? FitStatus::BoundaryStuck
                                  : FitStatus::LineSearchFailure;
        break;
      }

      const double rel_change = std::abs(f_new - f) / std::max(1.0, std::abs(f_new));
      small_steps = rel_change < config.outer_tolerance ? small_steps + 1 : 0;

      const Eigen::VectorXd grad_new = fd_gradient(u_new, f_new, trial_modes);
      const Eigen::VectorXd s = u_new - u;
      const Eigen::VectorXd yv = grad - grad_new;  // gradient change of -objective
      const double sy = s.dot(yv);
      if (sy > 1e-12 * s.norm() * yv.norm()) {
        if (!hinv_scaled) {
          hinv = (sy / yv.squaredNorm()) * Eigen::MatrixXd::Identity(dim, dim);
          hinv_scaled = true;
        }
        const double rho = 1.0 / sy;
        const Eigen::VectorXd hy = hinv * yv;
        const double yhy = yv.dot(hy);
        hinv -= rho * (s * hy.transpose() + hy * s.transpose());
        hinv += (rho * rho * yhy + rho) * (s * s.transpose());
      }

      u = u_new;
      f = f_new;
      grad = grad_new;
      modes = trial_modes;
      result.loglik_trace.push_back(f);

      if (small_steps >= 2) {
        status = FitStatus::Converged;
        break;
      }
    }

    result.estimates = unpack_items(u, ids);
    result.loglik = f;
  } catch (const ModeFindingError&) {
    status = FitStatus::NumericalFailure;
    result.estimates = unpack_items(u, ids);
    result.loglik = result.loglik_trace.empty() ? std::nan("") : result.loglik_trace.back();
  }

  result.status = status;
  result.converged = status == FitStatus::Converged;
  result.outer_iterations = iterations;
  result.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
  return result;
}

}  // namespace grm

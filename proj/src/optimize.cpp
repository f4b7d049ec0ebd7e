#include "gda/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gda/rng.hpp"

namespace gda {

double StepSchedule::at(int iter, double fallback) const {
  double base = resolve(fallback);
  switch (decay) {
    case Decay::InvSqrt: return base / std::sqrt(static_cast<double>(iter));
    case Decay::Constant: return base;
  }
  return base;
}

namespace {

// Dense views over the atoms for the inner loops.
struct Problem {
  Mat xs;        // n x d
  Vec ys;        // +-1
  Vec masses;    // sums to 1
  int n = 0;
  int d = 0;
};

Problem make_problem(const DiscreteDistribution& data) {
  Problem p;
  p.n = data.size();
  p.d = data.dim();
  p.xs.resize(p.n, p.d);
  p.ys.resize(p.n);
  p.masses.resize(p.n);
  for (int i = 0; i < p.n; ++i) {
    const auto& a = data.atoms()[static_cast<size_t>(i)];
    p.xs.row(i) = a.x.transpose();
    p.ys[i] = a.y;
    p.masses[i] = a.mass;
  }
  return p;
}

double objective(MarginLossKind kind, const Problem& p, const Vec& w, double b) {
  Vec margins = p.ys.cwiseProduct(p.xs * w + Vec::Constant(p.n, b));
  double total = 0.0;
  for (int i = 0; i < p.n; ++i) total += p.masses[i] * margin_value(kind, margins[i]);
  return total;
}

Vec project_ball(const Vec& w, double R) {
  double norm = w.norm();
  return norm > R ? Vec(w * (R / norm)) : w;
}

// Projected subgradient descent on sum_i m_i [loss(margin_i) + linear_i * margin_i]
// over ||w|| <= R. The linear tilt carries the concave side of the ramp split;
// it is zero for plain hinge/logistic solves.
struct DescentResult {
  Vec w;
  double b = 0.0;
  double value = 0.0;
};

DescentResult projected_subgradient(MarginLossKind kind, const Problem& p, double R,
                                    const Vec& linear, const Vec& w0, double b0,
                                    const SolverConfig& cfg) {
  Vec w = project_ball(w0, R);
  double b = b0;
  auto eval = [&](const Vec& wv, double bv) {
    Vec margins = p.ys.cwiseProduct(p.xs * wv + Vec::Constant(p.n, bv));
    double total = 0.0;
    for (int i = 0; i < p.n; ++i)
      total += p.masses[i] * (margin_value(kind, margins[i]) + linear[i] * margins[i]);
    return total;
  };
  DescentResult best{w, b, eval(w, b)};
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    Vec margins = p.ys.cwiseProduct(p.xs * w + Vec::Constant(p.n, b));
    Vec coef(p.n);  // d(loss)/d(margin) + linear
    for (int i = 0; i < p.n; ++i) {
      double g = 0.0;
      switch (kind) {
        case MarginLossKind::Hinge:
        case MarginLossKind::Ramp:  // ramp enters here only via the CCCP split
          g = margins[i] < 1.0 ? -1.0 : 0.0;
          break;
        case MarginLossKind::Logistic:
          g = -1.0 / (1.0 + std::exp(margins[i]));
          break;
      }
      coef[i] = p.masses[i] * (g + linear[i]);
    }
    Vec grad_w = p.xs.transpose() * coef.cwiseProduct(p.ys);
    double grad_b = coef.dot(p.ys);
    double step = cfg.step.at(iter, 0.1);
    w = project_ball(w - step * grad_w, R);
    b -= step * grad_b;
    if (!w.allFinite() || !std::isfinite(b))
      throw SolverError("projected_subgradient: non-finite iterate at iteration " +
                        std::to_string(iter) + " (w norm " + std::to_string(w.norm()) + ")");
    double value = eval(w, b);
    if (value < best.value) best = {w, b, value};
  }
  return best;
}

// One CCCP run for the ramp loss from a given start. The concave part of
// r(m) = hinge(m) - max(-m, 0) is linearized at the current margins, giving a
// hinge-plus-linear convex inner problem.
DescentResult cccp_ramp(const Problem& p, double R, const Vec& w0, double b0,
                        const SolverConfig& cfg) {
  Vec w = project_ball(w0, R);
  double b = b0;
  double value = objective(MarginLossKind::Ramp, p, w, b);
  DescentResult best{w, b, value};
  const int max_outer = 40;
  for (int outer = 0; outer < max_outer; ++outer) {
    Vec margins = p.ys.cwiseProduct(p.xs * w + Vec::Constant(p.n, b));
    Vec linear(p.n);
    for (int i = 0; i < p.n; ++i) linear[i] = margins[i] < 0.0 ? 1.0 : 0.0;
    DescentResult inner =
        projected_subgradient(MarginLossKind::Hinge, p, R, linear, w, b, cfg);
    double ramp_value = objective(MarginLossKind::Ramp, p, inner.w, inner.b);
    if (ramp_value < best.value) best = {inner.w, inner.b, ramp_value};
    if (ramp_value > value - cfg.tolerance) break;
    w = inner.w;
    b = inner.b;
    value = ramp_value;
  }
  return best;
}

}  // namespace

LinearModel erm_constrained(MarginLossKind kind, const DiscreteDistribution& data,
                            double R, const SolverConfig& cfg,
                            const LinearModel* warm_start) {
  if (data.empty()) throw std::invalid_argument("erm_constrained: empty data");
  if (!(R > 0.0)) throw std::invalid_argument("erm_constrained: R must be positive");
  Problem p = make_problem(data);
  Vec w0 = Vec::Zero(p.d);
  double b0 = 0.0;
  if (warm_start) {
    if (warm_start->dim() != p.d)
      throw std::invalid_argument("erm_constrained: warm start dimension mismatch");
    w0 = warm_start->w;
    b0 = warm_start->b;
  }

  DescentResult best;
  if (kind == MarginLossKind::Ramp) {
    best = cccp_ramp(p, R, w0, b0, cfg);
    Rng rng = make_rng(cfg.seed, 0x52414d50);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int r = 0; r < cfg.restarts; ++r) {
      Vec wr(p.d);
      for (int k = 0; k < p.d; ++k) wr[k] = normal(rng);
      if (wr.norm() > 0) wr *= R * unif(rng) / wr.norm();
      double br = 2.0 * normal(rng);
      DescentResult run = cccp_ramp(p, R, wr, br, cfg);
      bool better = run.value < best.value - 1e-12;
      bool tie = std::abs(run.value - best.value) <= 1e-12 &&
                 (run.w - w0).norm() < (best.w - w0).norm();
      if (better || tie) best = run;
    }
  } else {
    Vec zero_linear = Vec::Zero(p.n);
    best = projected_subgradient(kind, p, R, zero_linear, w0, b0, cfg);
  }

  // Monotone-improvement guarantee relative to the warm start.
  if (warm_start) {
    double warm_value = objective(kind, p, project_ball(w0, R), b0);
    if (warm_value < best.value) best = {project_ball(w0, R), b0, warm_value};
  }
  return make_model(best.w, best.b, R);
}

namespace {

struct GridBest {
  double value = std::numeric_limits<double>::infinity();
  Vec w;
  double b = 0.0;
  double tie_dist = std::numeric_limits<double>::infinity();
};

void consider(GridBest& best, double value, const Vec& w, double b,
              const LinearModel* anchor) {
  double dist = 0.0;
  if (anchor) {
    dist = std::sqrt((w - anchor->w).squaredNorm() +
                     (b - anchor->b) * (b - anchor->b));
  }
  constexpr double kTieEps = 1e-12;
  if (value < best.value - kTieEps ||
      (value <= best.value + kTieEps && dist < best.tie_dist - 1e-15)) {
    best = {std::min(value, best.value), w, b, dist};
  }
}

}  // namespace

LinearModel erm_exact_1d2d(MarginLossKind kind, const DiscreteDistribution& data,
                           double R, int grid, Interval bias_range,
                           const LinearModel* anchor) {
  if (data.empty()) throw std::invalid_argument("erm_exact_1d2d: empty data");
  const int d = data.dim();
  if (d > 2) throw std::invalid_argument("erm_exact_1d2d: unsupported dimension " +
                                         std::to_string(d));
  if (data.size() > 64)
    throw std::invalid_argument("erm_exact_1d2d: too many atoms for the grid solver");
  if (grid < 3) throw std::invalid_argument("erm_exact_1d2d: grid too small");
  Problem p = make_problem(data);

  auto eval = [&](const Vec& w, double b) { return objective(kind, p, w, b); };

  GridBest best;
  const double blo = bias_range.lo, bhi = bias_range.hi;

  // The anchor competes as a candidate, so a caller warm-starting at the
  // current model never gets back a strictly worse one.
  if (anchor && anchor->dim() == d) {
    Vec wa = project_ball(anchor->w, R);
    consider(best, eval(wa, anchor->b), wa, anchor->b, anchor);
  }

  if (d == 1) {
    const int gw = grid | 1;  // odd => includes w = 0 and +-R exactly
    const int gb = grid | 1;
    Vec w(1);
    for (int i = 0; i < gw; ++i) {
      w[0] = -R + 2.0 * R * i / (gw - 1);
      for (int j = 0; j < gb; ++j) {
        double b = blo + (bhi - blo) * j / (gb - 1);
        consider(best, eval(w, b), w, b, anchor);
      }
    }
    // Local coordinate refinement with shrinking windows.
    double range_w = 2.0 * R / (gw - 1);
    double range_b = (bhi - blo) / (gb - 1);
    for (int round = 0; round < 80 && (range_w > 1e-14 || range_b > 1e-14); ++round) {
      GridBest center = best;
      for (int i = -4; i <= 4; ++i) {
        Vec wv(1);
        wv[0] = std::clamp(center.w[0] + range_w * i / 2.0, -R, R);
        for (int j = -4; j <= 4; ++j) {
          double bv = std::clamp(center.b + range_b * j / 2.0, blo, bhi);
          consider(best, eval(wv, bv), wv, bv, anchor);
        }
      }
      range_w *= 0.45;
      range_b *= 0.45;
    }
  } else {
    const int ga = std::min(grid, 1440);
    const int gb = std::min(grid | 1, 401);
    const int gm = 5;
    for (int a = 0; a < ga; ++a) {
      double phi = 2.0 * M_PI * a / ga;
      Vec dir(2);
      dir << std::cos(phi), std::sin(phi);
      for (int m = 1; m <= gm; ++m) {
        Vec w = dir * (R * m / gm);
        for (int j = 0; j < gb; ++j) {
          double b = blo + (bhi - blo) * j / (gb - 1);
          consider(best, eval(w, b), w, b, anchor);
        }
      }
    }
    {
      Vec w = Vec::Zero(2);
      for (int j = 0; j < gb; ++j) {
        double b = blo + (bhi - blo) * j / (gb - 1);
        consider(best, eval(w, b), w, b, anchor);
      }
    }
    double range_phi = 2.0 * M_PI / ga;
    double range_s = R / gm;
    double range_b = (bhi - blo) / (gb - 1);
    for (int round = 0; round < 80 && (range_phi > 1e-14 || range_b > 1e-14); ++round) {
      GridBest center = best;
      double phi0 = std::atan2(center.w.size() == 2 ? center.w[1] : 0.0, center.w[0]);
      double s0 = center.w.norm();
      for (int a = -3; a <= 3; ++a) {
        double phi = phi0 + range_phi * a / 2.0;
        Vec dir(2);
        dir << std::cos(phi), std::sin(phi);
        for (int m = -3; m <= 3; ++m) {
          double s = std::clamp(s0 + range_s * m / 2.0, 0.0, R);
          Vec w = dir * s;
          for (int j = -3; j <= 3; ++j) {
            double bv = std::clamp(center.b + range_b * j / 2.0, blo, bhi);
            consider(best, eval(w, bv), w, bv, anchor);
          }
        }
      }
      range_phi *= 0.45;
      range_s *= 0.45;
      range_b *= 0.45;
    }
  }
  return make_model(best.w, best.b, R);
}

namespace {

double stable_sigmoid(double s) {
  return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

// Shared mini-batch driver for the penalized logistic paths. `targets` holds
// the per-example probability targets (hard labels mapped to 0/1, or teacher
// sigmoids in soft mode); the score gradient is sigmoid(score) - target.
// `weights` rescales rows so merged duplicate atoms keep their mass (1 = the
// uniform case).
LinearModel minibatch_logistic(const Mat& x, const Vec& targets, const Vec& weights,
                               double lambda, int epochs, const SolverConfig& cfg,
                               Vec w, double b, const char* who) {
  const int n = static_cast<int>(x.rows());
  double max_sq = 0.0;
  for (int i = 0; i < n; ++i) max_sq = std::max(max_sq, x.row(i).squaredNorm());
  double lipschitz = 0.25 * (max_sq + 1.0) + 2.0 * lambda;
  const bool adam = cfg.flavor == SolverConfig::Flavor::Adam;
  double base_step = cfg.step.resolve(adam ? 1e-3 : 1.0 / lipschitz);

  Rng rng = make_rng(cfg.seed, 0x4c4f4753);
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int batch = cfg.batch_size > 0 ? std::min(cfg.batch_size, n) : n;

  const int d = static_cast<int>(x.cols());
  Vec m1 = Vec::Zero(d + 1), m2 = Vec::Zero(d + 1);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    double step = base_step;
    if (!adam && cfg.step.decay == StepSchedule::Decay::InvSqrt)
      step = base_step / std::sqrt(1.0 + epoch / 10.0);
    for (int start = 0; start < n; start += batch) {
      int count = std::min(batch, n - start);
      Vec grad(d + 1);
      grad.head(d) = 2.0 * lambda * w;
      grad[d] = 0.0;
      for (int k = 0; k < count; ++k) {
        int i = order[static_cast<size_t>(start + k)];
        double c = weights[i] * (stable_sigmoid(x.row(i).dot(w) + b) - targets[i]) / count;
        grad.head(d) += c * x.row(i).transpose();
        grad[d] += c;
      }
      if (adam) {
        ++t;
        m1 = beta1 * m1 + (1.0 - beta1) * grad;
        m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseProduct(grad);
        double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        Vec update = (m1 / c1).cwiseQuotient(((m2 / c2).cwiseSqrt().array() + eps).matrix());
        w -= step * update.head(d);
        b -= step * update[d];
      } else {
        w -= step * grad.head(d);
        b -= step * grad[d];
      }
    }
    if (!w.allFinite() || !std::isfinite(b))
      throw SolverError(std::string(who) + ": diverged at epoch " + std::to_string(epoch));
  }
  return make_model(std::move(w), b);
}

}  // namespace

LinearModel penalized_logistic(const DiscreteDistribution& data, double lambda,
                               int epochs, const SolverConfig& cfg,
                               const LinearModel* warm_start) {
  if (lambda < 0.0) throw std::invalid_argument("penalized_logistic: lambda < 0");
  if (epochs < 1) throw std::invalid_argument("penalized_logistic: epochs < 1");
  Problem p = make_problem(data);
  Vec w = Vec::Zero(p.d);
  double b = 0.0;
  if (warm_start) {
    if (warm_start->dim() != p.d)
      throw std::invalid_argument("penalized_logistic: warm start dimension mismatch");
    w = warm_start->w;
    b = warm_start->b;
  }
  Vec targets(p.n);
  Vec weights(p.n);
  for (int i = 0; i < p.n; ++i) {
    targets[i] = p.ys[i] > 0 ? 1.0 : 0.0;
    weights[i] = p.masses[i] * p.n;
  }
  return minibatch_logistic(p.xs, targets, weights, lambda, epochs, cfg, std::move(w), b,
                            "penalized_logistic");
}

LinearModel penalized_soft_logistic(const std::vector<Vec>& xs,
                                    const LinearModel& teacher, double lambda,
                                    int epochs, const SolverConfig& cfg) {
  if (xs.empty()) throw std::invalid_argument("penalized_soft_logistic: empty data");
  if (epochs < 1) throw std::invalid_argument("penalized_soft_logistic: epochs < 1");
  const int n = static_cast<int>(xs.size());
  const int d = static_cast<int>(xs.front().size());
  if (teacher.dim() != d)
    throw std::invalid_argument("penalized_soft_logistic: teacher dimension mismatch");
  Mat x(n, d);
  Vec targets(n);
  for (int i = 0; i < n; ++i) {
    x.row(i) = xs[static_cast<size_t>(i)].transpose();
    targets[i] = stable_sigmoid(score(teacher, xs[static_cast<size_t>(i)]));
  }
  return minibatch_logistic(x, targets, Vec::Ones(n), lambda, epochs, cfg, teacher.w,
                            teacher.b, "penalized_soft_logistic");
}

namespace {

Mat draw_unlabeled(const GaussianMixtureDomain& domain, int n, std::uint64_t seed) {
  auto xs = sample_domain_unlabeled(domain, n, seed);
  Mat out(n, domain.dim());
  for (int i = 0; i < n; ++i) out.row(i) = xs[static_cast<size_t>(i)].transpose();
  return out;
}

double mc_objective(MarginLossKind phi, const Mat& samples, const Vec& w) {
  Vec scores = samples * w;
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    total += margin_value(phi, std::abs(scores[i]));
  return total / static_cast<double>(scores.size());
}

// Alternating projections onto B(0, ball_R) and B(center, radius); both
// constraints hold within 1e-10 on exit (<= 100 rounds).
Vec project_intersection(Vec w, double ball_R, const TrustRegion& trust) {
  for (int round = 0; round < 100; ++round) {
    double n1 = w.norm();
    if (n1 > ball_R) w *= ball_R / n1;
    Vec delta = w - trust.center;
    double n2 = delta.norm();
    if (n2 > trust.radius) w = trust.center + delta * (trust.radius / n2);
    if (w.norm() <= ball_R + 1e-10 && (w - trust.center).norm() <= trust.radius + 1e-10)
      break;
  }
  return w;
}

}  // namespace

double unlabeled_gaussian_objective(MarginLossKind phi, const GaussianMixtureDomain& domain,
                                    const Vec& w, int mc_samples, std::uint64_t seed) {
  Mat samples = draw_unlabeled(domain, mc_samples, seed);
  return mc_objective(phi, samples, w);
}

Vec minimize_unlabeled_gaussian(MarginLossKind phi, const GaussianMixtureDomain& domain,
                                double ball_R, const TrustRegion& trust,
                                int mc_samples, const SolverConfig& cfg) {
  if (mc_samples < 1000)
    throw std::invalid_argument("minimize_unlabeled_gaussian: mc_samples < 1000");
  if (!(trust.radius > 0.0))
    throw std::invalid_argument("minimize_unlabeled_gaussian: trust radius <= 0");
  if (trust.center.norm() - trust.radius > ball_R + 1e-12)
    throw std::invalid_argument(
        "minimize_unlabeled_gaussian: trust region does not meet the norm ball");

  // Common random numbers: one fixed sample set defines the objective for
  // every restart and iteration.
  Mat samples = draw_unlabeled(domain, mc_samples, mix_seed(cfg.seed, 0x554e4c42));
  auto eval = [&](const Vec& w) { return mc_objective(phi, samples, w); };

  std::vector<Vec> starts;
  starts.push_back(project_intersection(trust.center, ball_R, trust));
  Rng rng = make_rng(cfg.seed, 0x4d554c54);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < cfg.restarts; ++r) {
    Vec dir(domain.dim());
    for (int k = 0; k < domain.dim(); ++k) dir[k] = normal(rng);
    if (dir.norm() > 0) dir *= trust.radius / dir.norm();
    starts.push_back(project_intersection(trust.center + dir, ball_R, trust));
  }

  Vec best_w = starts.front();
  double best_value = eval(best_w);
  const int iters = std::max(cfg.max_iters, 100);
  for (const Vec& start : starts) {
    Vec w = start;
    double value = eval(w);
    Vec local_best = w;
    double local_value = value;
    for (int iter = 1; iter <= iters; ++iter) {
      Vec scores = samples * w;
      Vec coef(scores.size());
      for (Eigen::Index i = 0; i < scores.size(); ++i) {
        double m = std::abs(scores[i]);
        double g;
        switch (phi) {
          case MarginLossKind::Ramp: g = (m < 1.0) ? -1.0 : 0.0; break;
          case MarginLossKind::Hinge: g = (m < 1.0) ? -1.0 : 0.0; break;
          case MarginLossKind::Logistic: g = -1.0 / (1.0 + std::exp(m)); break;
          default: g = 0.0; break;
        }
        coef[i] = g * (scores[i] >= 0 ? 1.0 : -1.0);
      }
      Vec grad = samples.transpose() * coef / static_cast<double>(mc_samples);
      // Normalized subgradient steps: the ramp's active slab can be a small
      // tail of the sample, leaving raw gradients too weak to traverse the
      // flat basin within the iteration budget.
      double gn = grad.norm();
      if (gn > 1e-12) grad /= gn;
      w = project_intersection(w - cfg.step.at(iter, 0.3) * grad, ball_R, trust);
      double v = eval(w);
      if (v < local_value) {
        local_value = v;
        local_best = w;
      }
    }
    // Geometric-decay polish around the best iterate.
    double step = cfg.step.resolve(0.3);
    w = local_best;
    for (int k = 0; k < 80; ++k) {
      step *= 0.85;
      Vec scores = samples * w;
      Vec coef(scores.size());
      for (Eigen::Index i = 0; i < scores.size(); ++i) {
        double m = std::abs(scores[i]);
        double g;
        switch (phi) {
          case MarginLossKind::Ramp: g = (m < 1.0) ? -1.0 : 0.0; break;
          case MarginLossKind::Hinge: g = (m < 1.0) ? -1.0 : 0.0; break;
          case MarginLossKind::Logistic: g = -1.0 / (1.0 + std::exp(m)); break;
          default: g = 0.0; break;
        }
        coef[i] = g * (scores[i] >= 0 ? 1.0 : -1.0);
      }
      Vec grad = samples.transpose() * coef / static_cast<double>(mc_samples);
      double gn = grad.norm();
      if (gn > 1e-12) grad /= gn;
      w = project_intersection(w - step * grad, ball_R, trust);
      double v = eval(w);
      if (v < local_value) {
        local_value = v;
        local_best = w;
      }
    }
    if (local_value < best_value) {
      best_value = local_value;
      best_w = local_best;
    }
  }
  return best_w;
}

Vec w_star(const Vec& mu) {
  double norm = mu.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("w_star: zero mean vector");
  return mu / norm;
}

}  // namespace gda

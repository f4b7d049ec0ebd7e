#pragma once

#include <cstdint>
#include <stdexcept>

#include "gda/distributions.hpp"
#include "gda/models.hpp"

namespace gda {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepSchedule {
  // initial <= 0 means "auto": each solver substitutes its own safe default
  // (0.1 for subgradient paths, the inverse curvature bound for logistic).
  double initial = 0.0;
  enum class Decay { InvSqrt, Constant } decay = Decay::InvSqrt;

  double at(int iter, double fallback) const;  // iter >= 1
  double resolve(double fallback) const { return initial > 0 ? initial : fallback; }
};

struct SolverConfig {
  int max_iters = 2000;
  StepSchedule step;
  int restarts = 3;
  double tolerance = 1e-7;
  int grid_resolution = 2001;
  int batch_size = 0;  // 0 = full batch
  // Gradient flavor for the logistic paths. Adaptive moment steps escape the
  // self-consistent pseudolabel fixed points that stall plain descent.
  enum class Flavor { Sgd, Adam } flavor = Flavor::Sgd;
  std::uint64_t seed = 0;
};

struct TrustRegion {
  Vec center;
  double radius = 0.5;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Constrained empirical risk minimization over ||w|| <= R.
/// Hinge/Logistic: projected subgradient descent (projection = radial scaling),
/// warm-started at `warm_start` when given, else at zero.
/// Ramp: concave-convex procedure on the split r(m) = hinge(m) - max(-m, 0),
/// wrapped in `cfg.restarts` random restarts plus the warm start.
/// The returned objective never exceeds the objective at the warm start.
LinearModel erm_constrained(MarginLossKind kind, const DiscreteDistribution& data,
                            double R, const SolverConfig& cfg,
                            const LinearModel* warm_start = nullptr);

/// Grid solver for d <= 2 and at most 64 atoms: dense direction/magnitude/bias
/// scan refined by local coordinate search. Equal-objective ties resolve to
/// the candidate nearest `anchor` when one is given.
LinearModel erm_exact_1d2d(MarginLossKind kind, const DiscreteDistribution& data,
                           double R, int grid, Interval bias_range,
                           const LinearModel* anchor = nullptr);

/// Mean logistic loss + lambda*||w||^2 by (mini-batch) gradient descent with a
/// seed-fixed ordering; `epochs` full passes. Deterministic given cfg.seed.
LinearModel penalized_logistic(const DiscreteDistribution& data, double lambda,
                               int epochs, const SolverConfig& cfg,
                               const LinearModel* warm_start = nullptr);

/// Soft-target variant: minimizes E[xent(sigmoid(teacher score), sigmoid(student
/// score))] + lambda*||w||^2 over the points, warm-started at the teacher.
LinearModel penalized_soft_logistic(const std::vector<Vec>& xs,
                                    const LinearModel& teacher, double lambda,
                                    int epochs, const SolverConfig& cfg);

/// Monte-Carlo estimate of the unlabeled objective E[phi(|w.x|)] under the
/// domain's X-marginal, with the sample fixed by (mc_samples, cfg seed).
double unlabeled_gaussian_objective(MarginLossKind phi, const GaussianMixtureDomain& domain,
                                    const Vec& w, int mc_samples, std::uint64_t seed);

/// Projected gradient descent on the Monte-Carlo unlabeled objective over
/// {||w|| <= ball_R} intersect {||w - trust.center|| <= trust.radius}
/// (alternating projections, <= 100 rounds, both constraints within 1e-10).
/// Multi-start from trust.center plus cfg.restarts random feasible points.
Vec minimize_unlabeled_gaussian(MarginLossKind phi, const GaussianMixtureDomain& domain,
                                double ball_R, const TrustRegion& trust,
                                int mc_samples, const SolverConfig& cfg);

/// mu / ||mu||; throws on the zero vector.
Vec w_star(const Vec& mu);

}  // namespace gda

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gda/distributions.hpp"
#include "gda/models.hpp"
#include "gda/optimize.hpp"
#include "json.hpp"

namespace gda {

/// Drifting Gaussian benchmark recipe: random endpoint means/covariances,
/// linear interpolation in between, one unlabeled point per step.
struct GaussianDriftSpec {
  int d = 100;
  int n_labeled = 500;        // N
  int n_unlabeled_total = 5000;  // T
  double min_var = 0.05;
  double max_var = 0.1;
  int n_target_eval = 1000;
  std::uint64_t seed = 0;
};

/// Source/target endpoint domains drawn exactly as gen_gaussian_drift draws
/// them (means ~ N(0,I), covariances U D U^T with Haar U).
std::pair<GaussianMixtureDomain, GaussianMixtureDomain> drift_endpoints(
    const GaussianDriftSpec& spec);

DomainSequence gen_gaussian_drift(const GaussianDriftSpec& spec);

/// Intermediate domain i in 1..n_domains mixes source-law and target-law
/// points with weights (K-i)/K and i/K. Per-point laws are endpoints, never
/// interpolated: small total-variation steps, large per-point transport.
DomainSequence gen_mixing_interpolation(const GaussianMixtureDomain& source_domain,
                                        const GaussianMixtureDomain& target_domain,
                                        int n_domains, int n_per_domain,
                                        int n_source_labeled, int n_target_eval,
                                        std::uint64_t seed);

/// Two antipodal classes in 2-D, each split into a minor cluster (30% of the
/// class) and a major cluster (70%) on the annulus radius_band; domain t
/// rotates every point by t*(total_angle/n_domains). Per-step W-infinity is
/// bounded by 2*r_max*sin(step/2).
DomainSequence gen_rotation_drift(int n_points, int n_domains, double total_angle_deg,
                                  Interval radius_band, std::uint64_t seed);

struct CounterexampleSpec {
  enum class Kind { BaselinesFail, Exponential, HingeBad, NoShiftDoubling };
  Kind kind = Kind::BaselinesFail;
  double alpha0 = 0.0;  // Exponential (0 < alpha0 <= 1/4), NoShiftDoubling
  int T = 1;            // Exponential
  double alpha = 0.0;   // HingeBad (> 0)
  double eps = 0.0;     // NoShiftDoubling (0 < eps < alpha0 < 0.25)
};

/// Exact-coordinate construction: domain list P_0..P_k, the prescribed initial
/// model, the norm budget, and the claimed values the theory module asserts.
struct Counterexample {
  std::vector<DiscreteDistribution> domains;
  LinearModel theta0;
  double R = 1.0;
  nlohmann::json expected;
};

Counterexample gen_counterexample(const CounterexampleSpec& spec);

}  // namespace gda

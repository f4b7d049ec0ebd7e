#pragma once

#include <vector>

#include "gda/distributions.hpp"

namespace gda {

struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Kantorovich W-infinity between the X-marginals of two discrete measures:
/// min over couplings of the max transported distance. Binary search over the
/// distinct pairwise distances; feasibility at a threshold checked by max-flow
/// on the cost-restricted bipartite graph (Hopcroft-Karp matching for
/// equal-count uniform supports). Masses are scaled to integers through
/// rational approximation (denominator cap 1e6).
double winf_discrete(const DiscreteDistribution& P, const DiscreteDistribution& Q);

/// max over y in {-1,+1} of W_inf(P_{X|Y=y}, Q_{X|Y=y}). Requires both classes
/// present on both sides; when `require_no_label_shift`, the label marginals
/// must match within 1e-12.
double rho_conditional(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                       bool require_no_label_shift = true);

/// Oracle for winf_discrete, restricted to a combined support of at most
/// 8 atoms: every distinct cost is tried as the threshold in ascending order
/// and feasibility is decided by the exact Hall condition over all subsets of
/// the source support.
double winf_bruteforce(const DiscreteDistribution& P, const DiscreteDistribution& Q);

/// True iff every consecutive pair satisfies rho(P_t, P_{t+1}) <= rho_max with
/// rho_max < 1/R.
bool gradual_shift_gate(const std::vector<DiscreteDistribution>& sequence, double R,
                        double rho_max);

}  // namespace gda

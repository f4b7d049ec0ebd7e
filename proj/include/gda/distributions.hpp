#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace gda {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One labeled example. Labels are -1/+1 integers everywhere; nothing else
/// is accepted.
struct LabeledPoint {
  Vec x;
  int y = 1;
};

/// Finite labeled measure: atoms (x, y, mass) with strictly positive masses
/// summing to 1. Duplicate (x, y) atoms are merged on construction using
/// exact bitwise equality of coordinates, so rational-coordinate
/// constructions keep their masses intact.
class DiscreteDistribution {
 public:
  struct Atom {
    Vec x;
    int y = 1;
    double mass = 0.0;
  };

  DiscreteDistribution() = default;
  explicit DiscreteDistribution(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  int size() const { return static_cast<int>(atoms_.size()); }
  int dim() const;
  double total_mass() const;
  double class_mass(int y) const;

  /// Renormalized distribution of X given Y = y. Throws if the class is absent.
  DiscreteDistribution conditional(int y) const;

  /// Marginal on X: labels dropped (stored as +1), same-x atoms merged.
  DiscreteDistribution x_marginal() const;

  /// Same support, labels replaced by `labels[i]` for atom i (masses kept,
  /// duplicates re-merged).
  DiscreteDistribution relabeled(const std::vector<int>& labels) const;

 private:
  std::vector<Atom> atoms_;
};

/// Two-class Gaussian domain: per-class mean and covariance plus class prior.
/// Covariances must be symmetric (1e-10) and PSD (min eigenvalue >= -1e-10).
/// Rank-deficient covariances are allowed; sampling falls back from Cholesky
/// to an eigendecomposition transform.
class GaussianMixtureDomain {
 public:
  GaussianMixtureDomain(Vec mu_pos, Vec mu_neg, Mat sigma_pos, Mat sigma_neg,
                        double prior_pos = 0.5, bool no_label_shift = false);

  const Vec& mu(int y) const { return y > 0 ? mu_pos_ : mu_neg_; }
  const Mat& sigma(int y) const { return y > 0 ? sigma_pos_ : sigma_neg_; }
  const Mat& transform(int y) const { return y > 0 ? chol_pos_ : chol_neg_; }
  double prior_pos() const { return prior_pos_; }
  int dim() const { return static_cast<int>(mu_pos_.size()); }

 private:
  Vec mu_pos_, mu_neg_;
  Mat sigma_pos_, sigma_neg_;
  Mat chol_pos_, chol_neg_;  // x = mu + L z, z ~ N(0, I)
  double prior_pos_ = 0.5;
};

/// Ordered source + intermediate + target data for one adaptation run.
/// `target_eval` labels are only ever consumed by evaluation helpers; no
/// training operation accepts them.
struct DomainSequence {
  std::vector<LabeledPoint> source_labeled;
  // Temporal order t = 1..T. Either one flat pool (windowed at train time)
  // or pre-split per-domain sets.
  std::vector<std::vector<Vec>> intermediate_unlabeled;
  // Unlabeled draws from the target law, sized to match the intermediate
  // total so direct-to-target baselines see as much data as gradual runs.
  std::vector<Vec> target_unlabeled;
  std::vector<LabeledPoint> target_eval;

  struct Meta {
    std::string generator;
    nlohmann::json params;
    std::uint64_t seed = 0;
    bool flat_pool = false;  // true: single pool to be split into W-windows
  } meta;

  int intermediate_total() const {
    int n = 0;
    for (const auto& dom : intermediate_unlabeled) n += static_cast<int>(dom.size());
    return n;
  }
};

/// n i.i.d. draws; label ~ Bernoulli(prior_pos) mapped to {+1,-1}, then
/// x ~ N(mu_y, sigma_y). Deterministic given seed.
std::vector<LabeledPoint> sample_domain(const GaussianMixtureDomain& domain, int n,
                                        std::uint64_t seed);

/// Unlabeled variant of sample_domain (labels drawn and discarded, same stream).
std::vector<Vec> sample_domain_unlabeled(const GaussianMixtureDomain& domain, int n,
                                         std::uint64_t seed);

/// Uniform mass 1/n per point, duplicates merged with summed mass.
DiscreteDistribution empirical_distribution(const std::vector<LabeledPoint>& points);

/// E[||X||_2^2] under the atom masses (the bounded-data constant squared).
double second_moment_bound(const DiscreteDistribution& dist);

}  // namespace gda

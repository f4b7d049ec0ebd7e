#include "gda/distributions.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <stdexcept>

#include "gda/rng.hpp"

namespace gda {

namespace {

// Exact bitwise key for duplicate-atom merging. Tolerance-based merging would
// corrupt masses on the rational-coordinate constructions.
std::string atom_key(const Vec& x, int y) {
  std::string key;
  key.resize(sizeof(double) * static_cast<size_t>(x.size()) + sizeof(int));
  std::memcpy(key.data(), x.data(), sizeof(double) * static_cast<size_t>(x.size()));
  std::memcpy(key.data() + key.size() - sizeof(int), &y, sizeof(int));
  return key;
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("DiscreteDistribution: no atoms");
  const int d = static_cast<int>(atoms.front().x.size());
  std::map<std::string, size_t> index;
  for (auto& a : atoms) {
    if (a.y != 1 && a.y != -1)
      throw std::invalid_argument("DiscreteDistribution: label must be -1 or +1");
    if (static_cast<int>(a.x.size()) != d)
      throw std::invalid_argument("DiscreteDistribution: inconsistent dimensions");
    if (!(a.mass > 0.0))
      throw std::invalid_argument("DiscreteDistribution: masses must be strictly positive");
    auto key = atom_key(a.x, a.y);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(std::move(key), atoms_.size());
      atoms_.push_back(std::move(a));
    } else {
      atoms_[it->second].mass += a.mass;
    }
  }
  double total = total_mass();
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("DiscreteDistribution: masses sum to " +
                                std::to_string(total) + ", expected 1");
}

int DiscreteDistribution::dim() const {
  if (atoms_.empty()) throw std::invalid_argument("DiscreteDistribution: empty");
  return static_cast<int>(atoms_.front().x.size());
}

double DiscreteDistribution::total_mass() const {
  double total = 0.0;
  for (const auto& a : atoms_) total += a.mass;
  return total;
}

double DiscreteDistribution::class_mass(int y) const {
  double total = 0.0;
  for (const auto& a : atoms_)
    if (a.y == y) total += a.mass;
  return total;
}

DiscreteDistribution DiscreteDistribution::conditional(int y) const {
  double cls = class_mass(y);
  if (cls <= 0.0)
    throw std::invalid_argument("DiscreteDistribution: class " + std::to_string(y) +
                                " absent");
  std::vector<Atom> out;
  for (const auto& a : atoms_)
    if (a.y == y) out.push_back({a.x, a.y, a.mass / cls});
  return DiscreteDistribution(std::move(out));
}

DiscreteDistribution DiscreteDistribution::x_marginal() const {
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back({a.x, 1, a.mass});
  return DiscreteDistribution(std::move(out));
}

DiscreteDistribution DiscreteDistribution::relabeled(const std::vector<int>& labels) const {
  if (labels.size() != atoms_.size())
    throw std::invalid_argument("relabeled: label count mismatch");
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (size_t i = 0; i < atoms_.size(); ++i)
    out.push_back({atoms_[i].x, labels[i], atoms_[i].mass});
  return DiscreteDistribution(std::move(out));
}

GaussianMixtureDomain::GaussianMixtureDomain(Vec mu_pos, Vec mu_neg, Mat sigma_pos,
                                             Mat sigma_neg, double prior_pos,
                                             bool no_label_shift)
    : mu_pos_(std::move(mu_pos)),
      mu_neg_(std::move(mu_neg)),
      sigma_pos_(std::move(sigma_pos)),
      sigma_neg_(std::move(sigma_neg)),
      prior_pos_(prior_pos) {
  const auto d = mu_pos_.size();
  if (mu_neg_.size() != d || sigma_pos_.rows() != d || sigma_pos_.cols() != d ||
      sigma_neg_.rows() != d || sigma_neg_.cols() != d)
    throw std::invalid_argument("GaussianMixtureDomain: dimension mismatch");
  if (!(prior_pos_ >= 0.0 && prior_pos_ <= 1.0))
    throw std::invalid_argument("GaussianMixtureDomain: prior outside [0,1]");
  if (no_label_shift && prior_pos_ != 0.5)
    throw std::invalid_argument(
        "GaussianMixtureDomain: no-label-shift requires prior 0.5");

  auto factor = [](const Mat& sigma) {
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("GaussianMixtureDomain: covariance not symmetric");
    Mat sym = 0.5 * (sigma + sigma.transpose());
    Eigen::LLT<Mat> llt(sym);
    if (llt.info() == Eigen::Success) return Mat(llt.matrixL());
    // Semidefinite fallback: eigendecomposition with negative residuals
    // clamped to zero (point-mass limits are allowed).
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    if (eig.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("GaussianMixtureDomain: covariance not PSD");
    Vec roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Mat(eig.eigenvectors() * roots.asDiagonal());
  };
  chol_pos_ = factor(sigma_pos_);
  chol_neg_ = factor(sigma_neg_);
}

std::vector<LabeledPoint> sample_domain(const GaussianMixtureDomain& domain, int n,
                                        std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_domain: n must be >= 1");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = domain.dim();
  std::vector<LabeledPoint> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int y = unif(rng) < domain.prior_pos() ? 1 : -1;
    Vec z(d);
    for (int k = 0; k < d; ++k) z[k] = normal(rng);
    out.push_back({domain.mu(y) + domain.transform(y) * z, y});
  }
  return out;
}

std::vector<Vec> sample_domain_unlabeled(const GaussianMixtureDomain& domain, int n,
                                         std::uint64_t seed) {
  auto labeled = sample_domain(domain, n, seed);
  std::vector<Vec> out;
  out.reserve(labeled.size());
  for (auto& p : labeled) out.push_back(std::move(p.x));
  return out;
}

DiscreteDistribution empirical_distribution(const std::vector<LabeledPoint>& points) {
  if (points.empty()) throw std::invalid_argument("empirical_distribution: empty list");
  const double mass = 1.0 / static_cast<double>(points.size());
  std::vector<DiscreteDistribution::Atom> atoms;
  atoms.reserve(points.size());
  for (const auto& p : points) atoms.push_back({p.x, p.y, mass});
  return DiscreteDistribution(std::move(atoms));
}

double second_moment_bound(const DiscreteDistribution& dist) {
  double total = 0.0;
  for (const auto& a : dist.atoms()) total += a.mass * a.x.squaredNorm();
  return total;
}

}  // namespace gda

#include "gda/wasserstein.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

namespace gda {

namespace {

struct Marginal {
  std::vector<Vec> x;
  std::vector<double> mass;
};

Marginal to_marginal(const DiscreteDistribution& dist) {
  auto m = dist.x_marginal();
  Marginal out;
  for (const auto& a : m.atoms()) {
    out.x.push_back(a.x);
    out.mass.push_back(a.mass);
  }
  return out;
}

// Best rational approximation p/q with q <= max_den (continued fractions).
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

Fraction rationalize(double v, std::int64_t max_den) {
  // Continued-fraction convergents p_n/q_n with the standard recurrence;
  // the first convergent whose error clears 1e-9 wins (smallest denominator).
  std::int64_t p_prev2 = 0, p_prev = 1;
  std::int64_t q_prev2 = 1, q_prev = 0;
  double x = v;
  Fraction best{std::llround(v), 1};
  double best_err = std::abs(v - static_cast<double>(best.num));
  for (int it = 0; it < 64; ++it) {
    double a_f = std::floor(x);
    auto a = static_cast<std::int64_t>(a_f);
    std::int64_t p = a * p_prev + p_prev2;
    std::int64_t q = a * q_prev + q_prev2;
    if (q > max_den || q <= 0) break;
    double err = std::abs(v - static_cast<double>(p) / static_cast<double>(q));
    if (err < best_err) {
      best = {p, q};
      best_err = err;
    }
    if (best_err <= 1e-12) break;
    p_prev2 = p_prev;
    p_prev = p;
    q_prev2 = q_prev;
    q_prev = q;
    double frac = x - a_f;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  return best;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

// Scales both mass vectors to a shared integer grid. Throws PrecisionError
// when a mass has no small-denominator rational representation or the common
// denominator overflows the integer budget.
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> scale_masses(
    const std::vector<double>& p, const std::vector<double>& q) {
  constexpr std::int64_t kMaxDen = 1000000;
  constexpr std::int64_t kMaxScaled = 4000000000000000LL;  // headroom under 2^62
  std::int64_t lcm = 1;
  auto fold = [&](double v) {
    Fraction f = rationalize(v, kMaxDen);
    if (std::abs(v - static_cast<double>(f.num) / static_cast<double>(f.den)) > 1e-9)
      throw PrecisionError("winf: mass " + std::to_string(v) +
                           " has no rational approximation with denominator <= 1e6");
    std::int64_t g = gcd64(lcm, f.den);
    double projected = static_cast<double>(lcm) / static_cast<double>(g) *
                       static_cast<double>(f.den);
    if (projected > static_cast<double>(kMaxScaled))
      throw PrecisionError("winf: common denominator overflow at denominator " +
                           std::to_string(f.den));
    lcm = lcm / g * f.den;
  };
  for (double v : p) fold(v);
  for (double v : q) fold(v);
  auto scale = [&](const std::vector<double>& m) {
    std::vector<std::int64_t> out;
    out.reserve(m.size());
    for (double v : m) out.push_back(std::llround(v * static_cast<double>(lcm)));
    return out;
  };
  auto sp = scale(p);
  auto sq = scale(q);
  std::int64_t tp = std::accumulate(sp.begin(), sp.end(), std::int64_t{0});
  std::int64_t tq = std::accumulate(sq.begin(), sq.end(), std::int64_t{0});
  if (tp != tq)
    throw std::invalid_argument("winf: unbalanced masses (" + std::to_string(tp) +
                                " vs " + std::to_string(tq) + " after scaling)");
  return {std::move(sp), std::move(sq)};
}

// ---------------------------------------------------------------------------
// Dinic max-flow on the threshold-restricted bipartite transport graph.

class Dinic {
 public:
  explicit Dinic(int n) : head_(static_cast<size_t>(n), -1), level_(n), it_(n), n_(n) {}

  void add_edge(int u, int v, std::int64_t cap) {
    edges_.push_back({v, head_[static_cast<size_t>(u)], cap});
    head_[static_cast<size_t>(u)] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[static_cast<size_t>(v)], 0});
    head_[static_cast<size_t>(v)] = static_cast<int>(edges_.size()) - 1;
  }

  std::int64_t max_flow(int s, int t) {
    std::int64_t flow = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      for (int i = 0; i < n_; ++i) it_[static_cast<size_t>(i)] = head_[static_cast<size_t>(i)];
      while (std::int64_t pushed = dfs(s, t, INT64_MAX)) flow += pushed;
    }
    return flow;
  }

 private:
  struct Edge {
    int to;
    int next;
    std::int64_t cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[static_cast<size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e = head_[static_cast<size_t>(u)]; e != -1; e = edges_[static_cast<size_t>(e)].next) {
        const auto& ed = edges_[static_cast<size_t>(e)];
        if (ed.cap > 0 && level_[static_cast<size_t>(ed.to)] < 0) {
          level_[static_cast<size_t>(ed.to)] = level_[static_cast<size_t>(u)] + 1;
          q.push(ed.to);
        }
      }
    }
    return level_[static_cast<size_t>(t)] >= 0;
  }

  std::int64_t dfs(int u, int t, std::int64_t limit) {
    if (u == t || limit == 0) return limit;
    for (int& e = it_[static_cast<size_t>(u)]; e != -1; e = edges_[static_cast<size_t>(e)].next) {
      auto& ed = edges_[static_cast<size_t>(e)];
      if (ed.cap > 0 && level_[static_cast<size_t>(ed.to)] == level_[static_cast<size_t>(u)] + 1) {
        std::int64_t pushed = dfs(ed.to, t, std::min(limit, ed.cap));
        if (pushed > 0) {
          ed.cap -= pushed;
          edges_[static_cast<size_t>(e ^ 1)].cap += pushed;
          return pushed;
        }
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> it_;
  int n_;
};

// ---------------------------------------------------------------------------
// Hopcroft-Karp maximum matching, for equal-count uniform supports where
// threshold feasibility is a perfect-matching question.

class HopcroftKarp {
 public:
  HopcroftKarp(int n_left, int n_right)
      : adj_(static_cast<size_t>(n_left)),
        match_l_(static_cast<size_t>(n_left), -1),
        match_r_(static_cast<size_t>(n_right), -1),
        dist_(static_cast<size_t>(n_left)),
        n_left_(n_left) {}

  void add_edge(int u, int v) { adj_[static_cast<size_t>(u)].push_back(v); }

  int matching() {
    int result = 0;
    while (bfs()) {
      for (int u = 0; u < n_left_; ++u)
        if (match_l_[static_cast<size_t>(u)] < 0 && dfs(u)) ++result;
    }
    return result;
  }

 private:
  static constexpr int kInf = 1 << 30;

  bool bfs() {
    std::queue<int> q;
    for (int u = 0; u < n_left_; ++u) {
      if (match_l_[static_cast<size_t>(u)] < 0) {
        dist_[static_cast<size_t>(u)] = 0;
        q.push(u);
      } else {
        dist_[static_cast<size_t>(u)] = kInf;
      }
    }
    bool found = false;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj_[static_cast<size_t>(u)]) {
        int w = match_r_[static_cast<size_t>(v)];
        if (w < 0) {
          found = true;
        } else if (dist_[static_cast<size_t>(w)] == kInf) {
          dist_[static_cast<size_t>(w)] = dist_[static_cast<size_t>(u)] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(int u) {
    for (int v : adj_[static_cast<size_t>(u)]) {
      int w = match_r_[static_cast<size_t>(v)];
      if (w < 0 || (dist_[static_cast<size_t>(w)] == dist_[static_cast<size_t>(u)] + 1 && dfs(w))) {
        match_l_[static_cast<size_t>(u)] = v;
        match_r_[static_cast<size_t>(v)] = u;
        return true;
      }
    }
    dist_[static_cast<size_t>(u)] = kInf;
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> match_l_, match_r_;
  std::vector<int> dist_;
  int n_left_;
};

Mat cost_matrix(const Marginal& p, const Marginal& q) {
  Mat cost(p.x.size(), q.x.size());
  for (size_t i = 0; i < p.x.size(); ++i)
    for (size_t j = 0; j < q.x.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (p.x[i] - q.x[j]).norm();
  return cost;
}

std::vector<double> distinct_costs(const Mat& cost) {
  std::vector<double> costs(cost.data(), cost.data() + cost.size());
  std::sort(costs.begin(), costs.end());
  costs.erase(std::unique(costs.begin(), costs.end()), costs.end());
  return costs;
}

bool uniform_equal_count(const Marginal& p, const Marginal& q) {
  if (p.x.size() != q.x.size()) return false;
  auto uniform = [](const std::vector<double>& m) {
    double expect = 1.0 / static_cast<double>(m.size());
    for (double v : m)
      if (std::abs(v - expect) > 1e-12) return false;
    return true;
  };
  return uniform(p.mass) && uniform(q.mass);
}

}  // namespace

double winf_discrete(const DiscreteDistribution& P, const DiscreteDistribution& Q) {
  Marginal p = to_marginal(P);
  Marginal q = to_marginal(Q);
  if (P.dim() != Q.dim())
    throw std::invalid_argument("winf_discrete: dimension mismatch");
  Mat cost = cost_matrix(p, q);
  const auto np = static_cast<int>(p.x.size());
  const auto nq = static_cast<int>(q.x.size());

  std::function<bool(double)> feasible;
  std::vector<std::int64_t> sp, sq;
  std::int64_t total = 0;
  const bool matching_path = uniform_equal_count(p, q);
  if (!matching_path) {
    std::tie(sp, sq) = scale_masses(p.mass, q.mass);
    total = std::accumulate(sp.begin(), sp.end(), std::int64_t{0});
  }

  feasible = [&](double tau) {
    const double slack = tau + 1e-12;
    if (matching_path) {
      HopcroftKarp hk(np, nq);
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < nq; ++j)
          if (cost(i, j) <= slack) hk.add_edge(i, j);
      return hk.matching() == np;
    }
    Dinic dinic(np + nq + 2);
    const int src = np + nq, sink = np + nq + 1;
    for (int i = 0; i < np; ++i) dinic.add_edge(src, i, sp[static_cast<size_t>(i)]);
    for (int j = 0; j < nq; ++j) dinic.add_edge(np + j, sink, sq[static_cast<size_t>(j)]);
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < nq; ++j)
        if (cost(i, j) <= slack) dinic.add_edge(i, np + j, total);
    return dinic.max_flow(src, sink) == total;
  };

  auto costs = distinct_costs(cost);
  // Smallest feasible threshold among the distinct costs; the full graph is
  // always feasible, so the search is well defined.
  int lo = 0, hi = static_cast<int>(costs.size()) - 1;
  if (feasible(costs[0])) return costs[0];
  assert(feasible(costs[static_cast<size_t>(hi)]));
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    if (feasible(costs[static_cast<size_t>(mid)]))
      hi = mid;
    else
      lo = mid;
  }
  return costs[static_cast<size_t>(hi)];
}

double rho_conditional(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                       bool require_no_label_shift) {
  for (int y : {1, -1}) {
    if (P.class_mass(y) <= 0.0 || Q.class_mass(y) <= 0.0)
      throw std::invalid_argument("rho_conditional: class " + std::to_string(y) +
                                  " absent on one side");
  }
  if (require_no_label_shift &&
      std::abs(P.class_mass(1) - Q.class_mass(1)) > 1e-12)
    throw std::invalid_argument(
        "rho_conditional: label marginals differ under the no-label-shift assumption");
  double w_pos = winf_discrete(P.conditional(1), Q.conditional(1));
  double w_neg = winf_discrete(P.conditional(-1), Q.conditional(-1));
  return std::max(w_pos, w_neg);
}

double winf_bruteforce(const DiscreteDistribution& P, const DiscreteDistribution& Q) {
  Marginal p = to_marginal(P);
  Marginal q = to_marginal(Q);
  if (p.x.size() + q.x.size() > 8 + 8)
    throw std::invalid_argument("winf_bruteforce: support too large for the oracle");
  if (p.x.size() > 8 || q.x.size() > 8)
    throw std::invalid_argument("winf_bruteforce: support too large for the oracle");
  double tp = std::accumulate(p.mass.begin(), p.mass.end(), 0.0);
  double tq = std::accumulate(q.mass.begin(), q.mass.end(), 0.0);
  if (std::abs(tp - tq) > 1e-9)
    throw std::invalid_argument("winf_bruteforce: unbalanced masses");

  Mat cost = cost_matrix(p, q);
  const auto np = static_cast<size_t>(p.x.size());
  const auto nq = static_cast<size_t>(q.x.size());

  // Transportation feasibility at threshold tau by Gale's condition: for every
  // subset S of source atoms, mass(S) <= mass(neighbors of S under tau).
  auto feasible = [&](double tau) {
    const double slack = tau + 1e-12;
    for (std::uint32_t subset = 1; subset < (1u << np); ++subset) {
      double need = 0.0;
      std::uint32_t reach = 0;
      for (size_t i = 0; i < np; ++i) {
        if (!(subset & (1u << i))) continue;
        need += p.mass[i];
        for (size_t j = 0; j < nq; ++j)
          if (cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= slack)
            reach |= 1u << j;
      }
      double avail = 0.0;
      for (size_t j = 0; j < nq; ++j)
        if (reach & (1u << j)) avail += q.mass[j];
      if (need > avail + 1e-12) return false;
    }
    return true;
  };

  for (double tau : distinct_costs(cost))
    if (feasible(tau)) return tau;
  throw std::logic_error("winf_bruteforce: no feasible threshold (unreachable)");
}

bool gradual_shift_gate(const std::vector<DiscreteDistribution>& sequence, double R,
                        double rho_max) {
  if (!(rho_max < 1.0 / R)) return false;
  for (size_t t = 0; t + 1 < sequence.size(); ++t)
    if (rho_conditional(sequence[t], sequence[t + 1]) > rho_max + 1e-12) return false;
  return true;
}

}  // namespace gda

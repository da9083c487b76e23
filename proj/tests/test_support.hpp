#pragma once

// Independent oracles and generators shared by the test suites. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "mvgad/gnn.hpp"
#include "mvgad/matrix.hpp"

namespace mvgad::oracle {

inline DenseMatrix random_symmetric(std::size_t n, std::mt19937_64& gen,
                                    double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = u(gen);
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

// Cyclic Jacobi rotations; slow but structurally unrelated to the
// Householder/QL path.
inline std::vector<double> jacobi_eigenvalues(DenseMatrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double adjusted_rand_index(const std::vector<int>& a,
                                  const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2.0; };
  double sj = 0, sa = 0, sb = 0;
  for (auto& [k, v] : joint) sj += c2(v);
  for (auto& [k, v] : ra) sa += c2(v);
  for (auto& [k, v] : rb) sb += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (sj - expected) / (max_index - expected);
}

// Probability a random positive outranks a random negative, ties = 1/2.
inline double mann_whitney_auc(const std::vector<double>& scores,
                               const std::vector<bool>& truth) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!truth[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truth[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Direct cut objective from a partition (side A = true).
enum class BruteObjective { ncut, rcut, mcut };

inline double brute_cut(const DenseMatrix& w, const std::vector<bool>& side,
                        BruteObjective obj) {
  double cut = 0, vol_a = 0, vol_b = 0, assoc_a = 0, assoc_b = 0;
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    (side[i] ? na : nb) += 1;
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const double x = w(i, j);
      if (side[i]) vol_a += x; else vol_b += x;
      if (side[i] && side[j]) assoc_a += x;
      if (!side[i] && !side[j]) assoc_b += x;
      if (side[i] && !side[j]) cut += x;
    }
  }
  switch (obj) {
    case BruteObjective::rcut: return cut / na + cut / nb;
    case BruteObjective::ncut: return cut / vol_a + cut / vol_b;
    case BruteObjective::mcut: return cut / assoc_a + cut / assoc_b;
  }
  return 0;
}

// Global minimizer over every bipartition with node 0 on side A.
inline std::pair<double, std::vector<bool>> brute_force_min_cut(
    const DenseMatrix& w, BruteObjective obj) {
  const std::size_t n = w.rows();
  double best = INFINITY;
  std::vector<bool> best_side;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    std::vector<bool> side(n, false);
    side[0] = true;
    std::size_t in_a = 1;
    for (std::size_t i = 1; i < n; ++i) {
      side[i] = (mask >> (i - 1)) & 1;
      in_a += side[i];
    }
    if (in_a == n) continue;
    const double v = brute_cut(w, side, obj);
    if (std::isfinite(v) && v < best) {
      best = v;
      best_side = side;
    }
  }
  return {best, best_side};
}

// Two cliques of `size` nodes with unit weights joined by a single unit edge
// between node size-1 and node size.
inline DenseMatrix barbell(std::size_t size) {
  DenseMatrix w(2 * size, 2 * size);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = 0; j < size; ++j)
        if (i != j) w(c * size + i, c * size + j) = 1.0;
  w(size - 1, size) = 1.0;
  w(size, size - 1) = 1.0;
  return w;
}

}  // namespace mvgad::oracle

namespace mvgad::oracle {

// Two views, each holding two Gaussian blobs (centers +-3 on the first axis,
// unit noise). The first round(rho * m) sample indices after a seeded shuffle
// are put in the opposite blob in view 2.
struct PlantedViews {
  DenseMatrix view1, view2;
  std::vector<bool> flipped;
};

inline PlantedViews planted_inconsistency(std::size_t m, double rho,
                                          std::uint64_t seed, std::size_t dims = 2) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), gen);
  PlantedViews p{DenseMatrix(m, dims), DenseMatrix(m, dims), std::vector<bool>(m, false)};
  const auto n_flip = static_cast<std::size_t>(std::lround(rho * m));
  for (std::size_t i = 0; i < n_flip; ++i) p.flipped[idx[i]] = true;
  for (std::size_t i = 0; i < m; ++i) {
    const int blob = i < m / 2 ? 0 : 1;
    const int blob2 = p.flipped[i] ? 1 - blob : blob;
    for (std::size_t d = 0; d < dims; ++d) {
      p.view1(i, d) = nd(gen) + (d == 0 ? (blob ? 3.0 : -3.0) : 0.0);
      p.view2(i, d) = nd(gen) + (d == 0 ? (blob2 ? 3.0 : -3.0) : 0.0);
    }
  }
  return p;
}

// Fraction of the top-k scored samples that are flagged.
inline double precision_at_k(const std::vector<double>& scores,
                             const std::vector<bool>& flagged, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += flagged[order[i]];
  return static_cast<double>(hits) / static_cast<double>(k);
}

// Two-block SBM snapshot; nodes [0, n/2) are block 0. Features are a block
// offset on the first axis plus unit noise.
inline gnn::GraphSnapshot sbm_snapshot(std::size_t n, double p_in, double p_out,
                                       std::size_t dims, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  gnn::GraphSnapshot g;
  g.n = n;
  g.x = DenseMatrix(n, dims);
  auto block = [&](std::size_t i) { return i < n / 2 ? 0 : 1; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dims; ++d)
      g.x(i, d) = nd(gen) + (d == 0 ? (block(i) ? 1.5 : -1.5) : 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(gen) < (block(i) == block(j) ? p_in : p_out)) g.edges.push_back({i, j, 1.0});
  return g;
}

inline double squared_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace mvgad::oracle

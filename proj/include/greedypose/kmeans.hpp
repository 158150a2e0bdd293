#ifndef GREEDYPOSE_KMEANS_HPP
#define GREEDYPOSE_KMEANS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "greedypose/candidate.hpp"
#include "greedypose/config.hpp"

namespace gpose {

/// Lloyd iterations also stop once the total squared center shift falls below
/// this fraction of the per-point data variance.
inline constexpr double kKMeansTolerance = 1e-4;

struct KMeansResult {
  std::vector<Point> centers;
  /// Center index for each input point, in input order.
  std::vector<std::size_t> membership;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> objective_trace;
  /// Update steps performed.
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Stops when memberships stop
/// changing, when the centers settle, or after `iterations` update steps.
/// When k exceeds the number of points it is clamped to the point count.
inline KMeansResult kmeans(std::span<const Point> points, std::size_t k, int iterations,
                           std::uint64_t seed) {
  if (points.empty()) throw std::invalid_argument("kmeans: empty point set");
  if (k < 1) throw std::invalid_argument("kmeans: k must be at least 1");
  if (iterations < 1) throw std::invalid_argument("kmeans: iterations must be at least 1");

  const std::size_t n = points.size();
  k = std::min(k, n);
  std::mt19937_64 rng(seed);

  KMeansResult r;
  r.centers.reserve(k);
  r.membership.assign(n, 0);

  // k-means++ seeding
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  r.centers.push_back(points[first]);
  chosen[first] = 1;
  while (r.centers.size() < k) {
    const Point& last = r.centers.back();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], last));
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        u -= d2[i];
        if (u < 0.0) break;
      }
    } else {
      // All remaining points coincide with a center.
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = 1;
    r.centers.push_back(points[pick]);
  }

  std::vector<double> sum_x(k), sum_y(k);
  std::vector<std::size_t> count(k);
  std::vector<double> point_d2(n);

  // Center-shift tolerance, relative to the data variance.
  double mean_x = 0.0, mean_y = 0.0;
  for (const Point& p : points) {
    mean_x += p.x;
    mean_y += p.y;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double variance = 0.0;
  for (const Point& p : points) variance += squared_distance(p, {mean_x, mean_y});
  const double shift_tol = kKMeansTolerance * variance / static_cast<double>(n);

  // Hamerly-style bounds skip the full scan for points whose assigned center
  // is provably the unique nearest one. The outcome equals a plain scan: any
  // point near a tie is scanned, and ties go to the lowest center index.
  std::vector<double> lower(n, 0.0);  // lower bound on distance to other centers
  std::vector<double> half_gap(k, 0.0);
  bool bounds_valid = false;
  constexpr double kMargin = 1e-9;

  auto full_scan = [&](std::size_t i) {
    std::size_t best = 0;
    double best_d = squared_distance(points[i], r.centers[0]);
    double second_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 1; c < k; ++c) {
      const double d = squared_distance(points[i], r.centers[c]);
      if (d < best_d) {
        second_d = best_d;
        best_d = d;
        best = c;
      } else if (d < second_d) {
        second_d = d;
      }
    }
    lower[i] = std::sqrt(second_d);
    return std::pair{best, best_d};
  };

  auto assign = [&]() {
    bool changed = false;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = r.membership[i];
      double best_d = squared_distance(points[i], r.centers[best]);
      const double bound = std::max(lower[i], half_gap[best]);
      if (!bounds_valid || std::sqrt(best_d) * (1.0 + kMargin) + kMargin >= bound) {
        std::tie(best, best_d) = full_scan(i);
      }
      if (r.membership[i] != best) changed = true;
      r.membership[i] = best;
      point_d2[i] = best_d;
      sse += best_d;
    }
    r.objective_trace.push_back(sse);
    bounds_valid = true;
    return changed;
  };

  // Loosens the bounds after centers moved from `old`.
  std::vector<Point> old(k);
  auto update_bounds = [&]() {
    double max_move = 0.0;
    for (std::size_t c = 0; c < k; ++c) max_move = std::max(max_move, distance(old[c], r.centers[c]));
    for (double& l : lower) l -= max_move;
    for (std::size_t c = 0; c < k; ++c) {
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < k; ++o) {
        if (o != c) gap = std::min(gap, distance(r.centers[c], r.centers[o]));
      }
      half_gap[c] = k > 1 ? 0.5 * gap : std::numeric_limits<double>::infinity();
    }
  };

  assign();
  // Each iteration is an update step followed by a reassignment, so the final
  // memberships always refer to the final centers.
  for (int it = 0; it < iterations; ++it) {
    std::fill(sum_x.begin(), sum_x.end(), 0.0);
    std::fill(sum_y.begin(), sum_y.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    old = r.centers;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = r.membership[i];
      sum_x[c] += points[i].x;
      sum_y[c] += points[i].y;
      ++count[c];
    }
    double shift = 0.0;
    bool reseeded = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) {
        const Point moved{sum_x[c] / static_cast<double>(count[c]),
                          sum_y[c] / static_cast<double>(count[c])};
        shift += squared_distance(moved, r.centers[c]);
        r.centers[c] = moved;
        continue;
      }
      reseeded = true;
      // Empty cluster: re-seed at the point farthest from its center.
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (point_d2[i] > point_d2[far]) far = i;
      }
      r.centers[c] = points[far];
      point_d2[far] = 0.0;
    }
    update_bounds();
    const bool changed = assign();
    r.iterations = it + 1;
    if (!changed && !reseeded) break;
    if (!reseeded && shift <= shift_tol) break;
  }
  return r;
}

namespace detail {

inline std::vector<Candidate> sorted_by_id(std::span<const Candidate> cands) {
  std::vector<Candidate> out(cands.begin(), cands.end());
  auto by_id = [](const Candidate& a, const Candidate& b) { return a.id < b.id; };
  if (!std::is_sorted(out.begin(), out.end(), by_id)) std::sort(out.begin(), out.end(), by_id);
  return out;
}

}  // namespace detail

struct ClusterResult {
  std::vector<Point> centers;
  std::unordered_map<CandidateId, std::size_t> membership;
  /// One member per non-empty center, in center order.
  std::vector<Candidate> representatives;
};

/// Clusters the candidates of one part class into
/// `min(n_people + config.extra_clusters, |cands|)` groups and picks the member
/// nearest each center, ties broken by higher unary and then lower id.
inline ClusterResult cluster_candidates(std::span<const Candidate> cands, std::size_t n_people,
                                        const AssignmentConfig& config, std::uint64_t seed) {
  for (const Candidate& c : cands) {
    if (c.part != cands.front().part) {
      throw std::invalid_argument("reduce_candidates: candidates span several part classes");
    }
  }
  ClusterResult out;
  std::vector<Candidate> sorted = detail::sorted_by_id(cands);
  const std::size_t k =
      std::min(n_people + static_cast<std::size_t>(config.extra_clusters), sorted.size());
  if (k == 0) return out;

  std::vector<Point> pts;
  pts.reserve(sorted.size());
  for (const Candidate& c : sorted) pts.push_back(c.pos);
  KMeansResult km = kmeans(pts, k, config.kmeans_iterations, seed);

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> rep(km.centers.size(), kNone);
  std::vector<double> rep_d(km.centers.size(), 0.0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const std::size_t c = km.membership[i];
    out.membership.emplace(sorted[i].id, c);
    const double d = distance(pts[i], km.centers[c]);
    if (rep[c] == kNone) {
      rep[c] = i;
      rep_d[c] = d;
      continue;
    }
    const double tol = 1e-9 * (1.0 + std::max(d, rep_d[c]));
    const Candidate& cur = sorted[rep[c]];
    bool better;
    if (d < rep_d[c] - tol) {
      better = true;
    } else if (d > rep_d[c] + tol) {
      better = false;
    } else {
      better = sorted[i].unary > cur.unary ||
               (sorted[i].unary == cur.unary && sorted[i].id < cur.id);
    }
    if (better) {
      rep[c] = i;
      rep_d[c] = d;
    }
  }

  for (std::size_t idx : rep) {
    if (idx != kNone) out.representatives.push_back(sorted[idx]);
  }
  out.centers = std::move(km.centers);
  return out;
}

/// The reduced candidate set for one class. Returns the input (sorted by id)
/// when candidate clustering is disabled.
inline std::vector<Candidate> reduce_candidates(std::span<const Candidate> cands,
                                                std::size_t n_people,
                                                const AssignmentConfig& config,
                                                std::uint64_t seed) {
  if (!config.enable_candidate_clustering) {
    for (const Candidate& c : cands) {
      if (c.part != cands.front().part) {
        throw std::invalid_argument("reduce_candidates: candidates span several part classes");
      }
    }
    return detail::sorted_by_id(cands);
  }
  return cluster_candidates(cands, n_people, config, seed).representatives;
}

}  // namespace gpose

#endif  // GREEDYPOSE_KMEANS_HPP

#ifndef GREEDYPOSE_BENCH_HPP
#define GREEDYPOSE_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "greedypose/assignment.hpp"
#include "greedypose/eval.hpp"
#include "greedypose/synthgen.hpp"

namespace gpose {

/// Measures one unit of work for a grid point and returns seconds. Tests
/// inject synthetic clocks through this hook.
using BenchTimer = std::function<double(std::size_t n_candidates, const std::function<void()>& work)>;

inline double steady_timer(std::size_t, const std::function<void()>& work) {
  const auto t0 = std::chrono::steady_clock::now();
  work();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

/// Runs the work `repeats` times and keeps the fastest run, which filters
/// out scheduler preemption inside a single timing.
inline BenchTimer best_of_timer(std::size_t repeats, BenchTimer inner = steady_timer) {
  if (repeats < 1) throw std::invalid_argument("best_of_timer: need at least one repeat");
  return [repeats, inner](std::size_t n, const std::function<void()>& work) {
    double best = inner(n, work);
    for (std::size_t r = 1; r < repeats; ++r) best = std::min(best, inner(n, work));
    return best;
  };
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope: need at least two paired samples");
  }
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("loglog_slope: samples must be positive");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  return sxy / sxx;
}

struct ScalingRow {
  std::size_t candidates_per_class = 0;
  double median_seconds = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double slope = 0.0;
};

/// Benchmark scene: `n_people` people with their true joints, padded with
/// uniformly placed candidates so every class holds `candidates_per_class`.
struct BenchScene {
  SceneGroundTruth gt;
  Detections detections;
  GeometricAssociation assoc;
};

inline BenchScene make_bench_scene(std::size_t candidates_per_class, std::size_t n_people,
                                   std::uint64_t seed) {
  NoiseConfig noise;
  noise.position_sigma = 0.01;
  const std::size_t padding =
      candidates_per_class > n_people ? candidates_per_class - n_people : 0;
  noise.spurious_per_class = static_cast<int>(padding);
  SceneGroundTruth gt = generate_scene(n_people, noise, seed);
  Detections det = render_detections(gt, noise, seed);
  GeometricAssociation assoc = geometric_association(gt, noise);
  return {std::move(gt), std::move(det), assoc};
}

/// Times assemble() on padded scenes for each grid point, reports the median
/// over `trials` scenes and the log-log slope of time against candidates per
/// class. Scene generation happens before timing.
inline ScalingReport scaling_benchmark(std::span<const std::size_t> grid, std::size_t n_people,
                                       std::size_t trials, std::uint64_t seed,
                                       const BenchTimer& timer = steady_timer,
                                       const AssignmentConfig& config = {}) {
  if (grid.size() < 3) throw std::invalid_argument("scaling_benchmark: need at least 3 grid points");
  if (trials < 1) throw std::invalid_argument("scaling_benchmark: need at least one trial");
  ScalingReport report;
  std::vector<double> xs, ys;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const std::size_t nj = grid[gi];
    std::vector<BenchScene> scenes;
    scenes.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      scenes.push_back(make_bench_scene(nj, n_people, detail::mix_seed(seed, gi * 1000 + t)));
    }
    std::vector<double> times;
    for (const BenchScene& s : scenes) {
      AssignmentConfig cfg = config;
      times.push_back(timer(nj, [&] {
        volatile std::size_t sink = assemble(s.detections, s.assoc, cfg).clusters.size();
        (void)sink;
      }));
    }
    const double med = median(times);
    report.rows.push_back({nj, med});
    xs.push_back(static_cast<double>(nj));
    ys.push_back(med);
  }
  report.slope = loglog_slope(xs, ys);
  return report;
}

/// One synthetic validation image with its association model.
struct SceneSample {
  SceneGroundTruth gt;
  Detections detections;
  GeometricAssociation assoc;
};

struct DatasetSpec {
  std::size_t scenes = 200;
  std::size_t min_people = 2;
  std::size_t max_people = 8;
  NoiseConfig noise;
  SceneConfig scene;
  std::uint64_t seed = 0;
};

inline std::vector<SceneSample> make_dataset(const DatasetSpec& spec) {
  if (spec.min_people > spec.max_people) {
    throw std::invalid_argument("dataset: min_people exceeds max_people");
  }
  std::vector<SceneSample> out;
  out.reserve(spec.scenes);
  for (std::size_t i = 0; i < spec.scenes; ++i) {
    const std::uint64_t s = detail::mix_seed(spec.seed, i);
    const std::size_t span = spec.max_people - spec.min_people + 1;
    const std::size_t n = spec.min_people + static_cast<std::size_t>(s % span);
    SceneGroundTruth gt = generate_scene(n, spec.noise, s, spec.scene);
    Detections det = render_detections(gt, spec.noise, s);
    GeometricAssociation assoc = geometric_association(gt, spec.noise);
    out.push_back({std::move(gt), std::move(det), assoc});
  }
  return out;
}

struct AblationRow {
  std::string name;
  AssignmentConfig config;
  double mean_pckh = 0.0;
  double median_seconds = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// The cumulative configuration ladder: baseline, then candidate clustering,
/// proximal gating, predecessor subsets, spawning and suppression switched on
/// one at a time.
inline std::vector<std::pair<std::string, AssignmentConfig>> ablation_ladder(
    const AssignmentConfig& base) {
  std::vector<std::pair<std::string, AssignmentConfig>> out;
  AssignmentConfig c = base;
  c.enable_candidate_clustering = false;
  c.enable_proximal_gating = false;
  c.enable_predecessor_subsets = false;
  c.enable_spawning = false;
  c.enable_suppression = false;
  out.emplace_back("baseline", c);
  c.enable_candidate_clustering = true;
  out.emplace_back("+candidate_clustering", c);
  c.enable_proximal_gating = true;
  out.emplace_back("+proximal_clusters", c);
  c.enable_predecessor_subsets = true;
  out.emplace_back("+predecessor_subsets", c);
  c.enable_spawning = true;
  out.emplace_back("+spawning", c);
  c.enable_suppression = true;
  out.emplace_back("+suppression", c);
  return out;
}

/// Runs every ladder configuration over the dataset. Mean PCKh is averaged
/// over scenes; precision and recall are pooled over all parts; time is the
/// median over scenes of the fastest of `repeats` runs.
inline std::vector<AblationRow> ablation_suite(std::span<const SceneSample> dataset,
                                               const AssignmentConfig& base = {},
                                               double tau = 0.5, std::size_t repeats = 3,
                                               const BenchTimer& timer = steady_timer) {
  std::vector<AblationRow> rows;
  for (const auto& [label, cfg] : ablation_ladder(base)) {
    AblationRow row;
    row.name = label;
    row.config = cfg;
    std::vector<double> times;
    double pckh_sum = 0.0;
    std::size_t predicted = 0, correct = 0, visible = 0;
    for (const SceneSample& s : dataset) {
      AssignmentResult result;
      double best = 0.0;
      for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
        const double t = timer(s.detections.size(), [&] { result = assemble(s.detections, s.assoc, cfg); });
        best = r == 0 ? t : std::min(best, t);
      }
      times.push_back(best);
      const PckhReport rep = pckh(result.clusters, s.gt, tau);
      pckh_sum += rep.mean;
      predicted += rep.predicted_parts;
      correct += rep.correct_parts;
      visible += rep.visible_joints;
    }
    if (!dataset.empty()) {
      row.mean_pckh = pckh_sum / static_cast<double>(dataset.size());
      row.median_seconds = median(times);
    }
    row.precision = predicted == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(predicted);
    row.recall = visible == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(visible);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gpose

#endif  // GREEDYPOSE_BENCH_HPP

#ifndef GREEDYPOSE_EVAL_HPP
#define GREEDYPOSE_EVAL_HPP

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "greedypose/assignment.hpp"
#include "greedypose/synthgen.hpp"

namespace gpose {

struct PersonMatch {
  /// (ground-truth person index, cluster index) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> missed;
  std::vector<std::size_t> false_clusters;
};

/// The part a cluster is located by: its head when present, otherwise its
/// anchor part.
inline const AssignedPart* locator_part(const PersonCluster& c) {
  if (const AssignedPart* h = c.find(PartClass::Head)) return h;
  for (const auto& p : c.parts) {
    if (p && p->anchor) return &*p;
  }
  for (const auto& p : c.parts) {
    if (p) return &*p;
  }
  return nullptr;
}

/// Greedy one-to-one matching of clusters to ground-truth persons by
/// ascending distance between each cluster's locator part and the same joint
/// of the person. Pairs farther apart than `gate` head lengths never match.
inline PersonMatch match_persons(std::span<const PersonCluster> clusters,
                                 const SceneGroundTruth& gt, double gate = 1.0,
                                 const AnthropometricTable& table =
                                     AnthropometricTable::defaults()) {
  struct Cand {
    double d;
    std::size_t gt_idx;
    ClusterId cid;
    std::size_t cl_idx;
  };
  std::vector<Cand> cands;
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    const AssignedPart* loc = locator_part(clusters[ci]);
    if (!loc) continue;
    for (std::size_t gi = 0; gi < gt.persons.size(); ++gi) {
      const GtPerson& p = gt.persons[gi];
      const double d = distance(loc->candidate.pos, p.joints[slot(loc->candidate.part)]);
      if (d <= gate * p.head_length(table)) cands.push_back({d, gi, clusters[ci].id, ci});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::tie(a.d, a.gt_idx, a.cid) < std::tie(b.d, b.gt_idx, b.cid);
  });

  PersonMatch m;
  std::vector<char> gt_used(gt.persons.size(), 0), cl_used(clusters.size(), 0);
  for (const Cand& c : cands) {
    if (gt_used[c.gt_idx] || cl_used[c.cl_idx]) continue;
    gt_used[c.gt_idx] = cl_used[c.cl_idx] = 1;
    m.pairs.emplace_back(c.gt_idx, c.cl_idx);
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  for (std::size_t i = 0; i < gt.persons.size(); ++i) {
    if (!gt_used[i]) m.missed.push_back(i);
  }
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (!cl_used[i]) m.false_clusters.push_back(i);
  }
  return m;
}

struct PckhReport {
  double tau = 0.5;
  /// Fraction of visible joints recovered, per class; empty for classes with
  /// no visible ground truth.
  std::array<std::optional<double>, kNumParts> per_class{};
  double mean = 1.0;
  std::size_t matched_persons = 0;
  std::size_t missed_persons = 0;
  std::size_t false_persons = 0;

  std::size_t visible_joints = 0;
  std::size_t predicted_parts = 0;
  std::size_t correct_parts = 0;

  double recall() const noexcept {
    return visible_joints == 0 ? 1.0
                               : static_cast<double>(correct_parts) /
                                     static_cast<double>(visible_joints);
  }
  double precision() const noexcept {
    return predicted_parts == 0 ? 1.0
                                : static_cast<double>(correct_parts) /
                                      static_cast<double>(predicted_parts);
  }
};

/// A predicted part is correct when its matched person's joint of the same
/// class is visible and lies within tau head lengths. Occluded joints count
/// neither for nor against. Scenes with no visible joints score a mean of 1.
inline PckhReport pckh(std::span<const PersonCluster> clusters, const SceneGroundTruth& gt,
                       double tau = 0.5, double match_gate = 1.0,
                       const AnthropometricTable& table = AnthropometricTable::defaults()) {
  if (!(tau > 0.0)) throw std::invalid_argument("pckh: tau must be positive");
  PckhReport r;
  r.tau = tau;
  const PersonMatch m = match_persons(clusters, gt, match_gate, table);
  r.matched_persons = m.pairs.size();
  r.missed_persons = m.missed.size();
  r.false_persons = m.false_clusters.size();

  std::array<std::size_t, kNumParts> total{}, correct{};
  for (const GtPerson& p : gt.persons) {
    for (std::size_t s = 0; s < kNumParts; ++s) total[s] += !p.occluded[s];
  }
  for (const PersonCluster& c : clusters) r.predicted_parts += c.size();
  for (const auto& [gi, ci] : m.pairs) {
    const GtPerson& p = gt.persons[gi];
    const double limit = tau * p.head_length(table);
    for (std::size_t s = 0; s < kNumParts; ++s) {
      if (p.occluded[s] || !clusters[ci].parts[s]) continue;
      if (distance(clusters[ci].parts[s]->candidate.pos, p.joints[s]) <= limit) ++correct[s];
    }
  }
  double sum = 0.0;
  std::size_t classes = 0;
  for (std::size_t s = 0; s < kNumParts; ++s) {
    r.visible_joints += total[s];
    r.correct_parts += correct[s];
    if (total[s] == 0) continue;
    r.per_class[s] = static_cast<double>(correct[s]) / static_cast<double>(total[s]);
    sum += *r.per_class[s];
    ++classes;
  }
  r.mean = classes == 0 ? 1.0 : sum / static_cast<double>(classes);
  return r;
}

}  // namespace gpose

#endif  // GREEDYPOSE_EVAL_HPP

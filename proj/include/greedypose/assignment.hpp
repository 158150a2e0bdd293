#ifndef GREEDYPOSE_ASSIGNMENT_HPP
#define GREEDYPOSE_ASSIGNMENT_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "greedypose/association.hpp"
#include "greedypose/candidate.hpp"
#include "greedypose/config.hpp"
#include "greedypose/kmeans.hpp"
#include "greedypose/part_class.hpp"
#include "greedypose/tables.hpp"

namespace gpose {

using ClusterId = std::uint32_t;

struct AssignedPart {
  Candidate candidate;
  /// Cluster affinity at the time the part was committed. Seeds and spawn
  /// anchors carry 1.
  double affinity = 1.0;
  /// Head seed or spawn anchor; never suppressed.
  bool anchor = false;

  friend bool operator==(const AssignedPart&, const AssignedPart&) = default;
};

/// A partial or complete person: at most one part per class.
struct PersonCluster {
  ClusterId id = 0;
  bool spawned = false;
  Point anchor;
  std::array<std::optional<AssignedPart>, kNumParts> parts;

  bool has(PartClass p) const noexcept { return parts[slot(p)].has_value(); }

  const AssignedPart* find(PartClass p) const noexcept {
    const auto& slot_value = parts[slot(p)];
    return slot_value ? &*slot_value : nullptr;
  }

  void add(const AssignedPart& part) {
    auto& slot_value = parts[slot(part.candidate.part)];
    if (slot_value) {
      throw std::logic_error("cluster " + std::to_string(id) + " already holds a " +
                             std::string(name(part.candidate.part)));
    }
    slot_value = part;
  }

  void remove(PartClass p) noexcept { parts[slot(p)].reset(); }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& p : parts) n += p.has_value();
    return n;
  }

  friend bool operator==(const PersonCluster&, const PersonCluster&) = default;
};

struct SuppressedPart {
  Candidate candidate;
  double score = 0.0;

  friend bool operator==(const SuppressedPart&, const SuppressedPart&) = default;
};

struct StageTrace {
  struct Score {
    CandidateId part;
    ClusterId cluster;
    double affinity;
    friend bool operator==(const Score&, const Score&) = default;
  };
  struct Commit {
    CandidateId part;
    ClusterId cluster;
    double affinity;
    double anchor_distance;
    /// Gate radius in pixels; absent when gating was not applied.
    std::optional<double> gate_radius;
    bool gate_fallback;
    friend bool operator==(const Commit&, const Commit&) = default;
  };

  PartClass part = PartClass::Neck;
  std::size_t candidate_count = 0;
  std::vector<CandidateId> representatives;
  /// Number of proximal clusters considered for each representative.
  std::vector<std::size_t> gated_counts;
  std::vector<Score> affinities;
  std::vector<Commit> commits;
  std::vector<CandidateId> spawned;
  std::vector<CandidateId> suppressed;
  /// Cluster count when the stage finished.
  std::size_t clusters_after = 0;

  friend bool operator==(const StageTrace&, const StageTrace&) = default;
};

struct Trace {
  std::vector<CandidateId> head_seeds;
  std::optional<double> head_length;
  std::vector<StageTrace> stages;

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct AssignmentResult {
  std::vector<PersonCluster> clusters;
  std::vector<Candidate> unassigned;
  std::vector<SuppressedPart> suppressed;
  std::optional<Trace> trace;

  friend bool operator==(const AssignmentResult&, const AssignmentResult&) = default;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Mean pairwise probability of `part` with the cluster's relevant assigned
// parts, ignoring whatever occupies the part's own class slot.
inline double mean_affinity(const Candidate& part, const PersonCluster& cluster,
                            const PredecessorTable& preds, const AssociationProvider& assoc,
                            bool predecessor_subset) {
  double sum = 0.0;
  std::size_t n = 0;
  if (predecessor_subset) {
    for (PartClass q : preds[part.part]) {
      if (const AssignedPart* a = cluster.find(q)) {
        sum += assoc.pairwise(part, a->candidate);
        ++n;
      }
    }
  } else {
    for (std::size_t i = 0; i < kNumParts; ++i) {
      if (i == slot(part.part) || !cluster.parts[i]) continue;
      sum += assoc.pairwise(part, cluster.parts[i]->candidate);
      ++n;
    }
  }
  return n == 0 ? part.unary : sum / static_cast<double>(n);
}

}  // namespace detail

/// One cluster per head candidate whose unary reaches the NMS threshold.
/// Clusters are numbered from 1 in ascending candidate-id order.
inline std::vector<PersonCluster> seed_clusters(std::span<const Candidate> heads,
                                                const AssignmentConfig& config) {
  std::vector<Candidate> sorted(heads.begin(), heads.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  std::vector<PersonCluster> clusters;
  for (const Candidate& h : sorted) {
    if (h.part != PartClass::Head) {
      throw std::invalid_argument("seed_clusters: candidate " + std::to_string(h.id) +
                                  " is not a Head");
    }
    if (h.unary < config.head_nms_threshold) continue;
    PersonCluster c;
    c.id = static_cast<ClusterId>(clusters.size() + 1);
    c.anchor = h.pos;
    c.add({h, 1.0, true});
    clusters.push_back(std::move(c));
  }
  return clusters;
}

/// Mean pairwise probability between `part` and the cluster's assigned
/// predecessors of its class. Falls back to the part's unary when the
/// cluster holds none of them. With `predecessor_subset` false every
/// assigned part of the cluster is averaged instead.
inline double cluster_affinity(const Candidate& part, const PersonCluster& cluster,
                               const PredecessorTable& preds, const AssociationProvider& assoc,
                               bool predecessor_subset = true) {
  if (cluster.has(part.part)) {
    throw std::invalid_argument("cluster_affinity: cluster " + std::to_string(cluster.id) +
                                " already holds a " + std::string(name(part.part)));
  }
  return detail::mean_affinity(part, cluster, preds, assoc, predecessor_subset);
}

/// Head-top-to-chin length in pixels, reconstructed from the mean head-to-neck
/// distance over clusters holding both. Empty when no cluster qualifies.
inline std::optional<double> estimate_head_length(std::span<const PersonCluster> clusters,
                                                  const AnthropometricTable& table) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const PersonCluster& c : clusters) {
    const AssignedPart* head = c.find(PartClass::Head);
    const AssignedPart* neck = c.find(PartClass::Neck);
    if (!head || !neck) continue;
    sum += distance(head->candidate.pos, neck->candidate.pos);
    ++n;
  }
  if (n == 0) return std::nullopt;
  const double y = table.chin_alpha / table[PartClass::Neck] * (sum / static_cast<double>(n));
  if (!(y > 0.0)) return std::nullopt;
  return y;
}

struct ProximalGate {
  /// Indices into the cluster list, ascending.
  std::vector<std::size_t> indices;
  /// Gate radius in pixels; absent when no gating was applied.
  std::optional<double> radius;
  /// Nothing lay inside the radius and the nearest cluster was substituted.
  bool fallback = false;
};

/// Clusters whose anchor lies within radius_multiplier * R of the part. An
/// empty gate falls back to the single nearest cluster. Neck and head parts,
/// and disabled gating, return every cluster.
inline ProximalGate proximal_clusters(const Candidate& part,
                                      std::span<const PersonCluster> clusters, double head_length,
                                      const AnthropometricTable& table,
                                      const AssignmentConfig& config) {
  ProximalGate gate;
  if (!config.enable_proximal_gating || chain_index(part.part) < 3) {
    gate.indices.resize(clusters.size());
    for (std::size_t i = 0; i < clusters.size(); ++i) gate.indices[i] = i;
    return gate;
  }
  const double radius = config.radius_multiplier * expected_radius(part.part, head_length, table);
  gate.radius = radius;
  std::size_t nearest = 0;
  double nearest_d = 0.0;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const double d = distance(part.pos, clusters[i].anchor);
    if (d <= radius) gate.indices.push_back(i);
    if (i == 0 || d < nearest_d) {
      nearest = i;
      nearest_d = d;
    }
  }
  if (gate.indices.empty() && !clusters.empty()) {
    gate.indices.push_back(nearest);
    gate.fallback = true;
  }
  return gate;
}

/// Greedy assignment of one class's parts: (part, cluster) pairs are taken in
/// descending affinity order (ties: higher unary, lower cluster id, lower
/// candidate id) and committed while both the part and the cluster's slot for
/// the class are free. Returns the parts left uncommitted, sorted by id.
///
/// `head_length` enables proximal gating; pass nullopt to consider all
/// clusters.
inline std::vector<Candidate> assign_part_class(std::span<const Candidate> parts,
                                                std::vector<PersonCluster>& clusters,
                                                std::optional<double> head_length,
                                                const AssociationProvider& assoc,
                                                const Tables& tables,
                                                const AssignmentConfig& config,
                                                StageTrace* trace = nullptr) {
  if (parts.empty()) return {};
  const PartClass cls = parts.front().part;
  for (const Candidate& p : parts) {
    if (p.part != cls) {
      throw std::invalid_argument("assign_part_class: parts span several part classes");
    }
  }

  struct Pair {
    double affinity;
    double unary;
    ClusterId cluster_id;
    CandidateId part_id;
    std::uint32_t part_idx;
    std::uint32_t cluster_idx;
    bool fallback;
  };
  std::vector<Pair> pairs;
  pairs.reserve(parts.size() * std::min<std::size_t>(clusters.size(), 16));
  std::vector<std::optional<double>> radii(parts.size());

  AssignmentConfig gating = config;
  if (!head_length) gating.enable_proximal_gating = false;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const Candidate& p = parts[pi];
    ProximalGate gate = proximal_clusters(p, clusters, head_length.value_or(1.0),
                                          tables.anthropometry, gating);
    radii[pi] = gate.radius;
    if (trace) trace->gated_counts.push_back(gate.indices.size());
    for (std::size_t ci : gate.indices) {
      const PersonCluster& c = clusters[ci];
      if (c.has(cls)) continue;
      const double a = detail::mean_affinity(p, c, tables.predecessors, assoc,
                                             config.enable_predecessor_subsets);
      pairs.push_back({a, p.unary, c.id, p.id, static_cast<std::uint32_t>(pi),
                       static_cast<std::uint32_t>(ci), gate.fallback});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.affinity != b.affinity) return a.affinity > b.affinity;
    if (a.unary != b.unary) return a.unary > b.unary;
    if (a.cluster_id != b.cluster_id) return a.cluster_id < b.cluster_id;
    return a.part_id < b.part_id;
  });
  if (trace) {
    for (const Pair& pr : pairs) trace->affinities.push_back({pr.part_id, pr.cluster_id, pr.affinity});
  }

  std::vector<char> part_done(parts.size(), 0);
  std::size_t remaining = parts.size();
  for (const Pair& pr : pairs) {
    if (remaining == 0) break;
    PersonCluster& c = clusters[pr.cluster_idx];
    if (part_done[pr.part_idx] || c.has(cls)) continue;
    c.add({parts[pr.part_idx], pr.affinity, false});
    part_done[pr.part_idx] = 1;
    --remaining;
    if (trace) {
      trace->commits.push_back({pr.part_id, pr.cluster_id, pr.affinity,
                                distance(parts[pr.part_idx].pos, c.anchor), radii[pr.part_idx],
                                pr.fallback});
    }
  }

  std::vector<Candidate> leftover;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    if (!part_done[pi]) leftover.push_back(parts[pi]);
  }
  std::sort(leftover.begin(), leftover.end(),
            [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  return leftover;
}

struct SpawnOutcome {
  std::vector<ClusterId> spawned;
  /// Leftovers that did not qualify (or all of them when spawning is off).
  std::vector<Candidate> discarded;
};

/// Each leftover at or above the spawn threshold starts a new cluster
/// anchored at its own position, numbered after the existing clusters.
inline SpawnOutcome spawn_clusters(std::span<const Candidate> leftover,
                                   std::vector<PersonCluster>& clusters,
                                   const AssignmentConfig& config) {
  SpawnOutcome out;
  for (const Candidate& p : leftover) {
    if (!config.enable_spawning || p.unary < config.spawn_threshold) {
      out.discarded.push_back(p);
      continue;
    }
    PersonCluster c;
    c.id = static_cast<ClusterId>(clusters.size() + 1);
    c.spawned = true;
    c.anchor = p.pos;
    c.add({p, 1.0, true});
    out.spawned.push_back(c.id);
    clusters.push_back(std::move(c));
  }
  return out;
}

/// Removes parts of class `stage` whose structural score
/// (unary + affinity to their own cluster) / 2 falls below the hallucination
/// threshold. Anchors are exempt. The threshold itself is retained.
inline std::vector<SuppressedPart> suppress_hallucinations(std::vector<PersonCluster>& clusters,
                                                           PartClass stage,
                                                           const AssociationProvider& assoc,
                                                           const PredecessorTable& preds,
                                                           const AssignmentConfig& config) {
  std::vector<SuppressedPart> out;
  if (!config.enable_suppression) return out;
  for (PersonCluster& c : clusters) {
    const AssignedPart* p = c.find(stage);
    if (!p || p->anchor) continue;
    const double affinity = detail::mean_affinity(p->candidate, c, preds, assoc,
                                                  config.enable_predecessor_subsets);
    const double score = 0.5 * (p->candidate.unary + affinity);
    if (score < config.hallucination_threshold) {
      out.push_back({p->candidate, score});
      c.remove(stage);
    }
  }
  return out;
}

/// The full greedy pipeline over one image: seed clusters from heads, then
/// for each class from the neck down reduce, gate, assign, spawn and
/// suppress. Every input candidate ends up in exactly one of clusters,
/// unassigned or suppressed.
inline AssignmentResult assemble(const Detections& detections, const AssociationProvider& assoc,
                                 const AssignmentConfig& config, const Tables& tables = {},
                                 bool collect_trace = false) {
  config.validate();
  tables.anthropometry.validate();
  tables.predecessors.validate();
  {
    std::vector<CandidateId> ids;
    ids.reserve(detections.size());
    for (std::size_t s = 0; s < kNumParts; ++s) {
      for (const Candidate& c : detections.by_class[s]) {
        validate(c);
        if (slot(c.part) != s) {
          throw std::invalid_argument("candidate " + std::to_string(c.id) + " is filed under " +
                                      std::string(kPartNames[s]) + " but labelled " +
                                      std::string(name(c.part)));
        }
        ids.push_back(c.id);
      }
    }
    if (!std::is_sorted(ids.begin(), ids.end())) std::sort(ids.begin(), ids.end());
    auto dup = std::adjacent_find(ids.begin(), ids.end());
    if (dup != ids.end()) {
      throw std::invalid_argument("duplicate candidate id " + std::to_string(*dup));
    }
  }

  AssignmentResult result;
  if (collect_trace) result.trace.emplace();

  const auto& heads = detections[PartClass::Head];
  result.clusters = seed_clusters(heads, config);
  for (const Candidate& h : heads) {
    if (h.unary < config.head_nms_threshold) result.unassigned.push_back(h);
  }
  if (result.trace) {
    for (const PersonCluster& c : result.clusters) {
      result.trace->head_seeds.push_back(c.find(PartClass::Head)->candidate.id);
    }
  }

  std::optional<double> head_length;
  bool head_length_done = false;
  for (PartClass cls : chain_order()) {
    if (cls == PartClass::Head) continue;
    if (!head_length_done && chain_index(cls) >= 3) {
      head_length_done = true;
      if (config.enable_proximal_gating) {
        head_length = estimate_head_length(result.clusters, tables.anthropometry);
      }
      if (result.trace) result.trace->head_length = head_length;
    }

    const auto& cands = detections[cls];
    StageTrace* st = nullptr;
    if (result.trace) {
      st = &result.trace->stages.emplace_back();
      st->part = cls;
      st->candidate_count = cands.size();
      st->clusters_after = result.clusters.size();
    }
    if (cands.empty()) continue;

    std::vector<Candidate> reps =
        reduce_candidates(cands, result.clusters.size(), config,
                          detail::mix_seed(config.rng_seed, slot(cls)));
    if (reps.size() != cands.size()) {
      std::unordered_set<CandidateId> kept;
      kept.reserve(reps.size());
      for (const Candidate& r : reps) kept.insert(r.id);
      for (const Candidate& c : cands) {
        if (!kept.count(c.id)) result.unassigned.push_back(c);
      }
    }
    if (st) {
      for (const Candidate& r : reps) st->representatives.push_back(r.id);
    }

    std::vector<Candidate> leftover =
        assign_part_class(reps, result.clusters, head_length, assoc, tables, config, st);
    SpawnOutcome spawn = spawn_clusters(leftover, result.clusters, config);
    result.unassigned.insert(result.unassigned.end(), spawn.discarded.begin(),
                             spawn.discarded.end());
    std::vector<SuppressedPart> sup =
        suppress_hallucinations(result.clusters, cls, assoc, tables.predecessors, config);
    if (st) {
      for (ClusterId id : spawn.spawned) {
        st->spawned.push_back(result.clusters[id - 1].find(cls)->candidate.id);
      }
      for (const SuppressedPart& s : sup) st->suppressed.push_back(s.candidate.id);
      st->clusters_after = result.clusters.size();
    }
    result.suppressed.insert(result.suppressed.end(), sup.begin(), sup.end());
  }

  result.unassigned = detail::sorted_by_id(result.unassigned);
  return result;
}

}  // namespace gpose

#endif  // GREEDYPOSE_ASSIGNMENT_HPP

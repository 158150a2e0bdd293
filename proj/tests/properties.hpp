#ifndef GREEDYPOSE_TESTS_PROPERTIES_HPP
#define GREEDYPOSE_TESTS_PROPERTIES_HPP

// Invariant checks over randomized scenes, shared by the property tests and
// the acceptance binary. Each check returns violation messages; an empty list
// means the scene passed.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "greedypose/greedypose.hpp"

namespace gpose::testing {

struct PropertyScene {
  std::uint64_t seed = 0;
  NoiseConfig noise;
  SceneGroundTruth gt;
  Detections detections;
  GeometricAssociation assoc{26.0, 0.08};
  AssignmentConfig config;
};

/// Random scene with 0..8 people, random noise levels and a random mix of
/// pipeline switches.
inline PropertyScene random_property_scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto coin = [&](double p) { return uniform(0.0, 1.0) < p; };

  NoiseConfig noise;
  noise.position_sigma = coin(0.2) ? 0.0 : uniform(0.0, 0.05);
  noise.spurious_per_class = static_cast<int>(rng() % 5);
  noise.occlusion_prob = coin(0.3) ? 0.0 : uniform(0.0, 0.4);
  noise.occluded_emit_prob = uniform(0.0, 1.0);
  noise.duplicates_per_joint = static_cast<int>(rng() % 3);
  noise.pairwise_sigma = uniform(0.04, 0.15);

  AssignmentConfig cfg;
  cfg.rng_seed = rng();
  cfg.enable_candidate_clustering = coin(0.8);
  cfg.enable_proximal_gating = coin(0.8);
  cfg.enable_predecessor_subsets = coin(0.8);
  cfg.enable_spawning = coin(0.8);
  cfg.enable_suppression = coin(0.8);
  cfg.extra_clusters = static_cast<int>(rng() % 4);

  const std::size_t people = rng() % 9;
  const std::uint64_t scene_seed = rng();
  SceneGroundTruth gt = generate_scene(people, noise, scene_seed);
  Detections det = render_detections(gt, noise, scene_seed);
  GeometricAssociation assoc = geometric_association(gt, noise);
  return {seed, noise, std::move(gt), std::move(det), assoc, cfg};
}

namespace detail {

class Violations {
 public:
  explicit Violations(std::string label) : label_(std::move(label)) {}

  template <typename... Args>
  void add(const char* property, const Args&... args) {
    std::ostringstream os;
    os << label_ << ": " << property << ": ";
    (os << ... << args);
    out_.push_back(os.str());
  }

  std::vector<std::string> take() { return std::move(out_); }

 private:
  std::string label_;
  std::vector<std::string> out_;
};

inline bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace detail

/// Checks one traced assemble() result against its input.
inline std::vector<std::string> check_result(const Detections& det, const AssociationProvider& assoc,
                                             const AssignmentConfig& cfg, const Tables& tables,
                                             const AssignmentResult& r, const std::string& label) {
  detail::Violations v(label);
  if (!r.trace) {
    v.add("trace", "missing");
    return v.take();
  }
  const Trace& t = *r.trace;

  // Accounting: every candidate lands in exactly one output list.
  std::map<CandidateId, int> seen;
  for (const PersonCluster& c : r.clusters) {
    for (std::size_t s = 0; s < kNumParts; ++s) {
      if (c.parts[s]) ++seen[c.parts[s]->candidate.id];
    }
  }
  for (const Candidate& c : r.unassigned) ++seen[c.id];
  for (const SuppressedPart& s : r.suppressed) ++seen[s.candidate.id];
  for (const Candidate& c : det.all()) {
    auto it = seen.find(c.id);
    if (it == seen.end() || it->second != 1) {
      v.add("accounting", "candidate ", c.id, " appears ", it == seen.end() ? 0 : it->second,
            " times");
    }
  }
  if (seen.size() != det.size()) v.add("accounting", "output holds unknown candidate ids");

  // Occupancy: one part per class slot, each in the slot of its own class.
  for (const PersonCluster& c : r.clusters) {
    for (std::size_t s = 0; s < kNumParts; ++s) {
      if (c.parts[s] && slot(c.parts[s]->candidate.part) != s) {
        v.add("occupancy", "cluster ", c.id, " holds a ", name(c.parts[s]->candidate.part),
              " in the wrong slot");
      }
    }
  }

  // Cluster count never decreases and ids are dense.
  std::size_t prev = t.head_seeds.size();
  for (const StageTrace& st : t.stages) {
    if (st.clusters_after < prev) {
      v.add("monotone cluster count", name(st.part), " shrank from ", prev, " to ",
            st.clusters_after);
    }
    if (st.clusters_after != prev + st.spawned.size()) {
      v.add("monotone cluster count", name(st.part), " grew by other than its spawns");
    }
    prev = st.clusters_after;
  }
  if (prev != r.clusters.size()) v.add("monotone cluster count", "final count mismatch");
  for (std::size_t i = 0; i < r.clusters.size(); ++i) {
    if (r.clusters[i].id != i + 1) v.add("cluster ids", "cluster ", i, " has id ", r.clusters[i].id);
  }

  // Stage order follows the chain, so predecessors always come first.
  std::size_t expected_slot = 1;
  for (const StageTrace& st : t.stages) {
    if (slot(st.part) != expected_slot++) v.add("stage order", name(st.part), " out of order");
    for (PartClass q : tables.predecessors[st.part]) {
      if (slot(q) >= slot(st.part)) v.add("stage order", name(q), " precedes ", name(st.part));
    }
  }

  // Provenance: anchors are head seeds or spawns; every other part is a
  // representative of its stage that was committed to this very cluster.
  std::set<CandidateId> seeds(t.head_seeds.begin(), t.head_seeds.end());
  std::map<CandidateId, ClusterId> committed;
  std::set<CandidateId> reps, spawned;
  for (const StageTrace& st : t.stages) {
    reps.insert(st.representatives.begin(), st.representatives.end());
    spawned.insert(st.spawned.begin(), st.spawned.end());
    std::set<CandidateId> parts_in_stage;
    std::set<ClusterId> clusters_in_stage;
    for (const auto& c : st.commits) {
      committed[c.part] = c.cluster;
      if (!parts_in_stage.insert(c.part).second) {
        v.add("occupancy", name(st.part), " part ", c.part, " committed twice");
      }
      if (!clusters_in_stage.insert(c.cluster).second) {
        v.add("occupancy", name(st.part), " cluster ", c.cluster, " received two parts");
      }
      if (!std::count(st.representatives.begin(), st.representatives.end(), c.part)) {
        v.add("provenance", "committed part ", c.part, " is not a representative");
      }
    }
    for (CandidateId s : st.spawned) {
      if (!std::count(st.representatives.begin(), st.representatives.end(), s)) {
        v.add("provenance", "spawned part ", s, " is not a representative");
      }
    }
  }
  for (const PersonCluster& c : r.clusters) {
    for (const auto& p : c.parts) {
      if (!p) continue;
      const CandidateId id = p->candidate.id;
      if (p->anchor) {
        const bool ok = c.spawned ? spawned.count(id) > 0 : seeds.count(id) > 0;
        if (!ok) v.add("provenance", "anchor ", id, " of cluster ", c.id, " has no origin");
        continue;
      }
      auto it = committed.find(id);
      if (!reps.count(id) || it == committed.end() || it->second != c.id) {
        v.add("provenance", "part ", id, " in cluster ", c.id, " was never committed there");
      }
    }
  }

  // Affinity and score ranges.
  for (const StageTrace& st : t.stages) {
    for (const auto& a : st.affinities) {
      if (!detail::in_unit(a.affinity)) v.add("affinity range", "pair affinity ", a.affinity);
    }
  }
  for (const PersonCluster& c : r.clusters) {
    for (const auto& p : c.parts) {
      if (!p) continue;
      if (!detail::in_unit(p->affinity)) v.add("affinity range", "part affinity ", p->affinity);
      // Predecessors never change after their stage, so the structural score
      // recomputed on the final cluster equals the one seen by suppression.
      if (!p->anchor && cfg.enable_predecessor_subsets) {
        const double a = gpose::detail::mean_affinity(p->candidate, c, tables.predecessors, assoc, true);
        const double score = 0.5 * (p->candidate.unary + a);
        if (!detail::in_unit(score)) v.add("score range", "part ", p->candidate.id, " score ", score);
        if (cfg.enable_suppression && score < cfg.hallucination_threshold) {
          v.add("suppression", "retained part ", p->candidate.id, " scores ", score);
        }
      }
    }
  }
  for (const SuppressedPart& s : r.suppressed) {
    if (!detail::in_unit(s.score)) v.add("score range", "suppressed score ", s.score);
    if (s.score >= cfg.hallucination_threshold) {
      v.add("suppression", "part ", s.candidate.id, " removed at score ", s.score);
    }
  }

  // Gating soundness: every gated commit lies inside its radius unless it was
  // the single nearest-cluster fallback.
  for (const StageTrace& st : t.stages) {
    const bool gated = cfg.enable_proximal_gating && t.head_length && chain_index(st.part) >= 3;
    std::map<CandidateId, std::size_t> gate_size;
    for (std::size_t i = 0; i < st.representatives.size() && i < st.gated_counts.size(); ++i) {
      gate_size[st.representatives[i]] = st.gated_counts[i];
    }
    for (const auto& c : st.commits) {
      if (gated != c.gate_radius.has_value()) {
        v.add("gating", name(st.part), " part ", c.part, " gate applied inconsistently");
        continue;
      }
      if (!c.gate_radius) continue;
      const double expected =
          cfg.radius_multiplier * expected_radius(st.part, *t.head_length, tables.anthropometry);
      if (std::abs(*c.gate_radius - expected) > 1e-9 * (1.0 + expected)) {
        v.add("gating", name(st.part), " radius ", *c.gate_radius, " expected ", expected);
      }
      if (c.gate_fallback) {
        if (gate_size[c.part] != 1) v.add("gating", "fallback gate holds ", gate_size[c.part], " clusters");
      } else if (c.anchor_distance > *c.gate_radius) {
        v.add("gating", name(st.part), " part ", c.part, " committed at ", c.anchor_distance,
              " beyond radius ", *c.gate_radius);
      }
    }
  }
  return v.take();
}

/// Runs the scene, checks every invariant, then checks determinism by
/// rerunning and comparing the serialized output byte for byte.
inline std::vector<std::string> check_scene(const PropertyScene& s) {
  const std::string label = "scene " + std::to_string(s.seed);
  const Tables tables;
  const AssignmentResult r = assemble(s.detections, s.assoc, s.config, tables, true);
  std::vector<std::string> out = check_result(s.detections, s.assoc, s.config, tables, r, label);

  const AssignmentResult again = assemble(s.detections, s.assoc, s.config, tables, true);
  const std::string a = io::to_json(r, s.config).dump() + io::to_json(*r.trace).dump();
  const std::string b = io::to_json(again, s.config).dump() + io::to_json(*again.trace).dump();
  if (a != b || !(r == again)) out.push_back(label + ": determinism: rerun differs");
  return out;
}

/// Scenes where every visible ground-truth joint lies within the gate of its
/// own head: with gating on and off the output must agree. Returns nullopt
/// when the scene does not meet that precondition.
inline std::optional<std::vector<std::string>> check_gating_equivalence(const PropertyScene& s) {
  const Tables tables;
  AssignmentConfig on = s.config;
  on.enable_proximal_gating = true;
  AssignmentConfig off = on;
  off.enable_proximal_gating = false;
  const AssignmentResult r_on = assemble(s.detections, s.assoc, on, tables, true);
  if (!r_on.trace->head_length) return std::nullopt;
  const double y = *r_on.trace->head_length;
  for (const GtPerson& p : s.gt.persons) {
    for (PartClass c : chain_order()) {
      if (chain_index(c) < 3) continue;
      const double gate = on.radius_multiplier * expected_radius(c, y, tables.anthropometry);
      if (distance(p.joints[slot(c)], p.head_top) > gate) return std::nullopt;
    }
  }
  const AssignmentResult r_off = assemble(s.detections, s.assoc, off, tables);
  std::vector<std::string> out;
  if (r_on.clusters != r_off.clusters || r_on.unassigned != r_off.unassigned ||
      r_on.suppressed != r_off.suppressed) {
    out.push_back("scene " + std::to_string(s.seed) + ": gating soundness: gated output differs");
  }
  return out;
}

}  // namespace gpose::testing

#endif  // GREEDYPOSE_TESTS_PROPERTIES_HPP

#ifndef GREEDYPOSE_ORACLE_HPP
#define GREEDYPOSE_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "greedypose/assignment.hpp"

namespace gpose {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleBudget {
  std::size_t max_classes = 6;
  std::size_t max_candidates_per_class = 5;
  std::size_t max_seeds = 4;
  /// Upper bound on the number of complete assignments enumerated.
  double max_assignments = 2e8;
};

/// A small assignment problem. `classes` lists the part classes in chain
/// order, Head first; every listed class must have all its predecessors
/// listed too. Seeds are the head candidates, one cluster each.
struct OracleInstance {
  std::vector<PartClass> classes;
  std::array<std::vector<Candidate>, kNumParts> parts;
  std::vector<Candidate> seeds;
  const AssociationProvider* assoc = nullptr;
};

/// Cluster index (0-based, seeds in ascending id order) per part, or -1 for
/// unassigned. Parts are ordered by class in chain order, then by id.
using OracleEncoding = std::vector<int>;

struct OracleSolution {
  OracleEncoding encoding;
  double score = 0.0;
  double assignments_enumerated = 0.0;
};

namespace detail {

inline double partial_injections(std::size_t parts, std::size_t clusters) {
  // sum_k C(parts,k) * clusters!/(clusters-k)!
  double total = 0.0;
  for (std::size_t k = 0; k <= std::min(parts, clusters); ++k) {
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      c *= static_cast<double>(parts - i) / static_cast<double>(i + 1);
      c *= static_cast<double>(clusters - i);
    }
    total += c;
  }
  return total;
}

}  // namespace detail

/// Sorts parts and seeds by id and checks structure. Throws
/// std::invalid_argument on malformed instances.
inline void normalize(OracleInstance& inst, const PredecessorTable& preds) {
  if (!inst.assoc) throw std::invalid_argument("oracle: instance has no association provider");
  if (inst.classes.empty() || inst.classes.front() != PartClass::Head) {
    throw std::invalid_argument("oracle: class list must start with Head");
  }
  for (std::size_t i = 1; i < inst.classes.size(); ++i) {
    if (slot(inst.classes[i]) <= slot(inst.classes[i - 1])) {
      throw std::invalid_argument("oracle: classes must be distinct and in chain order");
    }
  }
  auto listed = [&](PartClass p) {
    return std::find(inst.classes.begin(), inst.classes.end(), p) != inst.classes.end();
  };
  for (PartClass c : inst.classes) {
    for (PartClass q : preds[c]) {
      if (!listed(q)) {
        throw std::invalid_argument("oracle: class set is not predecessor-closed (" +
                                    std::string(name(c)) + " needs " + std::string(name(q)) +
                                    ")");
      }
    }
  }
  auto by_id = [](const Candidate& a, const Candidate& b) { return a.id < b.id; };
  std::sort(inst.seeds.begin(), inst.seeds.end(), by_id);
  for (const Candidate& s : inst.seeds) {
    if (s.part != PartClass::Head) throw std::invalid_argument("oracle: seeds must be heads");
  }
  for (std::size_t s = 0; s < kNumParts; ++s) {
    std::sort(inst.parts[s].begin(), inst.parts[s].end(), by_id);
    if (!inst.parts[s].empty() && (s == 0 || !listed(part_at(s)))) {
      throw std::invalid_argument("oracle: candidates given for unlisted class " +
                                  std::string(kPartNames[s]));
    }
    for (const Candidate& c : inst.parts[s]) {
      if (slot(c.part) != s) throw std::invalid_argument("oracle: candidate filed under wrong class");
    }
  }
}

/// Refuses (BudgetExceeded) instances too large to enumerate.
inline void check_budget(const OracleInstance& inst, const OracleBudget& budget = {}) {
  if (inst.classes.size() > budget.max_classes) {
    throw BudgetExceeded("oracle: " + std::to_string(inst.classes.size()) +
                         " classes exceed the budget of " + std::to_string(budget.max_classes));
  }
  if (inst.seeds.size() > budget.max_seeds) {
    throw BudgetExceeded("oracle: " + std::to_string(inst.seeds.size()) +
                         " seeds exceed the budget of " + std::to_string(budget.max_seeds));
  }
  double total = 1.0;
  for (PartClass c : inst.classes) {
    const std::size_t n = inst.parts[slot(c)].size();
    if (n > budget.max_candidates_per_class) {
      throw BudgetExceeded("oracle: " + std::to_string(n) + " " + std::string(name(c)) +
                           " candidates exceed the budget of " +
                           std::to_string(budget.max_candidates_per_class));
    }
    total *= detail::partial_injections(n, inst.seeds.size());
  }
  if (total > budget.max_assignments) {
    throw BudgetExceeded("oracle: " + std::to_string(static_cast<long double>(total)) +
                         " assignments exceed the enumeration budget");
  }
}

/// Part list in encoding order.
inline std::vector<Candidate> encoding_order(const OracleInstance& inst) {
  std::vector<Candidate> out;
  for (PartClass c : inst.classes) {
    if (c == PartClass::Head) continue;
    out.insert(out.end(), inst.parts[slot(c)].begin(), inst.parts[slot(c)].end());
  }
  return out;
}

/// Builds the clusters an encoding describes.
inline std::vector<PersonCluster> decode(const OracleInstance& inst, const OracleEncoding& enc) {
  std::vector<PersonCluster> clusters;
  for (std::size_t i = 0; i < inst.seeds.size(); ++i) {
    PersonCluster c;
    c.id = static_cast<ClusterId>(i + 1);
    c.anchor = inst.seeds[i].pos;
    c.add({inst.seeds[i], 1.0, true});
    clusters.push_back(std::move(c));
  }
  const std::vector<Candidate> order = encoding_order(inst);
  if (enc.size() != order.size()) throw std::invalid_argument("oracle: encoding length mismatch");
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (enc[i] < 0) continue;
    clusters.at(static_cast<std::size_t>(enc[i])).add({order[i], 1.0, false});
  }
  return clusters;
}

/// Sum over clusters of each non-seed part's predecessor-restricted affinity
/// to the rest of its cluster.
inline double score_clusters(std::span<const PersonCluster> clusters,
                             const PredecessorTable& preds, const AssociationProvider& assoc) {
  double total = 0.0;
  for (const PersonCluster& c : clusters) {
    for (const auto& p : c.parts) {
      if (!p || p->candidate.part == PartClass::Head) continue;
      total += detail::mean_affinity(p->candidate, c, preds, assoc, true);
    }
  }
  return total;
}

inline double score_assignment(const OracleInstance& inst, const OracleEncoding& enc,
                               const PredecessorTable& preds) {
  return score_clusters(decode(inst, enc), preds, *inst.assoc);
}

/// Encodes clusters (e.g. greedy output) against an instance. Clusters are
/// matched to seeds by their head candidate; parts absent from all clusters
/// are unassigned.
inline OracleEncoding encode(const OracleInstance& inst, std::span<const PersonCluster> clusters) {
  const std::vector<Candidate> order = encoding_order(inst);
  OracleEncoding enc(order.size(), -1);
  for (const PersonCluster& c : clusters) {
    const AssignedPart* head = c.find(PartClass::Head);
    if (!head) continue;
    int seed = -1;
    for (std::size_t s = 0; s < inst.seeds.size(); ++s) {
      if (inst.seeds[s].id == head->candidate.id) seed = static_cast<int>(s);
    }
    if (seed < 0) continue;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const AssignedPart* p = c.find(order[i].part);
      if (p && p->candidate.id == order[i].id) enc[i] = seed;
    }
  }
  return enc;
}

/// Enumerates every assignment of parts to seed clusters (or none) with at
/// most one part per class per cluster and returns a best-scoring one. Among
/// equal scores the lexicographically smallest encoding wins.
inline OracleSolution exhaustive_assign(OracleInstance inst, const PredecessorTable& preds,
                                        const OracleBudget& budget = {}) {
  normalize(inst, preds);
  check_budget(inst, budget);

  const std::vector<Candidate> order = encoding_order(inst);
  const std::size_t n_parts = order.size();
  const std::size_t n_seeds = inst.seeds.size();

  // Pairwise table over seeds followed by parts.
  std::vector<Candidate> all(inst.seeds);
  all.insert(all.end(), order.begin(), order.end());
  const std::size_t n_all = all.size();
  std::vector<double> pw(n_all * n_all);
  for (std::size_t a = 0; a < n_all; ++a) {
    for (std::size_t b = 0; b < n_all; ++b) pw[a * n_all + b] = inst.assoc->pairwise(all[a], all[b]);
  }

  // occupant[cluster][class] = index into `all`, or -1.
  std::vector<std::array<int, kNumParts>> occupant(n_seeds);
  for (std::size_t s = 0; s < n_seeds; ++s) {
    occupant[s].fill(-1);
    occupant[s][slot(PartClass::Head)] = static_cast<int>(s);
  }

  auto affinity = [&](std::size_t part_idx, std::size_t cluster) {
    const std::size_t a = n_seeds + part_idx;
    double sum = 0.0;
    std::size_t n = 0;
    for (PartClass q : preds[order[part_idx].part]) {
      const int b = occupant[cluster][slot(q)];
      if (b < 0) continue;
      sum += pw[a * n_all + static_cast<std::size_t>(b)];
      ++n;
    }
    return n == 0 ? order[part_idx].unary : sum / static_cast<double>(n);
  };

  OracleSolution best;
  best.score = -1.0;
  OracleEncoding cur(n_parts, -1);
  constexpr double kTieEps = 1e-12;

  auto dfs = [&](auto&& self, std::size_t i, double score) -> void {
    if (i == n_parts) {
      best.assignments_enumerated += 1.0;
      if (score > best.score + kTieEps) {
        best.score = score;
        best.encoding = cur;
      }
      return;
    }
    const std::size_t cls = slot(order[i].part);
    cur[i] = -1;
    self(self, i + 1, score);
    for (std::size_t s = 0; s < n_seeds; ++s) {
      if (occupant[s][cls] >= 0) continue;
      const double a = affinity(i, s);
      occupant[s][cls] = static_cast<int>(n_seeds + i);
      cur[i] = static_cast<int>(s);
      self(self, i + 1, score + a);
      occupant[s][cls] = -1;
    }
    cur[i] = -1;
  };
  dfs(dfs, 0, 0.0);
  return best;
}

/// The greedy pipeline restricted to the oracle's search space: every seed
/// becomes a cluster, all candidates are considered, and gating, spawning and
/// suppression are off.
inline AssignmentResult greedy_on_instance(OracleInstance inst, const Tables& tables,
                                           AssignmentConfig config = {}) {
  normalize(inst, tables.predecessors);
  config.head_nms_threshold = 0.0;
  config.enable_candidate_clustering = false;
  config.enable_proximal_gating = false;
  config.enable_spawning = false;
  config.enable_suppression = false;
  config.enable_predecessor_subsets = true;
  Detections det;
  for (const Candidate& s : inst.seeds) det.add(s);
  for (PartClass c : inst.classes) {
    if (c == PartClass::Head) continue;
    for (const Candidate& p : inst.parts[slot(c)]) det.add(p);
  }
  return assemble(det, *inst.assoc, config, tables);
}

}  // namespace gpose

#endif  // GREEDYPOSE_ORACLE_HPP

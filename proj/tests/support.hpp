#ifndef GREEDYPOSE_TESTS_SUPPORT_HPP
#define GREEDYPOSE_TESTS_SUPPORT_HPP

// Instance builders shared by the unit, property and acceptance tests.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "greedypose/greedypose.hpp"

namespace gpose::testing {

inline Candidate cand(CandidateId id, PartClass p, double x, double y, double unary = 1.0) {
  return {id, p, {x, y}, unary};
}

/// Every predecessor-closed class set that starts with Head and has between
/// `min_size` and `max_size` classes, in chain order.
inline std::vector<std::vector<PartClass>> closed_class_sets(std::size_t min_size,
                                                             std::size_t max_size,
                                                             const PredecessorTable& preds =
                                                                 PredecessorTable::defaults()) {
  std::vector<std::vector<PartClass>> out;
  for (std::uint32_t mask = 0; mask < (1u << (kNumParts - 1)); ++mask) {
    std::vector<PartClass> set{PartClass::Head};
    for (std::size_t s = 1; s < kNumParts; ++s) {
      if (mask & (1u << (s - 1))) set.push_back(part_at(s));
    }
    if (set.size() < min_size || set.size() > max_size) continue;
    bool closed = true;
    for (PartClass c : set) {
      for (PartClass q : preds[c]) {
        closed = closed && std::find(set.begin(), set.end(), q) != set.end();
      }
    }
    if (closed) out.push_back(std::move(set));
  }
  return out;
}

/// An oracle instance together with the association model it points at.
struct OwnedInstance {
  OracleInstance inst;
  std::shared_ptr<AssociationProvider> assoc;
  /// Ground-truth person per candidate id (0 for spurious).
  std::vector<std::pair<CandidateId, std::uint32_t>> owner;
};

/// Small instance cut from a noisy synthetic scene: 1..max_people persons,
/// a random predecessor-closed class set, at most `max_per_class` candidates
/// per class (true joints first, then spurious ones).
inline OwnedInstance random_geometric_instance(std::uint64_t seed, std::size_t max_people = 3,
                                               std::size_t max_classes = 5,
                                               std::size_t max_per_class = 4) {
  std::mt19937_64 rng(seed);
  const auto sets = closed_class_sets(2, max_classes);
  const std::size_t n = 1 + rng() % max_people;
  NoiseConfig noise;
  noise.position_sigma = 0.02;
  noise.spurious_per_class = static_cast<int>(rng() % 2);
  SceneGroundTruth gt = generate_scene(n, noise, rng());
  Detections det = render_detections(gt, noise, rng());

  OwnedInstance out;
  out.assoc = std::make_shared<GeometricAssociation>(geometric_association(gt, noise));
  out.inst.assoc = out.assoc.get();
  out.inst.classes = sets[rng() % sets.size()];
  for (PartClass c : out.inst.classes) {
    const auto& all = det[c];
    for (std::size_t i = 0; i < all.size() && i < max_per_class; ++i) {
      out.owner.emplace_back(all[i].id, i < n ? static_cast<std::uint32_t>(i + 1) : 0u);
      if (c == PartClass::Head) {
        if (i < n) out.inst.seeds.push_back(all[i]);
      } else {
        out.inst.parts[slot(c)].push_back(all[i]);
      }
    }
  }
  return out;
}

/// Well-separated instance: one candidate per class per person, pairwise
/// probabilities in [0.9, 1] within a person and [0, 0.1] across persons.
inline OwnedInstance separated_instance(std::uint64_t seed, std::size_t max_people = 3,
                                        std::size_t max_classes = 5) {
  std::mt19937_64 rng(seed);
  const auto sets = closed_class_sets(2, max_classes);
  const std::size_t n = 1 + rng() % max_people;
  std::uniform_real_distribution<double> intra(0.9, 1.0), inter(0.0, 0.1), pos(0.0, 500.0);

  OwnedInstance out;
  out.inst.classes = sets[rng() % sets.size()];
  auto table = std::make_shared<SparseAssociation>();
  std::vector<Candidate> all;
  CandidateId next = 1;
  for (PartClass c : out.inst.classes) {
    for (std::size_t person = 1; person <= n; ++person) {
      Candidate cd{next++, c, {pos(rng), pos(rng)}, 0.9};
      out.owner.emplace_back(cd.id, static_cast<std::uint32_t>(person));
      all.push_back(cd);
      if (c == PartClass::Head) {
        out.inst.seeds.push_back(cd);
      } else {
        out.inst.parts[slot(c)].push_back(cd);
      }
    }
  }
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      const bool same = out.owner[a].second == out.owner[b].second;
      table->set(all[a].id, all[b].id, same ? intra(rng) : inter(rng));
    }
  }
  out.assoc = table;
  out.inst.assoc = out.assoc.get();
  return out;
}

}  // namespace gpose::testing

#endif  // GREEDYPOSE_TESTS_SUPPORT_HPP

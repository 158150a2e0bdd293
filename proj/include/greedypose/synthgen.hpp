#ifndef GREEDYPOSE_SYNTHGEN_HPP
#define GREEDYPOSE_SYNTHGEN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "greedypose/association.hpp"
#include "greedypose/candidate.hpp"
#include "greedypose/tables.hpp"

namespace gpose {

/// Horizontal offset of each joint from the body axis, as a fraction of body
/// height. Negative is image-left (the person's right side when facing the
/// camera). Limb joints sit directly below their shoulder or hip.
inline constexpr std::array<double, kNumParts> kLateralOffset = {
    0.0,  0.0,   -0.12, 0.12,  -0.12, 0.12,  -0.12,
    0.12, -0.07, 0.07,  -0.07, 0.07,  -0.07, 0.07,
};

/// Canonical joint position relative to the head top, in body-height units.
inline Point canonical_offset(PartClass p, const AnthropometricTable& table) noexcept {
  return {kLateralOffset[slot(p)], table[p]};
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

/// Detection noise model. Sigmas are fractions of the person's body height.
struct NoiseConfig {
  double position_sigma = 0.0;
  int spurious_per_class = 0;
  Range unary_true_range{0.7, 1.0};
  Range unary_spurious_range{0.05, 0.3};
  double occlusion_prob = 0.0;
  double pairwise_sigma = 0.08;

  /// Near-duplicate detections around each visible joint.
  int duplicates_per_joint = 0;
  double duplicate_sigma = 0.02;
  Range duplicate_unary_range{0.1, 0.3};

  /// An occluded joint emits a weak candidate at its true position with this
  /// probability, otherwise nothing.
  double occluded_emit_prob = 0.5;
  Range occluded_unary_range{0.05, 0.3};
  /// Classes subject to occlusion.
  std::array<bool, kNumParts> occludable = {true, true, true, true, true, true, true,
                                            true, true, true, true, true, true, true};

  void validate() const {
    auto unit_range = [](const Range& r, const char* what) {
      if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) {
        throw std::invalid_argument(std::string("noise: ") + what + " must lie within [0,1]");
      }
    };
    unit_range(unary_true_range, "unary_true_range");
    unit_range(unary_spurious_range, "unary_spurious_range");
    unit_range(duplicate_unary_range, "duplicate_unary_range");
    unit_range(occluded_unary_range, "occluded_unary_range");
    if (!(occlusion_prob >= 0.0 && occlusion_prob <= 1.0) ||
        !(occluded_emit_prob >= 0.0 && occluded_emit_prob <= 1.0)) {
      throw std::invalid_argument("noise: probabilities must lie in [0,1]");
    }
    if (!(position_sigma >= 0.0) || !(pairwise_sigma >= 0.0) || !(duplicate_sigma >= 0.0)) {
      throw std::invalid_argument("noise: sigmas must be non-negative");
    }
    if (spurious_per_class < 0 || duplicates_per_joint < 0) {
      throw std::invalid_argument("noise: counts must be non-negative");
    }
  }

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

/// Scene layout. People stand side by side in equal-width slots.
struct SceneConfig {
  double height_min = 180.0;
  double height_max = 200.0;
  /// Maximum per-coordinate articulation offset, fraction of body height.
  double articulation = 0.02;
  /// Slot width as a multiple of height_max.
  double slot_spacing = 1.0;
  /// Image extent in pixels; 0 sizes the image to fit the people.
  double image_width = 0.0;
  double image_height = 0.0;

  void validate() const {
    if (!(height_min > 0.0 && height_min <= height_max)) {
      throw std::invalid_argument("scene: need 0 < height_min <= height_max");
    }
    if (!(articulation >= 0.0) || !(slot_spacing > 0.0)) {
      throw std::invalid_argument("scene: articulation must be >= 0 and slot_spacing > 0");
    }
    if (image_width < 0.0 || image_height < 0.0) {
      throw std::invalid_argument("scene: image extent must be non-negative");
    }
  }

  friend bool operator==(const SceneConfig&, const SceneConfig&) = default;
};

struct GtPerson {
  std::uint32_t id = 0;
  Point head_top;
  double height = 0.0;
  std::array<Point, kNumParts> joints{};
  std::array<bool, kNumParts> occluded{};

  double head_length(const AnthropometricTable& table = AnthropometricTable::defaults()) const {
    return table.chin_alpha * height;
  }

  friend bool operator==(const GtPerson&, const GtPerson&) = default;
};

struct SceneGroundTruth {
  double width = 0.0;
  double height = 0.0;
  std::vector<GtPerson> persons;

  /// Mean head length over persons; 0 for an empty scene.
  double mean_head_length(const AnthropometricTable& table = AnthropometricTable::defaults()) const {
    if (persons.empty()) return 0.0;
    double s = 0.0;
    for (const GtPerson& p : persons) s += p.head_length(table);
    return s / static_cast<double>(persons.size());
  }

  friend bool operator==(const SceneGroundTruth&, const SceneGroundTruth&) = default;
};

/// Bound b such that every generated joint satisfies
/// distance(head_top, joint) <= alpha * height * (1 + b).
inline double radial_jitter_bound(const SceneConfig& scene,
                                  const AnthropometricTable& table = AnthropometricTable::defaults()) {
  double b = 0.0;
  for (PartClass p : chain_order()) {
    if (table[p] <= 0.0) continue;
    const Point o = canonical_offset(p, table);
    const double worst = std::hypot(std::abs(o.x) + scene.articulation, o.y + scene.articulation);
    b = std::max(b, worst / table[p] - 1.0);
  }
  return b;
}

inline SceneGroundTruth generate_scene(std::size_t n_people, const NoiseConfig& noise,
                                       std::uint64_t seed, const SceneConfig& scene = {},
                                       const AnthropometricTable& table =
                                           AnthropometricTable::defaults()) {
  noise.validate();
  scene.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double slot_width = scene.slot_spacing * scene.height_max;
  SceneGroundTruth gt;
  gt.width = scene.image_width > 0.0 ? scene.image_width
                                     : slot_width * static_cast<double>(std::max<std::size_t>(n_people, 1));
  gt.height = scene.image_height > 0.0 ? scene.image_height : 1.3 * scene.height_max;
  const double slot_w = gt.width / static_cast<double>(std::max<std::size_t>(n_people, 1));

  for (std::size_t i = 0; i < n_people; ++i) {
    GtPerson p;
    p.id = static_cast<std::uint32_t>(i + 1);
    p.height = uniform(scene.height_min, scene.height_max);
    const double cx = (static_cast<double>(i) + 0.5) * slot_w + uniform(-0.05, 0.05) * slot_w;
    const double slack = std::max(0.0, gt.height - 1.1 * p.height);
    const double top = 0.05 * p.height + uniform(0.0, slack);
    p.head_top = {cx, top};
    for (PartClass c : chain_order()) {
      if (c == PartClass::Head) {
        p.joints[slot(c)] = p.head_top;
        continue;
      }
      const Point o = canonical_offset(c, table);
      const double jx = uniform(-scene.articulation, scene.articulation);
      const double jy = uniform(-scene.articulation, scene.articulation);
      p.joints[slot(c)] = {cx + (o.x + jx) * p.height, top + (o.y + jy) * p.height};
    }
    for (std::size_t s = 0; s < kNumParts; ++s) {
      const double u = unit(rng);
      p.occluded[s] = noise.occludable[s] && u < noise.occlusion_prob;
    }
    gt.persons.push_back(p);
  }
  return gt;
}

inline Detections render_detections(const SceneGroundTruth& gt, const NoiseConfig& noise,
                                    std::uint64_t seed) {
  noise.validate();
  std::mt19937_64 rng(seed ^ 0xD1B54A32D192ED03ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](const Range& r) { return r.lo + (r.hi - r.lo) * unit(rng); };

  Detections det;
  CandidateId next_id = 1;
  auto emit = [&](PartClass c, Point pos, double unary) {
    det.add({next_id++, c, pos, unary});
  };

  for (PartClass c : chain_order()) {
    const std::size_t s = slot(c);
    for (const GtPerson& p : gt.persons) {
      const Point truth = p.joints[s];
      const double sigma = noise.position_sigma * p.height;
      if (p.occluded[s]) {
        if (unit(rng) < noise.occluded_emit_prob) {
          const double dx = normal(rng) * sigma;
          const double dy = normal(rng) * sigma;
          emit(c, {truth.x + dx, truth.y + dy}, uniform(noise.occluded_unary_range));
        }
        continue;
      }
      const double dx = normal(rng) * sigma;
      const double dy = normal(rng) * sigma;
      emit(c, {truth.x + dx, truth.y + dy}, uniform(noise.unary_true_range));
      const double dsigma = noise.duplicate_sigma * p.height;
      for (int d = 0; d < noise.duplicates_per_joint; ++d) {
        const double ex = normal(rng) * dsigma;
        const double ey = normal(rng) * dsigma;
        emit(c, {truth.x + ex, truth.y + ey}, uniform(noise.duplicate_unary_range));
      }
    }
    for (int k = 0; k < noise.spurious_per_class; ++k) {
      const double x = unit(rng) * gt.width;
      const double y = unit(rng) * gt.height;
      emit(c, {x, y}, uniform(noise.unary_spurious_range));
    }
  }
  return det;
}

/// Pairwise model p(a,b) = exp(-(d - mu)^2 / (2 sigma^2)), where mu is the
/// canonical distance between the two part classes at the image's scale and
/// sigma = pairwise_sigma * body height.
class GeometricAssociation final : public AssociationProvider {
 public:
  GeometricAssociation(double head_length, double pairwise_sigma,
                       const AnthropometricTable& table = AnthropometricTable::defaults())
      : head_length_(head_length), pairwise_sigma_(pairwise_sigma) {
    if (!(head_length > 0.0)) {
      throw std::invalid_argument("geometric association: head length must be positive");
    }
    if (!(pairwise_sigma > 0.0)) {
      throw std::invalid_argument("geometric association: pairwise sigma must be positive");
    }
    const double body = head_length / table.chin_alpha;
    sigma_ = pairwise_sigma * body;
    inv_two_sigma2_ = 1.0 / (2.0 * sigma_ * sigma_);
    for (std::size_t a = 0; a < kNumParts; ++a) {
      for (std::size_t b = 0; b < kNumParts; ++b) {
        mu_[a][b] = distance(canonical_offset(part_at(a), table),
                             canonical_offset(part_at(b), table)) *
                    body;
      }
    }
  }

  double pairwise(const Candidate& a, const Candidate& b) const override {
    if (a.id == b.id) return 1.0;
    const double e = distance(a.pos, b.pos) - mu_[slot(a.part)][slot(b.part)];
    return std::exp(-e * e * inv_two_sigma2_);
  }

  double expected_distance(PartClass a, PartClass b) const noexcept {
    return mu_[slot(a)][slot(b)];
  }
  double sigma() const noexcept { return sigma_; }
  double head_length() const noexcept { return head_length_; }
  double pairwise_sigma() const noexcept { return pairwise_sigma_; }

 private:
  double head_length_;
  double pairwise_sigma_;
  double sigma_ = 1.0;
  double inv_two_sigma2_ = 0.5;
  std::array<std::array<double, kNumParts>, kNumParts> mu_{};
};

/// Association model matching a generated scene's scale.
inline GeometricAssociation geometric_association(const SceneGroundTruth& gt,
                                                  const NoiseConfig& noise,
                                                  const AnthropometricTable& table =
                                                      AnthropometricTable::defaults()) {
  const double y = gt.persons.empty() ? table.chin_alpha * 190.0 : gt.mean_head_length(table);
  return GeometricAssociation(y, noise.pairwise_sigma, table);
}

}  // namespace gpose

#endif  // GREEDYPOSE_SYNTHGEN_HPP

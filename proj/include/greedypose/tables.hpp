#ifndef GREEDYPOSE_TABLES_HPP
#define GREEDYPOSE_TABLES_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "greedypose/part_class.hpp"

namespace gpose {

/// Distances of body parts from the top of the head, as fractions of body
/// height. The head top is the origin, so alpha(Head) is 0.
struct AnthropometricTable {
  std::array<double, kNumParts> alpha{};
  double chin_alpha = 0.130;

  double operator[](PartClass p) const noexcept { return alpha[slot(p)]; }

  static AnthropometricTable defaults() noexcept {
    AnthropometricTable t;
    using P = PartClass;
    auto set = [&t](P p, double v) { t.alpha[slot(p)] = v; };
    set(P::Head, 0.0);
    set(P::Neck, 0.182);
    set(P::RShoulder, 0.224);
    set(P::LShoulder, 0.224);
    set(P::RElbow, 0.410);
    set(P::LElbow, 0.410);
    set(P::RWrist, 0.556);
    set(P::LWrist, 0.556);
    set(P::RHip, 0.481);
    set(P::LHip, 0.481);
    set(P::RKnee, 0.726);
    set(P::LKnee, 0.726);
    set(P::RAnkle, 0.972);
    set(P::LAnkle, 0.972);
    return t;
  }

  void validate() const {
    if (!(chin_alpha > 0.0 && chin_alpha <= 1.0)) {
      throw std::invalid_argument("anthropometric table: chin alpha must lie in (0,1]");
    }
    for (std::size_t i = 0; i < kNumParts; ++i) {
      if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0)) {
        throw std::invalid_argument("anthropometric table: alpha of " +
                                    std::string(kPartNames[i]) + " outside [0,1]");
      }
    }
    using P = PartClass;
    const std::array<std::array<P, 3>, 4> limbs = {{
        {P::RShoulder, P::RElbow, P::RWrist},
        {P::LShoulder, P::LElbow, P::LWrist},
        {P::RHip, P::RKnee, P::RAnkle},
        {P::LHip, P::LKnee, P::LAnkle},
    }};
    for (const auto& limb : limbs) {
      if (!((*this)[limb[0]] < (*this)[limb[1]] && (*this)[limb[1]] < (*this)[limb[2]])) {
        throw std::invalid_argument("anthropometric table: alpha must increase down limb " +
                                    std::string(name(limb[0])));
      }
    }
  }

  friend bool operator==(const AnthropometricTable&, const AnthropometricTable&) = default;
};

/// Already-assigned part classes consulted when scoring a part of each class.
struct PredecessorTable {
  std::array<std::vector<PartClass>, kNumParts> preds;

  const std::vector<PartClass>& operator[](PartClass p) const noexcept {
    return preds[slot(p)];
  }

  bool contains(PartClass part, PartClass pred) const noexcept {
    for (PartClass q : preds[slot(part)]) {
      if (q == pred) return true;
    }
    return false;
  }

  static PredecessorTable defaults() {
    using P = PartClass;
    PredecessorTable t;
    auto set = [&t](P p, std::vector<P> v) { t.preds[slot(p)] = std::move(v); };
    set(P::Head, {});
    set(P::Neck, {P::Head});
    set(P::RShoulder, {P::Head, P::Neck});
    set(P::LShoulder, {P::Head, P::Neck, P::RShoulder});
    set(P::RElbow, {P::Head, P::Neck, P::RShoulder});
    set(P::LElbow, {P::Head, P::Neck, P::LShoulder});
    set(P::RWrist, {P::Head, P::Neck, P::RShoulder, P::RElbow});
    set(P::LWrist, {P::Head, P::Neck, P::LShoulder, P::LElbow});
    set(P::RHip, {P::Head, P::Neck, P::LShoulder, P::RShoulder});
    set(P::LHip, {P::Head, P::Neck, P::RShoulder, P::LShoulder});
    set(P::RKnee, {P::Head, P::Neck, P::RShoulder, P::LShoulder, P::RHip});
    set(P::LKnee, {P::Head, P::Neck, P::RShoulder, P::LShoulder, P::LHip});
    set(P::RAnkle, {P::RHip, P::RKnee});
    set(P::LAnkle, {P::LHip, P::LKnee});
    return t;
  }

  // Every predecessor must come strictly earlier in the chain, so sequential
  // processing is a valid topological order.
  void validate() const {
    for (std::size_t i = 0; i < kNumParts; ++i) {
      for (PartClass q : preds[i]) {
        if (slot(q) >= i) {
          throw std::invalid_argument("predecessor table: " + std::string(name(q)) +
                                      " cannot precede " + std::string(kPartNames[i]));
        }
      }
    }
  }

  friend bool operator==(const PredecessorTable&, const PredecessorTable&) = default;
};

struct Tables {
  AnthropometricTable anthropometry = AnthropometricTable::defaults();
  PredecessorTable predecessors = PredecessorTable::defaults();

  friend bool operator==(const Tables&, const Tables&) = default;
};

/// Largest expected displacement of `part` from its head top, in pixels,
/// for a person whose head-top-to-chin length is `head_length_px`.
inline double expected_radius(PartClass part, double head_length_px,
                              const AnthropometricTable& table) {
  if (!(head_length_px > 0.0)) {
    throw std::invalid_argument("expected_radius: head length must be positive");
  }
  return head_length_px / table.chin_alpha * table[part];
}

}  // namespace gpose

#endif  // GREEDYPOSE_TABLES_HPP

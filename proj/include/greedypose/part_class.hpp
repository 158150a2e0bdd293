#ifndef GREEDYPOSE_PART_CLASS_HPP
#define GREEDYPOSE_PART_CLASS_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace gpose {

/// Body-part classes in kinematic-chain order. The underlying value is the
/// zero-based chain position; `chain_index()` gives the one-based index.
enum class PartClass : std::size_t {
  Head = 0,
  Neck,
  RShoulder,
  LShoulder,
  RElbow,
  LElbow,
  RWrist,
  LWrist,
  RHip,
  LHip,
  RKnee,
  LKnee,
  RAnkle,
  LAnkle,
};

inline constexpr std::size_t kNumParts = 14;

inline constexpr std::array<std::string_view, kNumParts> kPartNames = {
    "Head",  "Neck",   "RShoulder", "LShoulder", "RElbow", "LElbow", "RWrist",
    "LWrist", "RHip",  "LHip",      "RKnee",     "LKnee",  "RAnkle", "LAnkle",
};

constexpr std::size_t slot(PartClass p) noexcept { return static_cast<std::size_t>(p); }

constexpr int chain_index(PartClass p) noexcept { return static_cast<int>(slot(p)) + 1; }

constexpr PartClass part_at(std::size_t slot_index) noexcept {
  return static_cast<PartClass>(slot_index);
}

constexpr std::string_view name(PartClass p) noexcept { return kPartNames[slot(p)]; }

inline std::optional<PartClass> parse_part(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kNumParts; ++i) {
    if (kPartNames[i] == s) return part_at(i);
  }
  return std::nullopt;
}

/// All classes, head first, left ankle last.
constexpr std::array<PartClass, kNumParts> chain_order() noexcept {
  std::array<PartClass, kNumParts> out{};
  for (std::size_t i = 0; i < kNumParts; ++i) out[i] = part_at(i);
  return out;
}

}  // namespace gpose

#endif  // GREEDYPOSE_PART_CLASS_HPP

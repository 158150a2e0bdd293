#ifndef GREEDYPOSE_CANDIDATE_HPP
#define GREEDYPOSE_CANDIDATE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "greedypose/part_class.hpp"

namespace gpose {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

inline double squared_distance(Point a, Point b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

using CandidateId = std::uint64_t;

/// A detected keypoint hypothesis for one part class.
struct Candidate {
  CandidateId id = 0;
  PartClass part = PartClass::Head;
  Point pos;
  double unary = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

inline void validate(const Candidate& c) {
  if (!std::isfinite(c.pos.x) || !std::isfinite(c.pos.y)) {
    throw std::invalid_argument("candidate " + std::to_string(c.id) +
                                ": coordinates must be finite");
  }
  if (!(c.unary >= 0.0 && c.unary <= 1.0)) {
    throw std::invalid_argument("candidate " + std::to_string(c.id) +
                                ": unary probability must lie in [0,1]");
  }
}

/// Per-class candidate lists for one image.
struct Detections {
  std::array<std::vector<Candidate>, kNumParts> by_class;

  std::vector<Candidate>& operator[](PartClass p) { return by_class[slot(p)]; }
  const std::vector<Candidate>& operator[](PartClass p) const { return by_class[slot(p)]; }

  void add(const Candidate& c) { by_class[slot(c.part)].push_back(c); }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& v : by_class) n += v.size();
    return n;
  }

  bool empty() const noexcept { return size() == 0; }

  std::vector<Candidate> all() const {
    std::vector<Candidate> out;
    out.reserve(size());
    for (const auto& v : by_class) out.insert(out.end(), v.begin(), v.end());
    return out;
  }

  friend bool operator==(const Detections&, const Detections&) = default;
};

}  // namespace gpose

#endif  // GREEDYPOSE_CANDIDATE_HPP

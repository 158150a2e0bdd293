#ifndef GREEDYPOSE_ASSOCIATION_HPP
#define GREEDYPOSE_ASSOCIATION_HPP

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include "greedypose/candidate.hpp"

namespace gpose {

/// Source of pairwise same-person probabilities. Implementations must be
/// symmetric, return values in [0,1], and return 1 for a candidate paired
/// with itself.
class AssociationProvider {
 public:
  virtual ~AssociationProvider() = default;
  virtual double pairwise(const Candidate& a, const Candidate& b) const = 0;
};

/// Explicit table keyed by candidate-id pairs. Missing pairs are 0; setting
/// one direction sets both.
class SparseAssociation final : public AssociationProvider {
 public:
  void set(CandidateId a, CandidateId b, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("association between " + std::to_string(a) + " and " +
                                  std::to_string(b) + " must lie in [0,1]");
    }
    table_[key(a, b)] = p;
  }

  double pairwise(const Candidate& a, const Candidate& b) const override {
    if (a.id == b.id) return 1.0;
    auto it = table_.find(key(a.id, b.id));
    return it == table_.end() ? 0.0 : it->second;
  }

  std::size_t size() const noexcept { return table_.size(); }

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [k, p] : table_) f(k.first, k.second, p);
  }

 private:
  struct PairHash {
    std::size_t operator()(const std::pair<CandidateId, CandidateId>& k) const noexcept {
      return std::hash<CandidateId>{}(k.first) * 0x9E3779B97F4A7C15ull ^
             std::hash<CandidateId>{}(k.second);
    }
  };

  static std::pair<CandidateId, CandidateId> key(CandidateId a, CandidateId b) noexcept {
    return {std::min(a, b), std::max(a, b)};
  }

  std::unordered_map<std::pair<CandidateId, CandidateId>, double, PairHash> table_;
};

}  // namespace gpose

#endif  // GREEDYPOSE_ASSOCIATION_HPP

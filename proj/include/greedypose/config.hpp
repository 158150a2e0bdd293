#ifndef GREEDYPOSE_CONFIG_HPP
#define GREEDYPOSE_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gpose {

struct AssignmentConfig {
  double head_nms_threshold = 0.5;
  double spawn_threshold = 0.35;
  double hallucination_threshold = 0.6;
  double radius_multiplier = 1.5;
  int kmeans_iterations = 100;
  int extra_clusters = 2;
  std::uint64_t rng_seed = 0;

  // Ablation switches.
  bool enable_proximal_gating = true;
  bool enable_candidate_clustering = true;
  bool enable_predecessor_subsets = true;
  bool enable_spawning = true;
  bool enable_suppression = true;

  void validate() const {
    auto prob = [](double v, const char* what) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string("config: ") + what + " must lie in [0,1]");
      }
    };
    prob(head_nms_threshold, "head_nms_threshold");
    prob(spawn_threshold, "spawn_threshold");
    prob(hallucination_threshold, "hallucination_threshold");
    if (!(radius_multiplier > 0.0)) {
      throw std::invalid_argument("config: radius_multiplier must be positive");
    }
    if (kmeans_iterations < 1) {
      throw std::invalid_argument("config: kmeans_iterations must be at least 1");
    }
    if (extra_clusters < 0) {
      throw std::invalid_argument("config: extra_clusters must be non-negative");
    }
  }

  friend bool operator==(const AssignmentConfig&, const AssignmentConfig&) = default;
};

}  // namespace gpose

#endif  // GREEDYPOSE_CONFIG_HPP

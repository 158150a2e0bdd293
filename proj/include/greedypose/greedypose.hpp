#ifndef GREEDYPOSE_GREEDYPOSE_HPP
#define GREEDYPOSE_GREEDYPOSE_HPP

#include "greedypose/part_class.hpp"
#include "greedypose/candidate.hpp"
#include "greedypose/tables.hpp"
#include "greedypose/config.hpp"
#include "greedypose/association.hpp"
#include "greedypose/kmeans.hpp"
#include "greedypose/assignment.hpp"
#include "greedypose/synthgen.hpp"
#include "greedypose/eval.hpp"
#include "greedypose/oracle.hpp"
#include "greedypose/bench.hpp"
#include "greedypose/io.hpp"

namespace gpose {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // GREEDYPOSE_GREEDYPOSE_HPP

#pragma once

#include <string>

namespace vrclt {

enum class AlgorithmKind { VrSgd, VrAccelerated, VrHeavyBall, BaselineSgd };

std::string to_string(AlgorithmKind kind);
// Accepts the CLI spellings: vr_sgd, vr_accelerated, vr_heavy_ball, baseline_sgd.
AlgorithmKind algorithm_kind_from_string(const std::string& name);

}  // namespace vrclt

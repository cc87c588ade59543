#pragma once

#include <string>

#include "risknet/metagraph.hpp"
#include "risknet/model.hpp"

namespace risknet {

inline constexpr const char* kCheckpointVersion = "risknet-ckpt-1";

struct Checkpoint {
    Hyper hyper;
    NormStats stats;
    ModelParams params;
};

/// JSON with a version tag, the hyper block, normalization statistics and
/// every tensor as {name, shape, row-major values}.
std::string save_checkpoint(const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& json_text);

}  // namespace risknet

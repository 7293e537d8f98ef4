#pragma once

// Model persistence: a human-readable text header (architecture, class
// labels, standardizer statistics, seeds) followed by a contiguous
// little-endian float32 payload holding every parameter tensor.  Training
// math stays 64-bit; the file narrows to 32-bit, so save -> load -> save is
// byte-identical while forward outputs agree only to float precision.

#include <cstdint>
#include <string>
#include <vector>

#include "semg/graph.hpp"
#include "semg/signal.hpp"

namespace semg {

struct CheckpointMeta {
    std::vector<std::string> labels;  // class-label order; empty for autoencoders
    std::uint64_t seed = 0;
    double lambda = 0.0;
};

struct Checkpoint {
    ModelGraph graph;
    Standardizer standardizer;  // fit_origins are NOT serialized; the leakage
                                // guard only applies within the fitting run
    CheckpointMeta meta;
};

void save_checkpoint(const ModelGraph& graph, const Standardizer& standardizer,
                     const CheckpointMeta& meta, const std::string& path);

// Throws DataError with a distinct diagnostic for a version mismatch, a
// truncated payload, and a manifest/offset inconsistency.
Checkpoint load_checkpoint(const std::string& path);

} // namespace semg

#pragma once

// Comparison suite: classical time-domain features, the fully-connected
// autoencoder, the mean-pooling head ablation, and the deterministic
// resource-accounting rules behind the method-comparison table.

#include <cstdint>
#include <string>
#include <vector>

#include "semg/classifier.hpp"
#include "semg/forest.hpp"
#include "semg/signal.hpp"

namespace semg {

// Classical time-domain feature vector in classical_feature_names() order:
// per channel [MAV, VAR, ZC, SSC, WL, RMS], channels concatenated.
struct FeatureVector {
    std::vector<double> values;
};

std::vector<std::string> classical_feature_names(int channels);

// ZC and SSC use an amplitude deadband `eps` to ignore noise-level wiggles;
// the default assumes a standardized (unit-variance) signal.
FeatureVector classical_features(const Tensor& segment, double eps = 0.01);
std::vector<std::vector<double>> classical_feature_matrix(const SegmentSet& set, double eps = 0.01);

// Row-major copy of a [T x C] segment as one flat [T*C] vector — the
// fully-connected autoencoder's input format.
Tensor flatten_segment(const Tensor& segment);
std::vector<Tensor> flatten_segments(const SegmentSet& set);

// Dense autoencoder input -> hidden... -> latent -> mirrored hidden -> input,
// leaky-ReLU between hidden denses, linear bottleneck and output like the
// convolutional model.  Default 2000 -> 512 -> 128 -> 512 -> 2000.
ModelGraph build_fcae(const std::vector<int>& hidden_widths = {512}, int latent_width = 128,
                      std::uint64_t seed = 0, int input_values = 2000);

// Same loss/optimizer machinery as the convolutional autoencoder, over
// pre-flattened vectors.
TrainLog train_fcae(ModelGraph& graph, const std::vector<Tensor>& train_flat,
                    const std::vector<Tensor>& val_flat, double lambda, const TrainConfig& cfg);

// Latent codes for downstream forest training, one row per input.
std::vector<std::vector<double>> fcae_latents(const ModelGraph& graph, const std::vector<Tensor>& flat);

// build_classifier with the attention pooling neutralized: score weights are
// zeroed and frozen, so the pooled vector is exactly the unweighted time
// mean.  Every other head parameter gets the same draws as the attention
// variant built from the same seed, isolating the pooling difference.
ModelGraph gap_head_variant(const ModelGraph& encoder, const ClassifierConfig& cfg, std::uint64_t seed);

// Deterministic cost model of one forward pass.  static = 4 bytes per
// parameter (32-bit deployment); runtime = 4 bytes x the largest
// (input + output) element count across layers; flops counts 2 per
// multiply-accumulate plus documented per-kind elementwise rules.
struct ResourceReport {
    long long static_bytes = 0;
    long long runtime_bytes = 0;
    long long flops = 0;
    std::string rules;  // the counting conventions, verbatim, for report footers
};

ResourceReport resource_report(const ModelGraph& graph);

// Forest cost estimates for the comparison table.  Static size is an
// as-serialized estimate (20 bytes per internal node, 4 + 8*K per leaf) and
// is flagged non-comparable in reports since the paper lists none; inference
// cost is the worst-case path bound num_trees * max_depth + K vote adds.
long long forest_static_bytes(const ForestModel& model);
long long forest_inference_flops(const ForestModel& model);

// Extraction cost of the classical feature set: ~16 flops per sample per
// channel across the six features.
long long classical_feature_flops(int window, int channels);

} // namespace semg

#pragma once

// Supervised head on top of the frozen encoder: layer norm over the feature
// channels, a strided conv, single-query attention pooling, a two-stage MLP,
// and softmax, trained with categorical cross-entropy.

#include <array>
#include <cstdint>

#include "semg/graph.hpp"
#include "semg/metrics.hpp"
#include "semg/signal.hpp"
#include "semg/train.hpp"

namespace semg {

struct ClassifierConfig {
    int head_conv_channels = 32;
    int head_conv_kernel = 5;
    int head_conv_stride = 2;
    std::array<int, 2> mlp_widths{64, 32};
    int num_classes = 6;
    double alpha = 0.1;
    TrainConfig train;

    void validate() const;
};

struct Prediction {
    Tensor probs;    // [K], sums to 1
    int argmax = 0;  // ties broken toward the lower class index
    Tensor logits;   // [K], pre-softmax
};

// Forward through the leading encoder layers only; one [T' x D] feature map
// per segment.  The caller is expected to hand in a graph whose encoder
// layers are frozen — training never reaches them because the trainable
// range starts above.
std::vector<Tensor> extract_latent(const ModelGraph& graph, const SegmentSet& segments);

// General prefix cache: forward through [0, layer) for every segment.
std::vector<Tensor> forward_to_layer(const ModelGraph& graph, const SegmentSet& segments, int layer);

// Copies the trained encoder (marked non-trainable) and stacks the head:
// layer_norm -> conv+leaky_relu -> attention_pool -> dense+leaky_relu
// -> dense+leaky_relu -> dense(K) -> softmax.  Head parameters are fresh
// He-Normal draws from `seed`; encoder parameters are taken from `encoder`.
ModelGraph build_classifier(const ModelGraph& encoder, const ClassifierConfig& cfg, std::uint64_t seed);

// Cross-entropy training of everything above the frozen prefix, with encoder
// outputs computed once and reused every epoch.
TrainLog train_classifier(ModelGraph& graph, const SegmentSet& train, const SegmentSet& val,
                          const ClassifierConfig& cfg);

Prediction predict_one(const ModelGraph& graph, const Tensor& segment);
std::vector<Prediction> predict(const ModelGraph& graph, const SegmentSet& segments);
std::vector<int> predict_labels(const ModelGraph& graph, const SegmentSet& segments);

// Number of classes the graph emits (output-dense width).
int graph_num_classes(const ModelGraph& graph);

} // namespace semg

#pragma once

// A model is a fixed feed-forward stack of layers.  There is no tape: the
// stack order IS the dataflow, forward keeps every intermediate, and backward
// walks the stack in reverse applying each kernel's analytic adjoint.

#include <cstdint>
#include <string>
#include <vector>

#include "semg/layers.hpp"
#include "semg/tensor.hpp"

namespace semg {

// Weight + bias of one layer.  Paramless kinds keep both tensors empty.
// Meaning by kind: conv/tconv/dense -> (w, b); layer_norm -> (gamma, beta);
// attention_pool -> (score weight, score bias[1]).
struct LayerParams {
    Tensor w;
    Tensor b;
};

// Intermediates of one forward pass over a layer range: x[0] is the range
// input and x[k] the output of the k-th layer in the range.
struct ForwardTrace {
    std::vector<Tensor> x;
    const Tensor& output() const { return x.back(); }
};

class ModelGraph {
public:
    std::vector<LayerSpec> specs;
    std::vector<LayerParams> params;
    int input_len = 0;
    int input_ch = 0;
    // Index of the layer whose output is the sparse code Z (-1 when the model
    // has no designated bottleneck).
    int latent_layer = -1;
    // Leading layer count forming the feature extractor; everything at or
    // beyond this index is the task head.
    int encoder_layers = 0;

    int layer_count() const { return static_cast<int>(specs.size()); }

    // Shape after every layer given the configured input; result[0] is the
    // input shape, result[i+1] the output of layer i.  Throws
    // std::invalid_argument when adjacent layers do not fit together.
    std::vector<std::vector<int>> infer_shapes() const;

    // Runs infer_shapes and per-layer spec validation; call after building.
    void validate() const;

    // He-Normal weights / zero biases (layer_norm: gamma 1, beta 0), with the
    // per-layer stream seed derived from (seed, layer index) so adding or
    // freezing layers elsewhere never shifts another layer's draw.  The
    // two-argument form reinitializes only layers in [lo, hi) — used when a
    // head is stacked onto already-trained layers.
    void init_params(std::uint64_t seed);
    void init_params_range(std::uint64_t seed, int lo, int hi);

    // Zero-filled parameter-shaped tensors for one layer (also the gradient
    // slot shape).
    static LayerParams zero_params_like(const LayerSpec& spec);

    Tensor forward(const Tensor& in) const { return forward_range(0, layer_count(), in); }
    Tensor forward_range(int lo, int hi, const Tensor& in) const;
    ForwardTrace forward_trace_range(int lo, int hi, const Tensor& in) const;

    // Reverse pass over [lo, hi).  d_out is dL/d(output of layer hi-1).
    // Parameter gradients are accumulated into grads[i] for i in [lo, hi)
    // (slots must be pre-shaped; see zero_grads).  When extra != nullptr its
    // values are added to dL/d(output of layer extra_at) on the way down,
    // which is how a penalty on an intermediate activation enters.  Returns
    // dL/d(input of layer lo).
    Tensor backward_range(int lo, int hi, const ForwardTrace& trace, const Tensor& d_out,
                          std::vector<LayerParams>& grads,
                          const Tensor* extra = nullptr, int extra_at = -1) const;

    // Grad slots for all layers, shaped like params, zero-filled.
    std::vector<LayerParams> zero_grads() const;

    // Pointers to the parameters (w then b per layer, ascending index) of
    // every layer satisfying `take(i)`; same order for matching grad slots.
    std::vector<Tensor*> collect_params(const std::vector<int>& layer_ids);
    static std::vector<Tensor*> collect_slots(std::vector<LayerParams>& slots, const std::vector<int>& layer_ids);

    // Indices of layers that own parameters and are marked trainable.
    std::vector<int> trainable_layers() const;
    // Longest initial run of layers with no trainable parameters; forward
    // over [0, prefix) is constant during training and can be cached.
    int frozen_prefix() const;

    std::size_t param_count() const;

    // Flat copy of every parameter value, in layer order (w then b); restore
    // rejects a size mismatch.
    std::vector<double> snapshot() const;
    void restore(const std::vector<double>& flat);
};

} // namespace semg

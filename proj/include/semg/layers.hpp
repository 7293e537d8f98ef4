#pragma once

#include <string>

#include "semg/tensor.hpp"

namespace semg {

enum class LayerKind {
    Conv1d,
    TConv1d,
    Dense,
    LayerNorm,
    LeakyRelu,
    AttentionPool,
    Softmax,
};

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    std::string name;
    int in_channels = 0;   // dense: F_in; layer_norm/attention_pool: D
    int out_channels = 0;  // dense: F_out
    int kernel_size = 1;
    int stride = 1;
    double alpha = 0.1;    // leaky slope
    double eps = 1e-5;     // layer_norm variance guard
    bool trainable = true;

    bool has_params() const {
        return kind != LayerKind::LeakyRelu && kind != LayerKind::Softmax;
    }
    void validate() const;
};

// Output length of a valid (no padding) strided convolution.
inline int conv_out_len(int t_in, int kernel, int stride) {
    return (t_in - kernel) / stride + 1;
}

// Output length of the adjoint transposed convolution.
inline int tconv_out_len(int t_in, int kernel, int stride) {
    return (t_in - 1) * stride + kernel;
}

// --- forward kernels ------------------------------------------------------
//
// conv1d is cross-correlation (no kernel flip). Weight layouts:
//   conv1d  [K x C_in x C_out]
//   tconv1d [K x C_out x C_in]
//   dense   [F_in x F_out]
// and tconv1d with the same flat weight array as a conv1d is its adjoint.

Tensor conv1d_forward(const Tensor& in, const Tensor& w, const Tensor& b, int stride);
Tensor tconv1d_forward(const Tensor& in, const Tensor& w, const Tensor& b, int stride);
Tensor dense_forward(const Tensor& in, const Tensor& w, const Tensor& b);
Tensor layer_norm_forward(const Tensor& in, const Tensor& gamma, const Tensor& beta, double eps);
Tensor leaky_relu_forward(const Tensor& in, double alpha);
Tensor attention_pool_forward(const Tensor& in, const Tensor& score_w, const Tensor& score_b);
Tensor softmax_forward(const Tensor& in);

// --- backward kernels -----------------------------------------------------
//
// d_in is assigned; d_w/d_b are accumulated (callers zero them per batch).

void conv1d_backward(const Tensor& in, const Tensor& w, int stride, const Tensor& d_out,
                     Tensor& d_in, Tensor& d_w, Tensor& d_b);
void tconv1d_backward(const Tensor& in, const Tensor& w, int stride, const Tensor& d_out,
                      Tensor& d_in, Tensor& d_w, Tensor& d_b);
void dense_backward(const Tensor& in, const Tensor& w, const Tensor& d_out,
                    Tensor& d_in, Tensor& d_w, Tensor& d_b);
void layer_norm_backward(const Tensor& in, const Tensor& gamma, double eps, const Tensor& d_out,
                         Tensor& d_in, Tensor& d_gamma, Tensor& d_beta);
void leaky_relu_backward(const Tensor& in, double alpha, const Tensor& d_out, Tensor& d_in);
void attention_pool_backward(const Tensor& in, const Tensor& score_w, const Tensor& score_b,
                             const Tensor& d_out, Tensor& d_in, Tensor& d_w, Tensor& d_b);
void softmax_backward(const Tensor& out, const Tensor& d_out, Tensor& d_in);

} // namespace semg

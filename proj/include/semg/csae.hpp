#pragma once

// Convolutional sparse autoencoder: strided-conv encoder, linear bottleneck
// whose activations carry the L1 activity penalty, and a mirrored
// transposed-conv decoder whose final kernel is solved so the output length
// lands exactly back on the input length.

#include <array>
#include <cstdint>

#include "semg/graph.hpp"
#include "semg/signal.hpp"
#include "semg/train.hpp"

namespace semg {

struct CsaeConfig {
    std::array<int, 3> filters{16, 32, 8};     // block 1, block 2, bottleneck D
    std::array<int, 3> kernel_sizes{11, 7, 5};
    std::array<int, 3> strides{4, 5, 1};
    double alpha = 0.1;    // leaky slope everywhere
    double lambda = 1e-7;  // L1 activity coefficient
    int input_len = 1000;  // segment window length the decoder must restore
    TrainConfig train;

    void validate() const;
};

// Encoder [conv + leaky_relu] x2 + bottleneck conv (no activation: the
// bottleneck output is Z, exactly what the decoder consumes); decoder
// mirrors with kernel/stride order reversed, final kernel solved from the
// length equation.  Throws when no final kernel can restore input_len.
ModelGraph build_csae(const CsaeConfig& cfg, std::uint64_t seed);

// Bottleneck sequence length T' for this config (after the three convs).
int csae_latent_len(const CsaeConfig& cfg);

// Minimizes mean-over-batch [MSE + lambda * sum|Z|]; labels are never read.
// Early stopping restores the best-validation-loss parameters.
TrainLog train_autoencoder(ModelGraph& graph, const SegmentSet& train, const SegmentSet& val,
                           const CsaeConfig& cfg);

// Pooled R^2 = 1 - SS_res/SS_tot over every element of the set, with SS_tot
// around the set's element mean.  DataError on a zero-variance set.
double reconstruct_r2(const ModelGraph& graph, const SegmentSet& set);

// Mean reconstruction MSE per segment.
double reconstruction_mse(const ModelGraph& graph, const SegmentSet& set);

// Mean |Z| per bottleneck element over the whole set.
double mean_abs_latent(const ModelGraph& graph, const SegmentSet& set);

} // namespace semg

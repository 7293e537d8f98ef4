#pragma once

// Scalar losses with analytic gradients.  Each *_grad returns the loss and
// assigns d_pred (same shape as the prediction); the caller feeds d_pred into
// the graph backward pass.

#include <cmath>

#include "semg/tensor.hpp"

namespace semg {

// Mean squared error over all elements: L = (1/N) sum_i (p_i - y_i)^2.
inline double mse_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target))
        throw std::invalid_argument("mse_loss: shape mismatch " + pred.shape_str() + " vs " + target.shape_str());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

inline double mse_loss_grad(const Tensor& pred, const Tensor& target, Tensor& d_pred) {
    if (!pred.same_shape(target))
        throw std::invalid_argument("mse_loss: shape mismatch " + pred.shape_str() + " vs " + target.shape_str());
    d_pred.shape = pred.shape;
    d_pred.data.resize(pred.size());
    const double n = static_cast<double>(pred.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
        d_pred[i] = 2.0 * d / n;
    }
    return acc / n;
}

// Activity magnitude sum_i |z_i| (the sparsity penalty is lambda times this).
inline double l1_activity(const Tensor& z) {
    double acc = 0.0;
    for (double v : z.data) acc += std::fabs(v);
    return acc;
}

// Subgradient of sum |z|: sign(z), taken as 0 at exactly 0.  Accumulates
// lambda * sign(z) into d_z so it can be stacked on top of another gradient.
inline double l1_activity_grad(const Tensor& z, double lambda, Tensor& d_z) {
    if (!d_z.same_shape(z)) {
        d_z.shape = z.shape;
        d_z.data.assign(z.size(), 0.0);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double v = z[i];
        acc += std::fabs(v);
        if (v > 0.0)
            d_z[i] += lambda;
        else if (v < 0.0)
            d_z[i] -= lambda;
    }
    return acc;
}

// Categorical cross-entropy against a one-hot label: L = -log p[label].
// Probabilities are clamped at 1e-12 before the log so an exactly-zero
// probability yields a large finite loss instead of inf.
inline double cross_entropy(const Tensor& probs, int label) {
    if (label < 0 || label >= static_cast<int>(probs.size()))
        throw std::invalid_argument("cross_entropy: label out of range");
    const double p = std::max(probs[static_cast<std::size_t>(label)], 1e-12);
    return -std::log(p);
}

// Gradient w.r.t. the probability vector: -1/p at the true class, 0 elsewhere
// (and 0 everywhere the clamp was active, matching the flat loss there).
inline double cross_entropy_grad(const Tensor& probs, int label, Tensor& d_probs) {
    if (label < 0 || label >= static_cast<int>(probs.size()))
        throw std::invalid_argument("cross_entropy: label out of range");
    d_probs.shape = probs.shape;
    d_probs.data.assign(probs.size(), 0.0);
    const double raw = probs[static_cast<std::size_t>(label)];
    const double p = std::max(raw, 1e-12);
    if (raw >= 1e-12) d_probs[static_cast<std::size_t>(label)] = -1.0 / p;
    return -std::log(p);
}

} // namespace semg

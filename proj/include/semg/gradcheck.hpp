#pragma once

// Central-difference verification of the analytic backward pass.  For each
// parameter entry (and each input element) the probe loss is evaluated at
// w ± h and (f(w+h) - f(w-h)) / 2h is compared against the analytic gradient
// using rel = |a - n| / max(|a| + |n|, 1e-6).

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "semg/graph.hpp"

namespace semg {

// The two faces of one scalar loss: `value` is forward-only (used at the
// perturbed points), `grad` additionally fills per-layer parameter gradients
// and the input gradient.  Both must describe the same function of
// (parameters, input).
struct GradProbe {
    std::function<double(const ModelGraph&, const Tensor&)> value;
    std::function<double(const ModelGraph&, const Tensor&, std::vector<LayerParams>&, Tensor&)> grad;
};

struct GradCheckReport {
    double max_rel = 0.0;
    std::size_t checked = 0;
    std::size_t failed = 0;  // entries with rel >= tol
    double tol = 1e-4;
    std::string worst;  // entry with the largest relative error, e.g. "enc2.w[17]"
    // max relative error per layer name (parameters), plus an "input" row
    std::vector<std::pair<std::string, double>> per_layer;

    bool passed() const { return checked > 0 && failed == 0; }
};

// Perturbs every parameter of every parameterized layer, then every input
// element.  When max_checks > 0 and the graph has more entries than that,
// a deterministic strided subset is checked instead (stride chosen to land
// close to max_checks entries, phase derived from the stride so repeated
// calls on the same graph hit the same subset).
GradCheckReport gradient_check(ModelGraph& graph, const GradProbe& probe, const Tensor& input,
                               double h = 1e-5, double tol = 1e-4, std::size_t max_checks = 0);

// Reconstruction objective mean((out - target)^2) + lambda * sum|Z| with Z
// read at graph.latent_layer.  The target is fixed at construction so the
// input gradient has no direct-target path.
GradProbe reconstruction_probe(Tensor target, double lambda);

// Cross-entropy -log(probs[label]) on a graph whose final layer is softmax.
GradProbe classification_probe(int label);

} // namespace semg

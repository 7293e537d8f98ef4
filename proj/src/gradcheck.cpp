#include "semg/gradcheck.hpp"

#include <cmath>
#include <memory>

#include "semg/losses.hpp"

namespace semg {

namespace {

double rel_err(double a, double n) {
    return std::fabs(a - n) / std::max(std::fabs(a) + std::fabs(n), 1e-6);
}

struct Tracker {
    GradCheckReport rep;

    void record(const std::string& where, std::size_t idx, double analytic, double numeric, double tol) {
        const double r = rel_err(analytic, numeric);
        ++rep.checked;
        if (r >= tol) ++rep.failed;
        if (rep.worst.empty() || r > rep.max_rel) {
            rep.max_rel = r;
            rep.worst = where + "[" + std::to_string(idx) + "]";
        }
        for (auto& [name, v] : rep.per_layer) {
            if (name == where) {
                if (r > v) v = r;
                return;
            }
        }
        rep.per_layer.emplace_back(where, r);
    }
};

} // namespace

GradCheckReport gradient_check(ModelGraph& graph, const GradProbe& probe, const Tensor& input,
                               double h, double tol, std::size_t max_checks) {
    std::vector<LayerParams> grads = graph.zero_grads();
    Tensor d_input;
    const double loss0 = probe.grad(graph, input, grads, d_input);
    require_finite(loss0, "gradient_check probe loss");

    std::size_t total = input.size();
    for (const LayerParams& p : graph.params) total += p.w.size() + p.b.size();
    std::size_t stride = 1;
    if (max_checks > 0 && total > max_checks) stride = (total + max_checks - 1) / max_checks;

    Tracker tk;
    tk.rep.tol = tol;
    std::size_t cursor = 0;  // global entry index, drives the subsampling stride

    const auto fd = [&](Tensor& host, std::size_t i, const std::string& where, double analytic) {
        const double keep = host[i];
        host[i] = keep + h;
        const double up = probe.value(graph, input);
        host[i] = keep - h;
        const double dn = probe.value(graph, input);
        host[i] = keep;
        tk.record(where, i, analytic, (up - dn) / (2.0 * h), tol);
    };

    for (int li = 0; li < graph.layer_count(); ++li) {
        LayerParams& p = graph.params[static_cast<std::size_t>(li)];
        const std::string& name = graph.specs[static_cast<std::size_t>(li)].name;
        for (std::size_t i = 0; i < p.w.size(); ++i, ++cursor)
            if (cursor % stride == 0) fd(p.w, i, name + ".w", grads[static_cast<std::size_t>(li)].w[i]);
        for (std::size_t i = 0; i < p.b.size(); ++i, ++cursor)
            if (cursor % stride == 0) fd(p.b, i, name + ".b", grads[static_cast<std::size_t>(li)].b[i]);
    }

    Tensor in_copy = input;
    for (std::size_t i = 0; i < in_copy.size(); ++i, ++cursor) {
        if (cursor % stride != 0) continue;
        const double keep = in_copy[i];
        in_copy[i] = keep + h;
        const double up = probe.value(graph, in_copy);
        in_copy[i] = keep - h;
        const double dn = probe.value(graph, in_copy);
        in_copy[i] = keep;
        tk.record("input", i, d_input[i], (up - dn) / (2.0 * h), tol);
    }

    return tk.rep;
}

GradProbe reconstruction_probe(Tensor target, double lambda) {
    GradProbe probe;
    const auto target_ptr = std::make_shared<Tensor>(std::move(target));
    probe.value = [target_ptr, lambda](const ModelGraph& g, const Tensor& in) {
        if (g.latent_layer < 0) throw std::invalid_argument("reconstruction probe: graph has no latent layer");
        const ForwardTrace tr = g.forward_trace_range(0, g.layer_count(), in);
        const Tensor& z = tr.x[static_cast<std::size_t>(g.latent_layer) + 1];
        return mse_loss(tr.output(), *target_ptr) + lambda * l1_activity(z);
    };
    probe.grad = [target_ptr, lambda](const ModelGraph& g, const Tensor& in, std::vector<LayerParams>& grads,
                                      Tensor& d_input) {
        if (g.latent_layer < 0) throw std::invalid_argument("reconstruction probe: graph has no latent layer");
        const ForwardTrace tr = g.forward_trace_range(0, g.layer_count(), in);
        const Tensor& z = tr.x[static_cast<std::size_t>(g.latent_layer) + 1];
        Tensor d_out;
        double loss = mse_loss_grad(tr.output(), *target_ptr, d_out);
        Tensor d_z(z.shape);
        loss += lambda * l1_activity_grad(z, lambda, d_z);
        d_input = g.backward_range(0, g.layer_count(), tr, d_out, grads, &d_z, g.latent_layer);
        return loss;
    };
    return probe;
}

GradProbe classification_probe(int label) {
    GradProbe probe;
    probe.value = [label](const ModelGraph& g, const Tensor& in) {
        return cross_entropy(g.forward(in), label);
    };
    probe.grad = [label](const ModelGraph& g, const Tensor& in, std::vector<LayerParams>& grads, Tensor& d_input) {
        const ForwardTrace tr = g.forward_trace_range(0, g.layer_count(), in);
        Tensor d_probs;
        const double loss = cross_entropy_grad(tr.output(), label, d_probs);
        d_input = g.backward_range(0, g.layer_count(), tr, d_probs, grads);
        return loss;
    };
    return probe;
}

} // namespace semg

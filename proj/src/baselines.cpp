#include "semg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semg {

std::vector<std::string> classical_feature_names(int channels) {
    static const char* base[] = {"mav", "var", "zc", "ssc", "wl", "rms"};
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(channels) * 6);
    for (int c = 0; c < channels; ++c)
        for (const char* b : base) names.push_back("ch" + std::to_string(c + 1) + "_" + b);
    return names;
}

FeatureVector classical_features(const Tensor& segment, double eps) {
    if (segment.ndim() != 2)
        throw std::invalid_argument("classical_features: expected [T x C] segment, got " + segment.shape_str());
    if (eps < 0.0) throw std::invalid_argument("classical_features: eps must be >= 0");
    const int t_len = segment.dim(0), channels = segment.dim(1);

    FeatureVector fv;
    fv.values.reserve(static_cast<std::size_t>(channels) * 6);
    std::vector<double> x(static_cast<std::size_t>(t_len));
    for (int c = 0; c < channels; ++c) {
        for (int t = 0; t < t_len; ++t) x[static_cast<std::size_t>(t)] = segment.at(t, c);

        double mav = 0.0, mean = 0.0, sq = 0.0, wl = 0.0;
        for (double v : x) {
            mav += std::abs(v);
            mean += v;
            sq += v * v;
        }
        mav /= t_len;
        mean /= t_len;
        double var = 0.0;
        for (double v : x) var += (v - mean) * (v - mean);
        var /= t_len;  // population variance, matching the standardizer's convention

        long long zc = 0;
        for (int t = 0; t + 1 < t_len; ++t) {
            const double a = x[static_cast<std::size_t>(t)], b = x[static_cast<std::size_t>(t + 1)];
            wl += std::abs(b - a);
            if (a * b < 0.0 && std::abs(a - b) >= eps) ++zc;
        }
        long long ssc = 0;
        for (int t = 1; t + 1 < t_len; ++t) {
            const double prev = x[static_cast<std::size_t>(t)] - x[static_cast<std::size_t>(t - 1)];
            const double next = x[static_cast<std::size_t>(t)] - x[static_cast<std::size_t>(t + 1)];
            if (prev * next > 0.0 && (std::abs(prev) >= eps || std::abs(next) >= eps)) ++ssc;
        }
        const double rms = std::sqrt(sq / t_len);

        fv.values.push_back(mav);
        fv.values.push_back(var);
        fv.values.push_back(static_cast<double>(zc));
        fv.values.push_back(static_cast<double>(ssc));
        fv.values.push_back(wl);
        fv.values.push_back(rms);
    }
    for (double v : fv.values)
        if (!std::isfinite(v)) throw NumericError("classical_features: non-finite feature value");
    return fv;
}

std::vector<std::vector<double>> classical_feature_matrix(const SegmentSet& set, double eps) {
    std::vector<std::vector<double>> rows;
    rows.reserve(set.segments.size());
    for (const Tensor& seg : set.segments) rows.push_back(classical_features(seg, eps).values);
    return rows;
}

Tensor flatten_segment(const Tensor& segment) {
    if (segment.ndim() != 2)
        throw std::invalid_argument("flatten_segment: expected [T x C] segment, got " + segment.shape_str());
    return Tensor({static_cast<int>(segment.size())}, segment.data);
}

std::vector<Tensor> flatten_segments(const SegmentSet& set) {
    std::vector<Tensor> flat;
    flat.reserve(set.segments.size());
    for (const Tensor& seg : set.segments) flat.push_back(flatten_segment(seg));
    return flat;
}

ModelGraph build_fcae(const std::vector<int>& hidden_widths, int latent_width, std::uint64_t seed,
                      int input_values) {
    if (latent_width < 1) throw std::invalid_argument("build_fcae: latent_width must be >= 1");
    if (input_values < 1) throw std::invalid_argument("build_fcae: input_values must be >= 1");
    for (int h : hidden_widths)
        if (h < 1) throw std::invalid_argument("build_fcae: hidden widths must be >= 1");

    ModelGraph g;
    g.input_len = input_values;
    g.input_ch = 1;

    const auto dense = [&g](const std::string& name, int f_in, int f_out) {
        LayerSpec sp;
        sp.kind = LayerKind::Dense;
        sp.name = name;
        sp.in_channels = f_in;
        sp.out_channels = f_out;
        g.specs.push_back(sp);
    };
    const auto act = [&g](const std::string& name, int width) {
        LayerSpec sp;
        sp.kind = LayerKind::LeakyRelu;
        sp.name = name;
        sp.in_channels = width;
        sp.out_channels = width;
        g.specs.push_back(sp);
    };

    int width = input_values;
    int stage = 0;
    for (int h : hidden_widths) {
        ++stage;
        dense("enc" + std::to_string(stage), width, h);
        act("enc" + std::to_string(stage) + "_act", h);
        width = h;
    }
    dense("code", width, latent_width);  // linear bottleneck
    g.latent_layer = g.layer_count() - 1;
    g.encoder_layers = g.layer_count();

    width = latent_width;
    stage = 0;
    for (auto it = hidden_widths.rbegin(); it != hidden_widths.rend(); ++it) {
        ++stage;
        dense("dec" + std::to_string(stage), width, *it);
        act("dec" + std::to_string(stage) + "_act", *it);
        width = *it;
    }
    dense("recon", width, input_values);  // linear output

    g.params.resize(g.specs.size());
    g.init_params(seed);
    g.validate();
    return g;
}

TrainLog train_fcae(ModelGraph& graph, const std::vector<Tensor>& train_flat,
                    const std::vector<Tensor>& val_flat, double lambda, const TrainConfig& cfg) {
    if (train_flat.empty() || val_flat.empty()) throw DataError("train_fcae: empty split");
    if (lambda < 0.0) throw std::invalid_argument("train_fcae: lambda must be >= 0");
    if (graph.frozen_prefix() != 0)
        throw std::invalid_argument("train_fcae: autoencoder layers must all be trainable");
    ReconstructionObjective obj(train_flat, val_flat, lambda, graph.latent_layer + 1, graph.latent_layer);
    return train_loop(graph, obj, cfg);
}

std::vector<std::vector<double>> fcae_latents(const ModelGraph& graph, const std::vector<Tensor>& flat) {
    std::vector<std::vector<double>> rows;
    rows.reserve(flat.size());
    for (const Tensor& x : flat) rows.push_back(graph.forward_range(0, graph.encoder_layers, x).data);
    return rows;
}

ModelGraph gap_head_variant(const ModelGraph& encoder, const ClassifierConfig& cfg, std::uint64_t seed) {
    ModelGraph g = build_classifier(encoder, cfg, seed);
    for (int i = 0; i < g.layer_count(); ++i) {
        if (g.specs[i].kind != LayerKind::AttentionPool) continue;
        g.specs[static_cast<std::size_t>(i)].name = "gap";
        g.specs[static_cast<std::size_t>(i)].trainable = false;  // constant scores stay constant
        g.params[static_cast<std::size_t>(i)].w.fill(0.0);
        g.params[static_cast<std::size_t>(i)].b.fill(0.0);
        return g;
    }
    throw std::logic_error("gap_head_variant: classifier head has no pooling layer");
}

ResourceReport resource_report(const ModelGraph& graph) {
    const std::vector<std::vector<int>> shapes = graph.infer_shapes();
    const auto elems = [](const std::vector<int>& shape) {
        long long n = 1;
        for (int d : shape) n *= d;
        return n;
    };

    long long flops = 0;
    long long peak = 0;
    for (int i = 0; i < graph.layer_count(); ++i) {
        const LayerSpec& s = graph.specs[static_cast<std::size_t>(i)];
        const std::vector<int>& in = shapes[static_cast<std::size_t>(i)];
        const std::vector<int>& out = shapes[static_cast<std::size_t>(i) + 1];
        peak = std::max(peak, elems(in) + elems(out));

        const long long n_in = elems(in), n_out = elems(out);
        switch (s.kind) {
            case LayerKind::Conv1d:
                flops += n_out * 2LL * s.kernel_size * s.in_channels + n_out;
                break;
            case LayerKind::TConv1d:
                flops += static_cast<long long>(in[0]) * 2LL * s.kernel_size * s.out_channels * s.in_channels + n_out;
                break;
            case LayerKind::Dense:
                flops += 2LL * s.in_channels * s.out_channels + s.out_channels;
                break;
            case LayerKind::LayerNorm:
                flops += 8LL * n_in + 6LL * in[0];
                break;
            case LayerKind::LeakyRelu:
                flops += n_in;
                break;
            case LayerKind::AttentionPool:
                // scores (MAC + bias), score softmax, weighted sum
                flops += static_cast<long long>(in[0]) * (2LL * in[1] + 1) + 5LL * in[0] + 2LL * n_in;
                break;
            case LayerKind::Softmax:
                flops += 5LL * n_in;
                break;
        }
    }

    ResourceReport rep;
    rep.static_bytes = 4LL * static_cast<long long>(graph.param_count());
    rep.runtime_bytes = 4LL * peak;
    rep.flops = flops;
    rep.rules =
        "static = 4 B/parameter (float32 deployment); "
        "runtime = 4 B x max over layers of (input + output elements); "
        "flops: MAC = 2, conv = T_out*C_out*(2*K*C_in) + bias adds, "
        "tconv = T_in*(2*K*C_out*C_in) + bias adds, dense = 2*F_in*F_out + F_out, "
        "layer_norm = 8/elem + 6/row, leaky_relu = 1/elem, softmax = 5/elem, "
        "attention = T*(2*D+1) scores + 5*T softmax + 2*T*D pooling";
    return rep;
}

long long forest_static_bytes(const ForestModel& model) {
    long long bytes = 0;
    for (const DecisionTree& tree : model.trees)
        for (const TreeNode& node : tree.nodes)
            bytes += node.feature >= 0 ? 20 : 4 + 8LL * model.num_classes;
    return bytes;
}

long long forest_inference_flops(const ForestModel& model) {
    return static_cast<long long>(model.trees.size()) * model.max_depth + model.num_classes;
}

long long classical_feature_flops(int window, int channels) {
    return 16LL * window * channels;
}

} // namespace semg

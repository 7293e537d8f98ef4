#include "semg/csae.hpp"

#include "semg/losses.hpp"

namespace semg {

void CsaeConfig::validate() const {
    for (int f : filters)
        if (f < 1) throw std::invalid_argument("csae: filter counts must be >= 1");
    for (int k : kernel_sizes)
        if (k < 1) throw std::invalid_argument("csae: kernel sizes must be >= 1");
    for (int s : strides)
        if (s < 1) throw std::invalid_argument("csae: strides must be >= 1");
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("csae: alpha must be in (0,1)");
    if (lambda < 0.0) throw std::invalid_argument("csae: lambda must be >= 0");
    if (input_len < 1) throw std::invalid_argument("csae: input_len must be >= 1");
    train.validate();
}

int csae_latent_len(const CsaeConfig& cfg) {
    int t = cfg.input_len;
    for (int i = 0; i < 3; ++i) {
        if (t < cfg.kernel_sizes[static_cast<std::size_t>(i)])
            throw std::invalid_argument("csae: encoder stage " + std::to_string(i + 1) + " input length " +
                                        std::to_string(t) + " shorter than kernel " +
                                        std::to_string(cfg.kernel_sizes[static_cast<std::size_t>(i)]));
        t = conv_out_len(t, cfg.kernel_sizes[static_cast<std::size_t>(i)], cfg.strides[static_cast<std::size_t>(i)]);
    }
    return t;
}

ModelGraph build_csae(const CsaeConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const int t_latent = csae_latent_len(cfg);

    // Decoder lengths with kernel/stride order reversed; the final transposed
    // conv must bridge from t_up back to input_len, which pins its kernel to
    // input_len - (t_up - 1) * stride0.
    int t_up = t_latent;
    t_up = tconv_out_len(t_up, cfg.kernel_sizes[2], cfg.strides[2]);
    t_up = tconv_out_len(t_up, cfg.kernel_sizes[1], cfg.strides[1]);
    const int final_k = cfg.input_len - (t_up - 1) * cfg.strides[0];
    if (final_k < 1)
        throw std::invalid_argument("csae: cannot restore length " + std::to_string(cfg.input_len) +
                                    ": decoder already reaches " + std::to_string((t_up - 1) * cfg.strides[0] + 1) +
                                    " before the final kernel (solved kernel " + std::to_string(final_k) + ")");

    ModelGraph g;
    g.input_len = cfg.input_len;
    g.input_ch = 2;
    const auto conv = [&](const std::string& name, int c_in, int c_out, int k, int s) {
        LayerSpec sp;
        sp.kind = LayerKind::Conv1d;
        sp.name = name;
        sp.in_channels = c_in;
        sp.out_channels = c_out;
        sp.kernel_size = k;
        sp.stride = s;
        g.specs.push_back(sp);
    };
    const auto tconv = [&](const std::string& name, int c_in, int c_out, int k, int s) {
        LayerSpec sp;
        sp.kind = LayerKind::TConv1d;
        sp.name = name;
        sp.in_channels = c_in;
        sp.out_channels = c_out;
        sp.kernel_size = k;
        sp.stride = s;
        g.specs.push_back(sp);
    };
    const auto act = [&](const std::string& name, int ch) {
        LayerSpec sp;
        sp.kind = LayerKind::LeakyRelu;
        sp.name = name;
        sp.in_channels = ch;
        sp.out_channels = ch;
        sp.alpha = cfg.alpha;
        g.specs.push_back(sp);
    };

    conv("enc1", 2, cfg.filters[0], cfg.kernel_sizes[0], cfg.strides[0]);
    act("enc1_act", cfg.filters[0]);
    conv("enc2", cfg.filters[0], cfg.filters[1], cfg.kernel_sizes[1], cfg.strides[1]);
    act("enc2_act", cfg.filters[1]);
    conv("enc3", cfg.filters[1], cfg.filters[2], cfg.kernel_sizes[2], cfg.strides[2]);

    tconv("dec1", cfg.filters[2], cfg.filters[1], cfg.kernel_sizes[2], cfg.strides[2]);
    act("dec1_act", cfg.filters[1]);
    tconv("dec2", cfg.filters[1], cfg.filters[0], cfg.kernel_sizes[1], cfg.strides[1]);
    act("dec2_act", cfg.filters[0]);
    tconv("dec3", cfg.filters[0], 2, final_k, cfg.strides[0]);

    g.latent_layer = 4;   // enc3 output == Z
    g.encoder_layers = 5;
    g.init_params(seed);
    g.validate();

    const std::vector<std::vector<int>> shapes = g.infer_shapes();
    if (shapes.back() != std::vector<int>{cfg.input_len, 2})
        throw std::logic_error("csae: decoder output does not restore the input shape");
    return g;
}

TrainLog train_autoencoder(ModelGraph& graph, const SegmentSet& train, const SegmentSet& val,
                           const CsaeConfig& cfg) {
    cfg.validate();
    train.validate();
    val.validate();
    const int lo = graph.frozen_prefix();
    if (lo != 0) throw std::invalid_argument("train_autoencoder: autoencoder layers must all be trainable");
    const int latent_pos = graph.latent_layer - lo + 1;
    ReconstructionObjective obj(train.segments, val.segments, cfg.lambda, latent_pos, graph.latent_layer);
    return train_loop(graph, obj, cfg.train);
}

double reconstruct_r2(const ModelGraph& graph, const SegmentSet& set) {
    set.validate();
    if (set.empty()) throw DataError("reconstruct_r2: empty set");

    double mean = 0.0;
    std::size_t n = 0;
    for (const Tensor& seg : set.segments) {
        for (double v : seg.data) mean += v;
        n += seg.size();
    }
    mean /= static_cast<double>(n);

    double ss_res = 0.0, ss_tot = 0.0;
    for (const Tensor& seg : set.segments) {
        const Tensor rec = graph.forward(seg);
        if (!rec.same_shape(seg))
            throw std::invalid_argument("reconstruct_r2: output shape " + rec.shape_str() +
                                        " != segment shape " + seg.shape_str());
        for (std::size_t i = 0; i < seg.size(); ++i) {
            const double r = rec[i] - seg[i];
            const double t = seg[i] - mean;
            ss_res += r * r;
            ss_tot += t * t;
        }
    }
    if (ss_tot == 0.0) throw DataError("reconstruct_r2: zero-variance set");
    return 1.0 - ss_res / ss_tot;
}

double reconstruction_mse(const ModelGraph& graph, const SegmentSet& set) {
    set.validate();
    if (set.empty()) throw DataError("reconstruction_mse: empty set");
    double acc = 0.0;
    for (const Tensor& seg : set.segments) acc += mse_loss(graph.forward(seg), seg);
    return acc / static_cast<double>(set.size());
}

double mean_abs_latent(const ModelGraph& graph, const SegmentSet& set) {
    set.validate();
    if (set.empty()) throw DataError("mean_abs_latent: empty set");
    if (graph.latent_layer < 0) throw std::invalid_argument("mean_abs_latent: graph has no latent layer");
    double acc = 0.0;
    std::size_t n = 0;
    for (const Tensor& seg : set.segments) {
        const Tensor z = graph.forward_range(0, graph.latent_layer + 1, seg);
        acc += l1_activity(z);
        n += z.size();
    }
    return acc / static_cast<double>(n);
}

} // namespace semg

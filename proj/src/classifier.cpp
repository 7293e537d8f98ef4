#include "semg/classifier.hpp"

namespace semg {

void ClassifierConfig::validate() const {
    if (head_conv_channels < 1 || head_conv_kernel < 1 || head_conv_stride < 1)
        throw std::invalid_argument("classifier: head conv parameters must be >= 1");
    for (int w : mlp_widths)
        if (w < 1) throw std::invalid_argument("classifier: MLP widths must be >= 1");
    if (num_classes < 2) throw std::invalid_argument("classifier: need at least 2 classes");
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("classifier: alpha must be in (0,1)");
    train.validate();
}

std::vector<Tensor> forward_to_layer(const ModelGraph& graph, const SegmentSet& segments, int layer) {
    segments.validate();
    std::vector<Tensor> out;
    out.reserve(segments.size());
    for (const Tensor& seg : segments.segments) out.push_back(graph.forward_range(0, layer, seg));
    return out;
}

std::vector<Tensor> extract_latent(const ModelGraph& graph, const SegmentSet& segments) {
    if (graph.encoder_layers < 1) throw std::invalid_argument("extract_latent: graph has no encoder section");
    return forward_to_layer(graph, segments, graph.encoder_layers);
}

ModelGraph build_classifier(const ModelGraph& encoder, const ClassifierConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (encoder.encoder_layers < 1) throw std::invalid_argument("build_classifier: encoder section is empty");

    ModelGraph g;
    g.input_len = encoder.input_len;
    g.input_ch = encoder.input_ch;
    g.latent_layer = encoder.latent_layer;
    g.encoder_layers = encoder.encoder_layers;
    for (int i = 0; i < encoder.encoder_layers; ++i) {
        LayerSpec sp = encoder.specs[static_cast<std::size_t>(i)];
        sp.trainable = false;
        g.specs.push_back(sp);
        g.params.push_back(encoder.params[static_cast<std::size_t>(i)]);
    }

    // Bottleneck shape feeding the head.
    const std::vector<std::vector<int>> enc_shapes = encoder.infer_shapes();
    const std::vector<int>& latent = enc_shapes[static_cast<std::size_t>(encoder.encoder_layers)];
    if (latent.size() != 2)
        throw std::invalid_argument("build_classifier: encoder output must be a [T' x D] map");
    const int d = latent[1];

    const auto push = [&](LayerSpec sp) {
        g.specs.push_back(std::move(sp));
        g.params.emplace_back();
    };
    LayerSpec sp;

    sp = {};
    sp.kind = LayerKind::LayerNorm;
    sp.name = "ln";
    sp.in_channels = d;
    sp.out_channels = d;
    push(sp);

    sp = {};
    sp.kind = LayerKind::Conv1d;
    sp.name = "head_conv";
    sp.in_channels = d;
    sp.out_channels = cfg.head_conv_channels;
    sp.kernel_size = cfg.head_conv_kernel;
    sp.stride = cfg.head_conv_stride;
    push(sp);

    sp = {};
    sp.kind = LayerKind::LeakyRelu;
    sp.name = "head_act";
    sp.in_channels = cfg.head_conv_channels;
    sp.out_channels = cfg.head_conv_channels;
    sp.alpha = cfg.alpha;
    push(sp);

    sp = {};
    sp.kind = LayerKind::AttentionPool;
    sp.name = "attn";
    sp.in_channels = cfg.head_conv_channels;
    sp.out_channels = cfg.head_conv_channels;
    push(sp);

    int width = cfg.head_conv_channels;
    for (int stage = 0; stage < 2; ++stage) {
        const int next = cfg.mlp_widths[static_cast<std::size_t>(stage)];
        sp = {};
        sp.kind = LayerKind::Dense;
        sp.name = "fc" + std::to_string(stage + 1);
        sp.in_channels = width;
        sp.out_channels = next;
        push(sp);

        sp = {};
        sp.kind = LayerKind::LeakyRelu;
        sp.name = "fc" + std::to_string(stage + 1) + "_act";
        sp.in_channels = next;
        sp.out_channels = next;
        sp.alpha = cfg.alpha;
        push(sp);
        width = next;
    }

    sp = {};
    sp.kind = LayerKind::Dense;
    sp.name = "out";
    sp.in_channels = width;
    sp.out_channels = cfg.num_classes;
    push(sp);

    sp = {};
    sp.kind = LayerKind::Softmax;
    sp.name = "probs";
    sp.in_channels = cfg.num_classes;
    sp.out_channels = cfg.num_classes;
    push(sp);

    g.init_params_range(seed, encoder.encoder_layers, g.layer_count());
    g.validate();
    return g;
}

namespace {

void check_labels(const SegmentSet& set, int k, const char* what) {
    for (int label : set.labels)
        if (label < 0 || label >= k)
            throw std::invalid_argument(std::string(what) + ": label " + std::to_string(label) +
                                        " outside [0, " + std::to_string(k) + ")");
}

} // namespace

TrainLog train_classifier(ModelGraph& graph, const SegmentSet& train, const SegmentSet& val,
                          const ClassifierConfig& cfg) {
    cfg.validate();
    train.validate();
    val.validate();
    const int k = graph_num_classes(graph);
    check_labels(train, k, "train_classifier");
    check_labels(val, k, "train_classifier");

    const int lo = graph.frozen_prefix();
    const std::vector<Tensor> train_in = forward_to_layer(graph, train, lo);
    const std::vector<Tensor> val_in = forward_to_layer(graph, val, lo);
    ClassificationObjective obj(train_in, train.labels, val_in, val.labels);
    return train_loop(graph, obj, cfg.train);
}

Prediction predict_one(const ModelGraph& graph, const Tensor& segment) {
    const ForwardTrace tr = graph.forward_trace_range(0, graph.layer_count(), segment);
    Prediction p;
    p.probs = tr.output();
    p.logits = tr.x[tr.x.size() - 2];
    p.argmax = 0;
    for (int c = 1; c < static_cast<int>(p.probs.size()); ++c)
        if (p.probs[static_cast<std::size_t>(c)] > p.probs[static_cast<std::size_t>(p.argmax)]) p.argmax = c;
    return p;
}

std::vector<Prediction> predict(const ModelGraph& graph, const SegmentSet& segments) {
    segments.validate();
    std::vector<Prediction> out;
    out.reserve(segments.size());
    for (const Tensor& seg : segments.segments) out.push_back(predict_one(graph, seg));
    return out;
}

std::vector<int> predict_labels(const ModelGraph& graph, const SegmentSet& segments) {
    segments.validate();
    std::vector<int> out;
    out.reserve(segments.size());
    for (const Tensor& seg : segments.segments) out.push_back(predict_one(graph, seg).argmax);
    return out;
}

int graph_num_classes(const ModelGraph& graph) {
    if (graph.layer_count() < 2 || graph.specs.back().kind != LayerKind::Softmax)
        throw std::invalid_argument("graph does not end in a softmax classifier head");
    const LayerSpec& out = graph.specs[static_cast<std::size_t>(graph.layer_count() - 2)];
    if (out.kind != LayerKind::Dense)
        throw std::invalid_argument("classifier head: expected dense layer before softmax");
    return out.out_channels;
}

} // namespace semg

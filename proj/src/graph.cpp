#include "semg/graph.hpp"

#include <numeric>

#include "semg/rng.hpp"

namespace semg {

std::vector<std::vector<int>> ModelGraph::infer_shapes() const {
    if (input_len < 1 || input_ch < 1)
        throw std::invalid_argument("graph: input shape not set");
    std::vector<std::vector<int>> shapes;
    shapes.reserve(specs.size() + 1);
    shapes.push_back({input_len, input_ch});

    for (const LayerSpec& s : specs) {
        const std::vector<int>& in = shapes.back();
        const auto flat = [&in] {
            int n = 1;
            for (int d : in) n *= d;
            return n;
        };
        std::vector<int> out;
        switch (s.kind) {
            case LayerKind::Conv1d: {
                if (in.size() != 2 || in[1] != s.in_channels)
                    throw std::invalid_argument(s.name + ": expects [T x " + std::to_string(s.in_channels) + "] input");
                if (in[0] < s.kernel_size)
                    throw std::invalid_argument(s.name + ": input length " + std::to_string(in[0]) +
                                                " shorter than kernel " + std::to_string(s.kernel_size));
                out = {conv_out_len(in[0], s.kernel_size, s.stride), s.out_channels};
                break;
            }
            case LayerKind::TConv1d: {
                if (in.size() != 2 || in[1] != s.in_channels)
                    throw std::invalid_argument(s.name + ": expects [T x " + std::to_string(s.in_channels) + "] input");
                out = {tconv_out_len(in[0], s.kernel_size, s.stride), s.out_channels};
                break;
            }
            case LayerKind::Dense: {
                if (flat() != s.in_channels)
                    throw std::invalid_argument(s.name + ": input has " + std::to_string(flat()) +
                                                " values, layer expects " + std::to_string(s.in_channels));
                out = {s.out_channels};
                break;
            }
            case LayerKind::LayerNorm: {
                if (in.size() != 2 || in[1] != s.in_channels)
                    throw std::invalid_argument(s.name + ": expects [T x " + std::to_string(s.in_channels) + "] input");
                out = in;
                break;
            }
            case LayerKind::LeakyRelu:
                out = in;
                break;
            case LayerKind::AttentionPool: {
                if (in.size() != 2 || in[1] != s.in_channels)
                    throw std::invalid_argument(s.name + ": expects [T x " + std::to_string(s.in_channels) + "] input");
                out = {s.in_channels};
                break;
            }
            case LayerKind::Softmax: {
                if (in.size() != 1)
                    throw std::invalid_argument(s.name + ": expects a 1-D logit vector");
                out = in;
                break;
            }
        }
        shapes.push_back(std::move(out));
    }
    return shapes;
}

void ModelGraph::validate() const {
    if (specs.size() != params.size())
        throw std::invalid_argument("graph: spec/param list size mismatch");
    for (const LayerSpec& s : specs) s.validate();
    infer_shapes();
    if (latent_layer >= layer_count())
        throw std::invalid_argument("graph: latent_layer out of range");
    if (encoder_layers < 0 || encoder_layers > layer_count())
        throw std::invalid_argument("graph: encoder_layers out of range");
}

LayerParams ModelGraph::zero_params_like(const LayerSpec& spec) {
    LayerParams p;
    switch (spec.kind) {
        case LayerKind::Conv1d:
            p.w = Tensor({spec.kernel_size, spec.in_channels, spec.out_channels});
            p.b = Tensor({spec.out_channels});
            break;
        case LayerKind::TConv1d:
            p.w = Tensor({spec.kernel_size, spec.out_channels, spec.in_channels});
            p.b = Tensor({spec.out_channels});
            break;
        case LayerKind::Dense:
            p.w = Tensor({spec.in_channels, spec.out_channels});
            p.b = Tensor({spec.out_channels});
            break;
        case LayerKind::LayerNorm:
            p.w = Tensor({spec.in_channels});
            p.b = Tensor({spec.in_channels});
            break;
        case LayerKind::AttentionPool:
            p.w = Tensor({spec.in_channels});
            p.b = Tensor({1});
            break;
        case LayerKind::LeakyRelu:
        case LayerKind::Softmax:
            break;
    }
    return p;
}

void ModelGraph::init_params(std::uint64_t seed) {
    init_params_range(seed, 0, static_cast<int>(specs.size()));
}

void ModelGraph::init_params_range(std::uint64_t seed, int lo, int hi) {
    params.resize(specs.size());
    if (lo < 0 || hi > static_cast<int>(specs.size()) || lo > hi)
        throw std::invalid_argument("init_params: bad layer range");
    for (std::size_t i = static_cast<std::size_t>(lo); i < static_cast<std::size_t>(hi); ++i) {
        const LayerSpec& s = specs[i];
        params[i] = zero_params_like(s);
        if (!s.has_params()) continue;
        const std::uint64_t layer_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
        switch (s.kind) {
            case LayerKind::Conv1d:
            case LayerKind::TConv1d:
                params[i].w = he_normal_init(params[i].w.shape, s.kernel_size * s.in_channels, layer_seed);
                break;
            case LayerKind::Dense:
                params[i].w = he_normal_init(params[i].w.shape, s.in_channels, layer_seed);
                break;
            case LayerKind::LayerNorm:
                params[i].w.fill(1.0);  // gamma
                break;
            case LayerKind::AttentionPool:
                params[i].w = he_normal_init(params[i].w.shape, s.in_channels, layer_seed);
                break;
            default:
                break;
        }
    }
}

static Tensor apply_layer(const LayerSpec& s, const LayerParams& p, const Tensor& in) {
    switch (s.kind) {
        case LayerKind::Conv1d: return conv1d_forward(in, p.w, p.b, s.stride);
        case LayerKind::TConv1d: return tconv1d_forward(in, p.w, p.b, s.stride);
        case LayerKind::Dense: return dense_forward(in, p.w, p.b);
        case LayerKind::LayerNorm: return layer_norm_forward(in, p.w, p.b, s.eps);
        case LayerKind::LeakyRelu: return leaky_relu_forward(in, s.alpha);
        case LayerKind::AttentionPool: return attention_pool_forward(in, p.w, p.b);
        case LayerKind::Softmax: return softmax_forward(in);
    }
    throw std::logic_error("unreachable layer kind");
}

Tensor ModelGraph::forward_range(int lo, int hi, const Tensor& in) const {
    if (lo < 0 || hi > layer_count() || lo > hi)
        throw std::invalid_argument("graph: bad layer range");
    Tensor cur = in;
    for (int i = lo; i < hi; ++i) {
        cur = apply_layer(specs[static_cast<std::size_t>(i)], params[static_cast<std::size_t>(i)], cur);
        require_finite(cur, specs[static_cast<std::size_t>(i)].name.c_str());
    }
    return cur;
}

ForwardTrace ModelGraph::forward_trace_range(int lo, int hi, const Tensor& in) const {
    if (lo < 0 || hi > layer_count() || lo > hi)
        throw std::invalid_argument("graph: bad layer range");
    ForwardTrace tr;
    tr.x.reserve(static_cast<std::size_t>(hi - lo) + 1);
    tr.x.push_back(in);
    for (int i = lo; i < hi; ++i) {
        tr.x.push_back(apply_layer(specs[static_cast<std::size_t>(i)], params[static_cast<std::size_t>(i)], tr.x.back()));
        require_finite(tr.x.back(), specs[static_cast<std::size_t>(i)].name.c_str());
    }
    return tr;
}

Tensor ModelGraph::backward_range(int lo, int hi, const ForwardTrace& trace, const Tensor& d_out,
                                  std::vector<LayerParams>& grads,
                                  const Tensor* extra, int extra_at) const {
    if (static_cast<int>(trace.x.size()) != hi - lo + 1)
        throw std::invalid_argument("graph: trace does not match layer range");
    if (static_cast<int>(grads.size()) != layer_count())
        throw std::invalid_argument("graph: grad slot count mismatch");

    Tensor cur = d_out;
    Tensor next;
    for (int i = hi - 1; i >= lo; --i) {
        if (extra != nullptr && extra_at == i) {
            if (!cur.same_shape(*extra))
                throw std::invalid_argument("graph: injected gradient shape mismatch at layer " + std::to_string(i));
            for (std::size_t k = 0; k < cur.size(); ++k) cur[k] += (*extra)[k];
        }
        const LayerSpec& s = specs[static_cast<std::size_t>(i)];
        LayerParams& g = grads[static_cast<std::size_t>(i)];
        const LayerParams& p = params[static_cast<std::size_t>(i)];
        const Tensor& in = trace.x[static_cast<std::size_t>(i - lo)];
        const Tensor& out = trace.x[static_cast<std::size_t>(i - lo + 1)];
        switch (s.kind) {
            case LayerKind::Conv1d: conv1d_backward(in, p.w, s.stride, cur, next, g.w, g.b); break;
            case LayerKind::TConv1d: tconv1d_backward(in, p.w, s.stride, cur, next, g.w, g.b); break;
            case LayerKind::Dense: dense_backward(in, p.w, cur, next, g.w, g.b); break;
            case LayerKind::LayerNorm: layer_norm_backward(in, p.w, s.eps, cur, next, g.w, g.b); break;
            case LayerKind::LeakyRelu: leaky_relu_backward(in, s.alpha, cur, next); break;
            case LayerKind::AttentionPool: attention_pool_backward(in, p.w, p.b, cur, next, g.w, g.b); break;
            case LayerKind::Softmax: softmax_backward(out, cur, next); break;
        }
        std::swap(cur, next);
    }
    return cur;
}

std::vector<LayerParams> ModelGraph::zero_grads() const {
    std::vector<LayerParams> g;
    g.reserve(specs.size());
    for (const LayerSpec& s : specs) g.push_back(zero_params_like(s));
    return g;
}

std::vector<Tensor*> ModelGraph::collect_params(const std::vector<int>& layer_ids) {
    return collect_slots(params, layer_ids);
}

std::vector<Tensor*> ModelGraph::collect_slots(std::vector<LayerParams>& slots, const std::vector<int>& layer_ids) {
    std::vector<Tensor*> out;
    out.reserve(layer_ids.size() * 2);
    for (int i : layer_ids) {
        LayerParams& p = slots.at(static_cast<std::size_t>(i));
        if (p.w.empty()) throw std::invalid_argument("collect: layer " + std::to_string(i) + " has no parameters");
        out.push_back(&p.w);
        out.push_back(&p.b);
    }
    return out;
}

std::vector<int> ModelGraph::trainable_layers() const {
    std::vector<int> ids;
    for (int i = 0; i < layer_count(); ++i)
        if (specs[static_cast<std::size_t>(i)].has_params() && specs[static_cast<std::size_t>(i)].trainable)
            ids.push_back(i);
    return ids;
}

int ModelGraph::frozen_prefix() const {
    int i = 0;
    while (i < layer_count() &&
           (!specs[static_cast<std::size_t>(i)].has_params() || !specs[static_cast<std::size_t>(i)].trainable))
        ++i;
    return i;
}

std::size_t ModelGraph::param_count() const {
    std::size_t n = 0;
    for (const LayerParams& p : params) n += p.w.size() + p.b.size();
    return n;
}

std::vector<double> ModelGraph::snapshot() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (const LayerParams& p : params) {
        flat.insert(flat.end(), p.w.data.begin(), p.w.data.end());
        flat.insert(flat.end(), p.b.data.begin(), p.b.data.end());
    }
    return flat;
}

void ModelGraph::restore(const std::vector<double>& flat) {
    if (flat.size() != param_count())
        throw std::invalid_argument("graph: snapshot has " + std::to_string(flat.size()) +
                                    " values, model has " + std::to_string(param_count()));
    std::size_t off = 0;
    for (LayerParams& p : params) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  flat.begin() + static_cast<std::ptrdiff_t>(off + p.w.size()), p.w.data.begin());
        off += p.w.size();
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  flat.begin() + static_cast<std::ptrdiff_t>(off + p.b.size()), p.b.data.begin());
        off += p.b.size();
    }
}

} // namespace semg

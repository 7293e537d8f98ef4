#include "semg/checkpoint.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "semg/format.hpp"

namespace semg {

namespace {

constexpr const char* kMagic = "SEMGCKPT v1";

std::string check_token(const std::string& s, const char* what) {
    if (s.empty() || s.find_first_of(" =\n") != std::string::npos)
        throw DataError("checkpoint: " + std::string(what) + " '" + s + "' is not serializable (spaces/equals)");
    return s;
}

long long parse_ll(const std::string& s, const char* what) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("checkpoint: bad integer for " + std::string(what) + ": '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("checkpoint: bad integer for " + std::string(what) + ": '" + s + "'");
    return v;
}

double parse_f64(const std::string& s, const char* what) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("checkpoint: bad number for " + std::string(what) + ": '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Sequential "key = value" reader over the header block; the writer emits
// keys in one canonical order, so reading is a straight-line expectation.
class HeaderReader {
public:
    explicit HeaderReader(const std::string& text) {
        std::size_t start = 0;
        while (start < text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            const std::string line = text.substr(start, end - start);
            start = end + 1;
            if (line.empty()) continue;
            const std::size_t sep = line.find(" = ");
            if (sep == std::string::npos)
                throw DataError("checkpoint: malformed header line '" + line + "'");
            lines_.emplace_back(line.substr(0, sep), line.substr(sep + 3));
        }
    }

    std::string expect(const std::string& key) {
        if (cursor_ >= lines_.size())
            throw DataError("checkpoint: header ended before key '" + key + "'");
        if (lines_[cursor_].first != key)
            throw DataError("checkpoint: expected header key '" + key + "', found '" +
                            lines_[cursor_].first + "'");
        return lines_[cursor_++].second;
    }

    bool peek_is(const std::string& key) const {
        return cursor_ < lines_.size() && lines_[cursor_].first == key;
    }

    void expect_end() const {
        if (cursor_ != lines_.size())
            throw DataError("checkpoint: unexpected trailing header key '" + lines_[cursor_].first + "'");
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
    std::size_t cursor_ = 0;
};

std::string shape_str(const std::vector<int>& shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s;
}

std::vector<int> parse_shape(const std::string& s) {
    std::vector<int> shape;
    for (const std::string& part : split(s, 'x'))
        shape.push_back(static_cast<int>(parse_ll(part, "tensor shape")));
    return shape;
}

// k=v tokens within one header value (layer and tensor lines).
std::string field(const std::vector<std::string>& tokens, const std::string& key, const char* line_kind) {
    for (const std::string& tok : tokens) {
        const std::size_t sep = tok.find('=');
        if (sep != std::string::npos && tok.compare(0, sep, key) == 0) return tok.substr(sep + 1);
    }
    throw DataError("checkpoint: " + std::string(line_kind) + " line is missing field '" + key + "'");
}

void write_f32_le(std::string& out, double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, sizeof(bits));
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

double read_f32_le(const unsigned char* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    float f = 0.0f;
    std::memcpy(&f, &bits, sizeof(f));
    return static_cast<double>(f);  // widening is exact; no re-rounding on re-save
}

} // namespace

void save_checkpoint(const ModelGraph& graph, const Standardizer& standardizer,
                     const CheckpointMeta& meta, const std::string& path) {
    graph.validate();

    std::ostringstream head;
    head << "input_len = " << graph.input_len << "\n";
    head << "input_ch = " << graph.input_ch << "\n";
    head << "encoder_layers = " << graph.encoder_layers << "\n";
    head << "latent_layer = " << graph.latent_layer << "\n";
    head << "seed = " << meta.seed << "\n";
    head << "lambda = " << g17(meta.lambda) << "\n";
    if (!meta.labels.empty()) {
        head << "labels = ";
        for (std::size_t i = 0; i < meta.labels.size(); ++i) {
            const std::string& label = meta.labels[i];
            if (label.empty() || label.find_first_of(",\n") != std::string::npos)
                throw DataError("checkpoint: label '" + label + "' is not serializable");
            head << (i ? "," : "") << label;
        }
        head << "\n";
    }
    head << "standardizer.fitted = " << (standardizer.fitted ? 1 : 0) << "\n";
    head << "standardizer.mean = " << g17(standardizer.mean[0]) << "," << g17(standardizer.mean[1]) << "\n";
    head << "standardizer.std = " << g17(standardizer.std[0]) << "," << g17(standardizer.std[1]) << "\n";
    if (standardizer.fitted_on.find('\n') != std::string::npos)
        throw DataError("checkpoint: standardizer.fitted_on must be single-line");
    head << "standardizer.fitted_on = " << standardizer.fitted_on << "\n";

    head << "layers = " << graph.layer_count() << "\n";
    for (int i = 0; i < graph.layer_count(); ++i) {
        const LayerSpec& s = graph.specs[static_cast<std::size_t>(i)];
        head << "layer." << i << " = kind=" << layer_kind_name(s.kind)
             << " name=" << check_token(s.name, "layer name") << " in=" << s.in_channels
             << " out=" << s.out_channels << " kernel=" << s.kernel_size << " stride=" << s.stride
             << " alpha=" << g17(s.alpha) << " eps=" << g17(s.eps)
             << " trainable=" << (s.trainable ? 1 : 0) << "\n";
    }

    std::string payload;
    std::ostringstream manifest;
    int tensor_count = 0;
    for (int i = 0; i < graph.layer_count(); ++i) {
        if (!graph.specs[static_cast<std::size_t>(i)].has_params()) continue;
        const std::string& name = graph.specs[static_cast<std::size_t>(i)].name;
        for (const auto& [suffix, tensor] :
             {std::pair<const char*, const Tensor*>{"w", &graph.params[static_cast<std::size_t>(i)].w},
              std::pair<const char*, const Tensor*>{"b", &graph.params[static_cast<std::size_t>(i)].b}}) {
            manifest << "tensor." << tensor_count++ << " = name=" << name << "." << suffix
                     << " type=f32 shape=" << shape_str(tensor->shape) << " offset=" << payload.size()
                     << " bytes=" << 4 * tensor->size() << "\n";
            for (double v : tensor->data) write_f32_le(payload, v);
        }
    }
    head << "tensors = " << tensor_count << "\n";
    head << manifest.str();
    head << "payload_bytes = " << payload.size() << "\n";

    const std::string header = head.str();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("checkpoint: cannot open '" + path + "' for writing");
    os << kMagic << "\n";
    os << "header_bytes = " << header.size() << "\n";
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    os.flush();
    if (!os) throw DataError("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open '" + path + "'");
    std::string blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    // Magic + version line.
    std::size_t pos = blob.find('\n');
    if (pos == std::string::npos || blob.substr(0, pos) != kMagic)
        throw DataError("checkpoint version mismatch: expected '" + std::string(kMagic) + "' in '" + path + "'");

    // Header length line.
    const std::size_t len_start = pos + 1;
    pos = blob.find('\n', len_start);
    if (pos == std::string::npos) throw DataError("checkpoint: missing header_bytes line");
    const std::string len_line = blob.substr(len_start, pos - len_start);
    if (len_line.rfind("header_bytes = ", 0) != 0)
        throw DataError("checkpoint: malformed header_bytes line '" + len_line + "'");
    const long long header_bytes = parse_ll(len_line.substr(15), "header_bytes");
    const std::size_t header_start = pos + 1;
    if (header_bytes < 0 || header_start + static_cast<std::size_t>(header_bytes) > blob.size())
        throw DataError("checkpoint: header extends past end of file");

    HeaderReader header(blob.substr(header_start, static_cast<std::size_t>(header_bytes)));

    Checkpoint ckpt;
    ModelGraph& g = ckpt.graph;
    g.input_len = static_cast<int>(parse_ll(header.expect("input_len"), "input_len"));
    g.input_ch = static_cast<int>(parse_ll(header.expect("input_ch"), "input_ch"));
    g.encoder_layers = static_cast<int>(parse_ll(header.expect("encoder_layers"), "encoder_layers"));
    g.latent_layer = static_cast<int>(parse_ll(header.expect("latent_layer"), "latent_layer"));
    ckpt.meta.seed = parse_u64(header.expect("seed"), "seed");
    ckpt.meta.lambda = parse_f64(header.expect("lambda"), "lambda");
    if (header.peek_is("labels"))
        for (const std::string& label : split(header.expect("labels"), ','))
            ckpt.meta.labels.push_back(label);

    Standardizer& stdz = ckpt.standardizer;
    stdz.fitted = parse_ll(header.expect("standardizer.fitted"), "standardizer.fitted") != 0;
    const std::vector<std::string> means = split(header.expect("standardizer.mean"), ',');
    const std::vector<std::string> stds = split(header.expect("standardizer.std"), ',');
    if (means.size() != 2 || stds.size() != 2)
        throw DataError("checkpoint: standardizer stats must carry 2 channels");
    for (int c = 0; c < 2; ++c) {
        stdz.mean[static_cast<std::size_t>(c)] = parse_f64(means[static_cast<std::size_t>(c)], "standardizer.mean");
        stdz.std[static_cast<std::size_t>(c)] = parse_f64(stds[static_cast<std::size_t>(c)], "standardizer.std");
    }
    stdz.fitted_on = header.expect("standardizer.fitted_on");

    const long long layer_count = parse_ll(header.expect("layers"), "layers");
    if (layer_count < 0) throw DataError("checkpoint: negative layer count");
    for (long long i = 0; i < layer_count; ++i) {
        const std::vector<std::string> tok = split(header.expect("layer." + std::to_string(i)), ' ');
        LayerSpec s;
        try {
            s.kind = layer_kind_from_name(field(tok, "kind", "layer"));
        } catch (const std::invalid_argument& e) {
            throw DataError("checkpoint: " + std::string(e.what()));
        }
        s.name = field(tok, "name", "layer");
        s.in_channels = static_cast<int>(parse_ll(field(tok, "in", "layer"), "layer in"));
        s.out_channels = static_cast<int>(parse_ll(field(tok, "out", "layer"), "layer out"));
        s.kernel_size = static_cast<int>(parse_ll(field(tok, "kernel", "layer"), "layer kernel"));
        s.stride = static_cast<int>(parse_ll(field(tok, "stride", "layer"), "layer stride"));
        s.alpha = parse_f64(field(tok, "alpha", "layer"), "layer alpha");
        s.eps = parse_f64(field(tok, "eps", "layer"), "layer eps");
        s.trainable = parse_ll(field(tok, "trainable", "layer"), "layer trainable") != 0;
        g.specs.push_back(std::move(s));
    }
    g.params.resize(g.specs.size());

    // Manifest: tensors must appear in layer order, w before b, with dense
    // ascending offsets — anything else is corruption, not a format variant.
    const long long tensor_count = parse_ll(header.expect("tensors"), "tensors");
    struct ManifestRow {
        std::string name;
        std::vector<int> shape;
        long long offset = 0;
        long long bytes = 0;
    };
    std::vector<ManifestRow> manifest;
    long long cursor = 0;
    for (long long i = 0; i < tensor_count; ++i) {
        const std::vector<std::string> tok = split(header.expect("tensor." + std::to_string(i)), ' ');
        ManifestRow row;
        row.name = field(tok, "name", "tensor");
        if (field(tok, "type", "tensor") != "f32")
            throw DataError("checkpoint manifest inconsistency: tensor '" + row.name + "' is not f32");
        row.shape = parse_shape(field(tok, "shape", "tensor"));
        row.offset = parse_ll(field(tok, "offset", "tensor"), "tensor offset");
        row.bytes = parse_ll(field(tok, "bytes", "tensor"), "tensor bytes");
        const long long expected = 4LL * static_cast<long long>(Tensor::count(row.shape));
        if (row.bytes != expected)
            throw DataError("checkpoint manifest inconsistency: tensor '" + row.name + "' shape " +
                            shape_str(row.shape) + " implies " + std::to_string(expected) + " bytes, manifest says " +
                            std::to_string(row.bytes));
        if (row.offset != cursor)
            throw DataError("checkpoint manifest inconsistency: tensor '" + row.name + "' offset " +
                            std::to_string(row.offset) + ", expected " + std::to_string(cursor));
        cursor += row.bytes;
        manifest.push_back(std::move(row));
    }
    const long long payload_bytes = parse_ll(header.expect("payload_bytes"), "payload_bytes");
    header.expect_end();
    if (payload_bytes != cursor)
        throw DataError("checkpoint manifest inconsistency: tensors cover " + std::to_string(cursor) +
                        " bytes but payload_bytes says " + std::to_string(payload_bytes));

    const std::size_t payload_start = header_start + static_cast<std::size_t>(header_bytes);
    if (payload_start + static_cast<std::size_t>(payload_bytes) > blob.size())
        throw DataError("checkpoint payload truncated: need " + std::to_string(payload_bytes) + " bytes, file has " +
                        std::to_string(blob.size() - payload_start) + " after the header");
    if (payload_start + static_cast<std::size_t>(payload_bytes) < blob.size())
        throw DataError("checkpoint: unexpected trailing bytes after payload");

    // Pair manifest rows with parammed layers, in order.
    std::size_t row_idx = 0;
    for (std::size_t i = 0; i < g.specs.size(); ++i) {
        if (!g.specs[i].has_params()) continue;
        LayerParams expected = ModelGraph::zero_params_like(g.specs[i]);
        for (const auto& [suffix, slot] : {std::pair<const char*, Tensor*>{"w", &expected.w},
                                           std::pair<const char*, Tensor*>{"b", &expected.b}}) {
            if (row_idx >= manifest.size())
                throw DataError("checkpoint manifest inconsistency: missing tensor for layer '" + g.specs[i].name + "'");
            const ManifestRow& row = manifest[row_idx++];
            const std::string want = g.specs[i].name + "." + suffix;
            if (row.name != want)
                throw DataError("checkpoint manifest inconsistency: expected tensor '" + want + "', found '" +
                                row.name + "'");
            if (row.shape != slot->shape)
                throw DataError("checkpoint manifest inconsistency: tensor '" + want + "' shape " +
                                shape_str(row.shape) + " does not match layer shape " + shape_str(slot->shape));
            const unsigned char* p =
                reinterpret_cast<const unsigned char*>(blob.data()) + payload_start + row.offset;
            for (std::size_t e = 0; e < slot->size(); ++e) slot->data[e] = read_f32_le(p + 4 * e);
        }
        g.params[i] = std::move(expected);
    }
    if (row_idx != manifest.size())
        throw DataError("checkpoint manifest inconsistency: " + std::to_string(manifest.size() - row_idx) +
                        " tensor(s) beyond the model's layers");

    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError("checkpoint: invalid model description: " + std::string(e.what()));
    }
    return ckpt;
}

} // namespace semg

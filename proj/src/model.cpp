#include "wsdse/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wsdse/kernels.hpp"

namespace wsdse {

std::string Shape::str() const {
    return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

std::string layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Dense: return "dense";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::AvgPool: return "avgpool";
        case LayerKind::Relu: return "relu";
        case LayerKind::Tanh: return "tanh";
        case LayerKind::Flatten: return "flatten";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "conv2d") return LayerKind::Conv2d;
    if (name == "dense") return LayerKind::Dense;
    if (name == "maxpool") return LayerKind::MaxPool;
    if (name == "avgpool") return LayerKind::AvgPool;
    if (name == "relu") return LayerKind::Relu;
    if (name == "tanh") return LayerKind::Tanh;
    if (name == "flatten") return LayerKind::Flatten;
    throw InvalidArgument("unknown layer kind: " + name);
}

std::size_t LayerSpec::expected_weight_count() const {
    switch (kind) {
        case LayerKind::Conv2d:
            return static_cast<std::size_t>(kh) * kw * in_ch * out_ch;
        case LayerKind::Dense:
            return static_cast<std::size_t>(in_features) * out_features;
        default:
            return 0;
    }
}

std::size_t LayerSpec::expected_bias_count() const {
    switch (kind) {
        case LayerKind::Conv2d: return static_cast<std::size_t>(out_ch);
        case LayerKind::Dense: return static_cast<std::size_t>(out_features);
        default: return 0;
    }
}

LayerSpec LayerSpec::conv2d(int kh, int kw, int in_ch, int out_ch,
                            std::vector<float> weights, std::vector<float> bias) {
    LayerSpec l;
    l.kind = LayerKind::Conv2d;
    l.kh = kh;
    l.kw = kw;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.weights = std::move(weights);
    l.bias = std::move(bias);
    return l;
}

LayerSpec LayerSpec::dense(int in_features, int out_features,
                           std::vector<float> weights, std::vector<float> bias) {
    LayerSpec l;
    l.kind = LayerKind::Dense;
    l.in_features = in_features;
    l.out_features = out_features;
    l.weights = std::move(weights);
    l.bias = std::move(bias);
    return l;
}

LayerSpec LayerSpec::maxpool(int window, int stride) {
    LayerSpec l;
    l.kind = LayerKind::MaxPool;
    l.window = window;
    l.stride = stride;
    return l;
}

LayerSpec LayerSpec::avgpool(int window, int stride) {
    LayerSpec l;
    l.kind = LayerKind::AvgPool;
    l.window = window;
    l.stride = stride;
    return l;
}

LayerSpec LayerSpec::relu() {
    LayerSpec l;
    l.kind = LayerKind::Relu;
    return l;
}

LayerSpec LayerSpec::tanh_act() {
    LayerSpec l;
    l.kind = LayerKind::Tanh;
    return l;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec l;
    l.kind = LayerKind::Flatten;
    return l;
}

int ModelSpec::num_weighted_layers() const {
    int n = 0;
    for (const auto& l : layers)
        if (l.weighted()) ++n;
    return n;
}

std::vector<int> ModelSpec::weighted_layer_indices() const {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(layers.size()); ++i)
        if (layers[i].weighted()) idx.push_back(i);
    return idx;
}

namespace {

[[noreturn]] void layer_error(int li, const std::string& msg) {
    throw InvalidArgument("layer " + std::to_string(li) + ": " + msg);
}

} // namespace

Shape ModelSpec::layer_output_shape(int li, const Shape& in) const {
    const LayerSpec& l = layers[li];
    switch (l.kind) {
        case LayerKind::Conv2d: {
            if (in.c != l.in_ch)
                layer_error(li, "conv2d expects " + std::to_string(l.in_ch) +
                                    " input channels, got " + in.str());
            const int oh = in.h - l.kh + 1;
            const int ow = in.w - l.kw + 1;
            if (oh <= 0 || ow <= 0)
                layer_error(li, "conv2d kernel " + std::to_string(l.kh) + "x" +
                                    std::to_string(l.kw) +
                                    " does not fit input " + in.str());
            return {oh, ow, l.out_ch};
        }
        case LayerKind::Dense: {
            if (static_cast<std::size_t>(l.in_features) != in.elements())
                layer_error(li, "dense expects " + std::to_string(l.in_features) +
                                    " inputs, got " + in.str());
            return {1, 1, l.out_features};
        }
        case LayerKind::MaxPool:
        case LayerKind::AvgPool: {
            if (l.window <= 0 || l.stride <= 0)
                layer_error(li, "pool window/stride must be positive");
            if (in.h < l.window || in.w < l.window)
                layer_error(li, "pool window " + std::to_string(l.window) +
                                    " does not fit input " + in.str());
            const int oh = (in.h - l.window) / l.stride + 1;
            const int ow = (in.w - l.window) / l.stride + 1;
            return {oh, ow, in.c};
        }
        case LayerKind::Relu:
        case LayerKind::Tanh:
            return in;
        case LayerKind::Flatten:
            return {1, 1, static_cast<int>(in.elements())};
    }
    layer_error(li, "unknown layer kind");
}

void ModelSpec::validate() const {
    if (input_shape.h <= 0 || input_shape.w <= 0 || input_shape.c <= 0)
        throw InvalidArgument("input shape must be positive: " + input_shape.str());
    if (num_weighted_layers() < 1)
        throw InvalidArgument("model must contain at least one conv/dense layer");
    Shape cur = input_shape;
    for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
        const LayerSpec& l = layers[i];
        if (l.weighted()) {
            if (l.weights.size() != l.expected_weight_count())
                layer_error(i, "weight count " + std::to_string(l.weights.size()) +
                                   " != declared " +
                                   std::to_string(l.expected_weight_count()));
            if (!l.bias.empty() && l.bias.size() != l.expected_bias_count())
                layer_error(i, "bias count " + std::to_string(l.bias.size()) +
                                   " != declared " +
                                   std::to_string(l.expected_bias_count()));
        }
        cur = layer_output_shape(i, cur);
    }
}

void LabeledDataset::validate() const {
    if (samples.size() != labels.size())
        throw InvalidArgument("dataset: sample/label count mismatch");
    if (num_classes <= 0) throw InvalidArgument("dataset: num_classes must be positive");
    for (int lbl : labels)
        if (lbl < 0 || lbl >= num_classes)
            throw InvalidArgument("dataset: label " + std::to_string(lbl) +
                                  " out of range [0," + std::to_string(num_classes) + ")");
}

namespace {

void run_conv2d(const LayerSpec& l, const Shape& in, const std::vector<float>& x,
                const Shape& out, std::vector<float>& y) {
    const int oc = l.out_ch;
    const int ic = l.in_ch;
    for (int oy = 0; oy < out.h; ++oy) {
        for (int ox = 0; ox < out.w; ++ox) {
            float* acc = y.data() + (static_cast<std::size_t>(oy) * out.w + ox) * oc;
            if (l.bias.empty())
                std::fill(acc, acc + oc, 0.0f);
            else
                std::copy(l.bias.begin(), l.bias.end(), acc);
            for (int ky = 0; ky < l.kh; ++ky) {
                const float* row =
                    x.data() + (static_cast<std::size_t>(oy + ky) * in.w + ox) * ic;
                const float* wrow =
                    l.weights.data() + static_cast<std::size_t>(ky) * l.kw * ic * oc;
                for (int kx = 0; kx < l.kw; ++kx) {
                    for (int c = 0; c < ic; ++c) {
                        const float v = row[kx * ic + c];
                        // weights are (kh, kw, ic, oc): oc is contiguous
                        kernels::axpy(v, wrow + (static_cast<std::size_t>(kx) * ic + c) * oc,
                                      acc, static_cast<std::size_t>(oc));
                    }
                }
            }
        }
    }
}

void run_dense(const LayerSpec& l, const std::vector<float>& x, std::vector<float>& y) {
    const int nout = l.out_features;
    if (l.bias.empty())
        std::fill(y.begin(), y.end(), 0.0f);
    else
        std::copy(l.bias.begin(), l.bias.end(), y.begin());
    for (int i = 0; i < l.in_features; ++i)
        kernels::axpy(x[i], l.weights.data() + static_cast<std::size_t>(i) * nout,
                      y.data(), static_cast<std::size_t>(nout));
}

void run_pool(const LayerSpec& l, const Shape& in, const std::vector<float>& x,
              const Shape& out, std::vector<float>& y, bool is_max) {
    const int c = in.c;
    const float inv = 1.0f / static_cast<float>(l.window * l.window);
    for (int oy = 0; oy < out.h; ++oy) {
        for (int ox = 0; ox < out.w; ++ox) {
            float* dst = y.data() + (static_cast<std::size_t>(oy) * out.w + ox) * c;
            for (int ch = 0; ch < c; ++ch)
                dst[ch] = is_max ? -std::numeric_limits<float>::infinity() : 0.0f;
            for (int wy = 0; wy < l.window; ++wy) {
                const int iy = oy * l.stride + wy;
                for (int wx = 0; wx < l.window; ++wx) {
                    const int ix = ox * l.stride + wx;
                    const float* src =
                        x.data() + (static_cast<std::size_t>(iy) * in.w + ix) * c;
                    for (int ch = 0; ch < c; ++ch) {
                        if (is_max)
                            dst[ch] = std::max(dst[ch], src[ch]);
                        else
                            dst[ch] += src[ch];
                    }
                }
            }
            if (!is_max)
                for (int ch = 0; ch < c; ++ch) dst[ch] *= inv;
        }
    }
}

} // namespace

std::vector<float> forward(const ModelSpec& model, const Tensor& input) {
    if (input.shape != model.input_shape)
        throw InvalidArgument("input shape " + input.shape.str() +
                              " != model input shape " + model.input_shape.str());
    if (input.data.size() != input.shape.elements())
        throw InvalidArgument("input tensor data length mismatch");

    Shape cur = model.input_shape;
    std::vector<float> x = input.data;
    std::vector<float> y;
    for (int i = 0; i < static_cast<int>(model.layers.size()); ++i) {
        const LayerSpec& l = model.layers[i];
        const Shape out = model.layer_output_shape(i, cur);
        switch (l.kind) {
            case LayerKind::Conv2d:
                y.assign(out.elements(), 0.0f);
                run_conv2d(l, cur, x, out, y);
                x.swap(y);
                break;
            case LayerKind::Dense:
                y.assign(out.elements(), 0.0f);
                run_dense(l, x, y);
                x.swap(y);
                break;
            case LayerKind::MaxPool:
            case LayerKind::AvgPool:
                y.assign(out.elements(), 0.0f);
                run_pool(l, cur, x, out, y, l.kind == LayerKind::MaxPool);
                x.swap(y);
                break;
            case LayerKind::Relu:
                for (float& v : x) v = std::max(v, 0.0f);
                break;
            case LayerKind::Tanh:
                for (float& v : x) v = std::tanh(v);
                break;
            case LayerKind::Flatten:
                break; // layout is already row-major
        }
        cur = out;
    }
    return x;
}

int argmax_lowest(const std::vector<float>& scores) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

double score(const ModelSpec& model, const LabeledDataset& dataset) {
    if (dataset.samples.empty()) throw InvalidArgument("score: empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto scores = forward(model, dataset.samples[i]);
        if (argmax_lowest(scores) == dataset.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.samples.size());
}

double accuracy_loss(double baseline_acc, double approx_acc) {
    return 100.0 * (baseline_acc - approx_acc);
}

} // namespace wsdse

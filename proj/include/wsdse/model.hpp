#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wsdse/errors.hpp"

namespace wsdse {

/// Height x width x channels, row-major with channels fastest.
struct Shape {
    int h = 0;
    int w = 0;
    int c = 0;

    bool operator==(const Shape&) const = default;
    std::size_t elements() const {
        return static_cast<std::size_t>(h) * w * c;
    }
    std::string str() const;
};

struct Tensor {
    Shape shape;
    std::vector<float> data; // shape.elements() entries, (h, w, c) row-major
};

enum class LayerKind { Conv2d, Dense, MaxPool, AvgPool, Relu, Tanh, Flatten };

std::string layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

/// One layer of a sequential model. Conv and dense layers carry weights;
/// the rest are parameter-free.
struct LayerSpec {
    LayerKind kind = LayerKind::Relu;

    // conv2d: kernel (kh, kw, in_ch, out_ch), valid padding, stride 1 only
    int kh = 0, kw = 0, in_ch = 0, out_ch = 0;

    // dense
    int in_features = 0, out_features = 0;

    // pool
    int window = 0, stride = 0;

    // conv/dense only; weights are (kh, kw, in_ch, out_ch) resp.
    // (in_features, out_features) row-major
    std::vector<float> weights;
    std::vector<float> bias; // may be empty

    bool weighted() const {
        return kind == LayerKind::Conv2d || kind == LayerKind::Dense;
    }
    std::size_t expected_weight_count() const;
    std::size_t expected_bias_count() const;

    static LayerSpec conv2d(int kh, int kw, int in_ch, int out_ch,
                            std::vector<float> weights,
                            std::vector<float> bias = {});
    static LayerSpec dense(int in_features, int out_features,
                           std::vector<float> weights,
                           std::vector<float> bias = {});
    static LayerSpec maxpool(int window, int stride);
    static LayerSpec avgpool(int window, int stride);
    static LayerSpec relu();
    static LayerSpec tanh_act();
    static LayerSpec flatten();
};

/// Immutable after validate(); safe to share across scoring workers.
struct ModelSpec {
    Shape input_shape;
    std::vector<LayerSpec> layers;

    int num_weighted_layers() const;
    /// Indices into `layers` of the conv/dense layers, in order.
    std::vector<int> weighted_layer_indices() const;

    /// Output shape of layer `li` given its input shape. Throws
    /// InvalidArgument naming the layer on any inconsistency.
    Shape layer_output_shape(int li, const Shape& in) const;

    /// Chain-checks all layer shapes and weight/bias lengths.
    void validate() const;
};

struct LabeledDataset {
    std::vector<Tensor> samples;
    std::vector<int> labels;
    int num_classes = 0;

    void validate() const;
};

/// Runs the model on one input; returns the class-score vector.
/// Pure and deterministic. Throws InvalidArgument on any shape mismatch,
/// naming the offending layer.
std::vector<float> forward(const ModelSpec& model, const Tensor& input);

/// Top-1 accuracy in [0,1]. Argmax ties break toward the lowest class index.
double score(const ModelSpec& model, const LabeledDataset& dataset);

/// Accuracy loss in percentage points; negative when the approximation
/// outperforms the baseline. Never clamped.
double accuracy_loss(double baseline_acc, double approx_acc);

/// Lowest-index argmax, the tie-break used everywhere in scoring.
int argmax_lowest(const std::vector<float>& scores);

} // namespace wsdse

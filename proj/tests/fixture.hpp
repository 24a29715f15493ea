#pragma once

// Desk-scale fixtures used across the test suites: a small random 4-weighted-
// layer CNN plus a teacher-labeled dataset (labels are the model's own argmax
// outputs, so baseline accuracy is exactly 1).

#include <random>

#include "wsdse/model.hpp"

namespace wsdse::testfix {

inline std::vector<float> random_weights(std::size_t n, std::mt19937& rng, float scale) {
    std::normal_distribution<float> dist(0.0f, scale);
    std::vector<float> w(n);
    for (auto& v : w) v = dist(rng);
    return w;
}

/// 8x8x1 input, two small convs, two dense layers; 4 weighted layers total.
inline ModelSpec desk_model(std::uint32_t seed) {
    std::mt19937 rng(seed);
    ModelSpec m;
    m.input_shape = {8, 8, 1};
    m.layers.push_back(LayerSpec::conv2d(3, 3, 1, 4, random_weights(36, rng, 0.5f),
                                         random_weights(4, rng, 0.1f)));
    m.layers.push_back(LayerSpec::relu());
    m.layers.push_back(LayerSpec::maxpool(2, 2));
    m.layers.push_back(LayerSpec::conv2d(2, 2, 4, 6, random_weights(96, rng, 0.4f),
                                         random_weights(6, rng, 0.1f)));
    m.layers.push_back(LayerSpec::relu());
    m.layers.push_back(LayerSpec::flatten());
    m.layers.push_back(LayerSpec::dense(24, 16, random_weights(384, rng, 0.3f),
                                        random_weights(16, rng, 0.1f)));
    m.layers.push_back(LayerSpec::tanh_act());
    m.layers.push_back(LayerSpec::dense(16, 10, random_weights(160, rng, 0.4f),
                                        random_weights(10, rng, 0.1f)));
    m.validate();
    return m;
}

inline Tensor random_input(const Shape& shape, std::mt19937& rng) {
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    Tensor t;
    t.shape = shape;
    t.data.resize(shape.elements());
    for (auto& v : t.data) v = dist(rng);
    return t;
}

/// Labels come from the model itself, so score(model, dataset) == 1.0.
inline LabeledDataset teacher_dataset(const ModelSpec& model, std::size_t n,
                                      std::uint32_t seed) {
    std::mt19937 rng(seed);
    LabeledDataset ds;
    ds.num_classes = 10;
    for (std::size_t i = 0; i < n; ++i) {
        Tensor t = random_input(model.input_shape, rng);
        ds.labels.push_back(argmax_lowest(forward(model, t)));
        ds.samples.push_back(std::move(t));
    }
    return ds;
}

} // namespace wsdse::testfix

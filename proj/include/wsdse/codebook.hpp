#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wsdse/model.hpp"

namespace wsdse {

/// k shared values plus the per-weight index assignment.
/// Centers are sorted ascending; each center is the mean of its members.
struct Codebook {
    std::vector<double> centers;
    std::vector<std::uint32_t> assignment; // one entry per weight, each < k
    int k = 0;
    double inertia = 0.0; // within-cluster sum of squared errors
    bool approximate = false; // true when produced by the Lloyd fallback
};

struct CompressionStats {
    int k = 0;
    int b_index = 0;
    std::size_t n_weights = 0;
    std::uint64_t original_bits = 0;
    std::uint64_t compressed_bits = 0;
    double cr = 0.0;
};

/// ceil(log2(k)); 0 for k == 1. Throws on k <= 0.
int index_bits(int k);

/// Globally optimal 1-D k-means over `values` (minimum within-cluster SSE),
/// computed by dynamic programming over the sorted values. Deterministic,
/// no seed. Requires 1 <= k <= number of distinct values.
Codebook kmeans_1d(std::span<const float> values, int k);

/// Lloyd's iterations with k-means++-style seeding from a fixed seed and a
/// fixed number of restarts. Opt-in fallback for very large layers; results
/// are flagged `approximate`.
Codebook kmeans_1d_lloyd(std::span<const float> values, int k,
                         std::uint64_t seed = 0, int restarts = 10);

/// Number of distinct values (used to clamp sweep ranges).
std::size_t distinct_count(std::span<const float> values);

/// Copy of `layer` with weight j replaced by centers[assignment[j]].
/// Biases untouched; the input layer is not modified.
LayerSpec apply_codebook(const LayerSpec& layer, const Codebook& cb);

/// Bit accounting for one clustered layer: 32-bit originals vs
/// b_index-bit indices plus a k-entry 32-bit codebook.
CompressionStats layer_compression(std::size_t n_weights, int k);

/// Sum of squared errors of `cb` against `values` (diagnostic).
double clustering_inertia(std::span<const float> values, const Codebook& cb);

} // namespace wsdse

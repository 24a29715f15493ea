#include "wsdse/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace wsdse {

int index_bits(int k) {
    if (k <= 0) throw InvalidArgument("index_bits: k must be positive");
    int bits = 0;
    while ((1 << bits) < k) ++bits;
    return bits;
}

std::size_t distinct_count(std::span<const float> values) {
    std::vector<float> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

namespace {

struct SortedView {
    std::vector<float> sorted;
    std::vector<std::uint32_t> order; // sorted position -> original index
    std::vector<double> s1, s2;       // prefix sums of value and value^2

    explicit SortedView(std::span<const float> values) {
        const std::size_t n = values.size();
        order.resize(n);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return values[a] < values[b];
        });
        sorted.resize(n);
        for (std::size_t i = 0; i < n; ++i) sorted[i] = values[order[i]];
        s1.assign(n + 1, 0.0);
        s2.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = sorted[i];
            s1[i + 1] = s1[i] + v;
            s2[i + 1] = s2[i] + v * v;
        }
    }

    // SSE of the single cluster covering sorted[i..j], inclusive
    double cost(std::size_t i, std::size_t j) const {
        const double cnt = static_cast<double>(j - i + 1);
        const double sum = s1[j + 1] - s1[i];
        const double ssq = s2[j + 1] - s2[i];
        return std::max(0.0, ssq - sum * sum / cnt);
    }

    double mean(std::size_t i, std::size_t j) const {
        return (s1[j + 1] - s1[i]) / static_cast<double>(j - i + 1);
    }
};

// Fills row m of the DP table for i in [lo, hi]; the optimal split index is
// monotone in i, which bounds the search window of each recursion level.
void dp_fill(const SortedView& sv, const std::vector<double>& prev,
             std::vector<double>& cur, std::vector<std::uint32_t>& opt,
             std::size_t m, std::size_t lo, std::size_t hi,
             std::size_t opt_lo, std::size_t opt_hi) {
    if (lo > hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = std::max(m, opt_lo);
    const std::size_t j_hi = std::min(mid, opt_hi);
    for (std::size_t j = std::max(m, opt_lo); j <= j_hi; ++j) {
        const double c = prev[j - 1] + sv.cost(j, mid);
        if (c < best) {
            best = c;
            best_j = j;
        }
    }
    cur[mid] = best;
    opt[mid] = static_cast<std::uint32_t>(best_j);
    if (mid > lo) dp_fill(sv, prev, cur, opt, m, lo, mid - 1, opt_lo, best_j);
    if (mid < hi) dp_fill(sv, prev, cur, opt, m, mid + 1, hi, best_j, opt_hi);
}

Codebook from_segments(const SortedView& sv, const std::vector<std::size_t>& starts,
                       std::size_t n) {
    Codebook cb;
    cb.k = static_cast<int>(starts.size());
    cb.centers.resize(starts.size());
    cb.assignment.resize(n);
    double inertia = 0.0;
    for (std::size_t c = 0; c < starts.size(); ++c) {
        const std::size_t lo = starts[c];
        const std::size_t hi = (c + 1 < starts.size()) ? starts[c + 1] - 1 : n - 1;
        cb.centers[c] = sv.mean(lo, hi);
        inertia += sv.cost(lo, hi);
        for (std::size_t i = lo; i <= hi; ++i)
            cb.assignment[sv.order[i]] = static_cast<std::uint32_t>(c);
    }
    cb.inertia = inertia;
    return cb;
}

} // namespace

Codebook kmeans_1d(std::span<const float> values, int k) {
    const std::size_t n = values.size();
    if (n == 0) throw InvalidArgument("kmeans_1d: empty values");
    if (k <= 0) throw InvalidArgument("kmeans_1d: k must be positive");
    const std::size_t distinct = distinct_count(values);
    if (static_cast<std::size_t>(k) > distinct)
        throw InvalidArgument("kmeans_1d: k=" + std::to_string(k) +
                              " exceeds distinct value count " + std::to_string(distinct));

    SortedView sv(values);
    const std::size_t kk = static_cast<std::size_t>(k);

    // D[m][i]: min SSE of clustering sorted[0..i] into m+1 clusters
    std::vector<double> prev(n), cur(n);
    std::vector<std::vector<std::uint32_t>> opt(kk, std::vector<std::uint32_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) prev[i] = sv.cost(0, i);
    for (std::size_t m = 1; m < kk; ++m) {
        dp_fill(sv, prev, cur, opt[m], m, m, n - 1, m, n - 1);
        std::swap(prev, cur);
    }

    std::vector<std::size_t> starts(kk);
    std::size_t end = n - 1;
    for (std::size_t m = kk; m-- > 1;) {
        starts[m] = opt[m][end];
        end = starts[m] - 1;
    }
    starts[0] = 0;
    return from_segments(sv, starts, n);
}

Codebook kmeans_1d_lloyd(std::span<const float> values, int k, std::uint64_t seed,
                         int restarts) {
    const std::size_t n = values.size();
    if (n == 0) throw InvalidArgument("kmeans_1d_lloyd: empty values");
    if (k <= 0) throw InvalidArgument("kmeans_1d_lloyd: k must be positive");
    SortedView sv(values);
    std::vector<float> uniq(sv.sorted);
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (static_cast<std::size_t>(k) > uniq.size())
        throw InvalidArgument("kmeans_1d_lloyd: k exceeds distinct value count");

    std::mt19937_64 rng(seed);
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_starts;

    for (int r = 0; r < restarts; ++r) {
        // initial centers: k distinct values sampled without replacement
        std::vector<float> centers(uniq);
        for (std::size_t i = 0; i + 1 < centers.size(); ++i) {
            const std::size_t j = i + rng() % (centers.size() - i);
            std::swap(centers[i], centers[j]);
        }
        centers.resize(static_cast<std::size_t>(k));
        std::sort(centers.begin(), centers.end());

        std::vector<std::size_t> starts(static_cast<std::size_t>(k), 0);
        for (int iter = 0; iter < 100; ++iter) {
            // 1-D assignment: cluster boundaries at midpoints between centers
            std::vector<std::size_t> new_starts(static_cast<std::size_t>(k));
            new_starts[0] = 0;
            for (int c = 1; c < k; ++c) {
                const float boundary = 0.5f * (centers[c - 1] + centers[c]);
                new_starts[c] = static_cast<std::size_t>(
                    std::lower_bound(sv.sorted.begin(), sv.sorted.end(), boundary) -
                    sv.sorted.begin());
            }
            // keep clusters nonempty
            for (int c = 1; c < k; ++c)
                new_starts[c] = std::max<std::size_t>(
                    new_starts[c], new_starts[c - 1] + 1);
            for (int c = k - 1; c >= 1; --c)
                new_starts[c] = std::min<std::size_t>(
                    new_starts[c], n - static_cast<std::size_t>(k - c));
            bool changed = new_starts != starts;
            starts = std::move(new_starts);
            for (int c = 0; c < k; ++c) {
                const std::size_t lo = starts[c];
                const std::size_t hi = (c + 1 < k) ? starts[c + 1] - 1 : n - 1;
                centers[c] = static_cast<float>(sv.mean(lo, hi));
            }
            if (!changed) break;
        }
        double sse = 0.0;
        for (int c = 0; c < k; ++c) {
            const std::size_t lo = starts[c];
            const std::size_t hi = (c + 1 < k) ? starts[c + 1] - 1 : n - 1;
            sse += sv.cost(lo, hi);
        }
        if (sse < best_sse) {
            best_sse = sse;
            best_starts = starts;
        }
    }
    Codebook cb = from_segments(sv, best_starts, n);
    cb.approximate = true;
    return cb;
}

LayerSpec apply_codebook(const LayerSpec& layer, const Codebook& cb) {
    if (cb.assignment.size() != layer.weights.size())
        throw InvalidArgument("apply_codebook: assignment length " +
                              std::to_string(cb.assignment.size()) +
                              " != weight count " + std::to_string(layer.weights.size()));
    LayerSpec out = layer;
    for (std::size_t j = 0; j < out.weights.size(); ++j)
        out.weights[j] = static_cast<float>(cb.centers[cb.assignment[j]]);
    return out;
}

CompressionStats layer_compression(std::size_t n_weights, int k) {
    if (n_weights < 1) throw InvalidArgument("layer_compression: n_weights must be >= 1");
    if (k < 1 || static_cast<std::size_t>(k) > n_weights)
        throw InvalidArgument("layer_compression: require 1 <= k <= n_weights");
    CompressionStats s;
    s.k = k;
    s.b_index = index_bits(k);
    s.n_weights = n_weights;
    s.original_bits = 32ull * n_weights;
    s.compressed_bits =
        static_cast<std::uint64_t>(s.b_index) * n_weights + 32ull * static_cast<std::uint64_t>(k);
    s.cr = static_cast<double>(s.original_bits) / static_cast<double>(s.compressed_bits);
    return s;
}

double clustering_inertia(std::span<const float> values, const Codebook& cb) {
    if (cb.assignment.size() != values.size())
        throw InvalidArgument("clustering_inertia: assignment/value length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double d = static_cast<double>(values[j]) - cb.centers[cb.assignment[j]];
        acc += d * d;
    }
    return acc;
}

} // namespace wsdse

#include "wsdse/layer_explorer.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace wsdse {

const CurvePoint* SensitivityCurve::find(int k) const {
    const auto it = std::lower_bound(points.begin(), points.end(), k,
                                     [](const CurvePoint& p, int kk) { return p.k < kk; });
    if (it == points.end() || it->k != k) return nullptr;
    return &*it;
}

SensitivityCurve sweep_layer(const ModelSpec& model, int weighted_ordinal,
                             const SweepConfig& cfg, const LabeledDataset& dataset,
                             double baseline_acc) {
    const auto weighted = model.weighted_layer_indices();
    if (weighted_ordinal < 1 || weighted_ordinal > static_cast<int>(weighted.size()))
        throw InvalidArgument("sweep_layer: layer ordinal " +
                              std::to_string(weighted_ordinal) + " out of range [1," +
                              std::to_string(weighted.size()) + "]");
    if (cfg.k_min < 1 || cfg.k_min > cfg.k_max)
        throw InvalidArgument("sweep_layer: require 1 <= k_min <= k_max");
    const int li = weighted[weighted_ordinal - 1];
    const LayerSpec& layer = model.layers[li];
    const std::size_t n = layer.weights.size();
    const int k_cap = static_cast<int>(
        std::min<std::size_t>(distinct_count(layer.weights), cfg.k_max));

    SensitivityCurve curve;
    curve.layer = weighted_ordinal;
    ModelSpec work = model; // only layer li is swapped per evaluation
    for (int k = cfg.k_min; k <= k_cap; k += std::max(1, cfg.stride)) {
        const bool use_lloyd = n > cfg.exact_kmeans_threshold;
        const Codebook cb = use_lloyd
                                ? kmeans_1d_lloyd(layer.weights, k, cfg.lloyd_seed)
                                : kmeans_1d(layer.weights, k);
        work.layers[li] = apply_codebook(layer, cb);
        const double acc = score(work, dataset);
        const CompressionStats cs = layer_compression(n, k);
        curve.points.push_back({k, accuracy_loss(baseline_acc, acc), cs.cr, cs.b_index,
                                cb.inertia, cb.approximate});
    }
    return curve;
}

CandidateSet select_layer_candidates(const SensitivityCurve& curve,
                                     const SweepConfig& cfg) {
    if (curve.points.empty())
        throw InvalidArgument("select_layer_candidates: empty curve");

    // budget filter
    std::vector<CurvePoint> pool;
    for (const auto& p : curve.points)
        if (!cfg.layer_al_budget || p.al <= *cfg.layer_al_budget) pool.push_back(p);
    if (pool.empty())
        throw ComputeError("layer " + std::to_string(curve.layer) +
                           " cannot meet the AL budget at any swept k");

    // per-b_index minimum AL, ties to the smaller k
    std::map<int, CurvePoint> by_bits;
    for (const auto& p : pool) {
        auto [it, inserted] = by_bits.try_emplace(p.b_index, p);
        if (!inserted && (p.al < it->second.al ||
                          (p.al == it->second.al && p.k < it->second.k)))
            it->second = p;
    }

    // dominance over (b_index min, AL min): scanning b_index ascending, a
    // survivor must strictly improve AL over every cheaper level
    CandidateSet out;
    out.layer = curve.layer;
    double best_al = std::numeric_limits<double>::infinity();
    for (const auto& [bits, p] : by_bits) {
        if (p.al < best_al) {
            best_al = p.al;
            out.candidates.push_back({p.k, p.al, p.cr, p.b_index});
        }
    }
    // b_index and k are both ascending over the survivors already
    return out;
}

} // namespace wsdse

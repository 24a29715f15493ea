#pragma once

#include <optional>
#include <vector>

#include "wsdse/codebook.hpp"
#include "wsdse/model.hpp"

namespace wsdse {

struct SweepConfig {
    int k_min = 1;
    int k_max = 256;
    int stride = 1; // sweep every stride-th k; 1 = every k
    std::optional<double> layer_al_budget; // percentage points
    // layers above this weight count use the seeded Lloyd fallback
    std::size_t exact_kmeans_threshold = 65536;
    std::uint64_t lloyd_seed = 0;
};

struct CurvePoint {
    int k = 0;
    double al = 0.0; // percentage points
    double cr = 0.0;
    int b_index = 0;
    double inertia = 0.0;
    bool approximate_clustering = false;
};

/// One layer's k -> (AL, CR, b_index, inertia) mapping, points sorted by k.
/// layer ordinals are 1-based over the weighted layers, matching the
/// emitted CSV/JSON.
struct SensitivityCurve {
    int layer = 0; // 1-based weighted-layer ordinal
    std::vector<CurvePoint> points;

    const CurvePoint* find(int k) const;
};

struct Candidate {
    int k = 0;
    double al = 0.0;
    double cr = 0.0;
    int b_index = 0;
};

/// Pareto-efficient per-layer candidates, sorted by k ascending; AL is
/// strictly decreasing along increasing b_index.
struct CandidateSet {
    int layer = 0; // 1-based weighted-layer ordinal
    std::vector<Candidate> candidates;
};

/// Clusters only the addressed layer at each k in the (clamped) range and
/// scores the full model each time. `weighted_ordinal` is 1-based.
SensitivityCurve sweep_layer(const ModelSpec& model, int weighted_ordinal,
                             const SweepConfig& cfg, const LabeledDataset& dataset,
                             double baseline_acc);

/// Budget filter, per-b_index minimum, then dominance filter over
/// (b_index min, AL min). Throws ComputeError when nothing survives.
CandidateSet select_layer_candidates(const SensitivityCurve& curve,
                                     const SweepConfig& cfg);

} // namespace wsdse

#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "wsdse/predictor.hpp"

namespace wsdse {

enum class AlSource { Measured, Predicted };

const char* al_source_name(AlSource s);
AlSource al_source_from_name(const std::string& name);

struct EvalRecord {
    KTuple ktuple;
    double al = 0.0; // percentage points
    AlSource al_source = AlSource::Measured;
    double cr = 0.0;
    std::vector<double> per_layer_inertia;

    double inertia_sum() const;
};

/// Points sorted by cr ascending; along that order AL is strictly increasing.
struct ParetoFront {
    std::vector<EvalRecord> points;
    double al_budget = 0.0;
};

struct FrontComparison {
    double coverage = 0.0;
    double mean_gap = 0.0;
    double max_gap = 0.0;
    double hypervolume_truth = 0.0;
    double hypervolume_predicted = 0.0;
    double hypervolume_ratio = 0.0;
    double eps_al = 0.0;
    double eps_cr = 0.0;
};

/// Lexicographic enumeration of the candidate cross-product (layer 1
/// slowest). Random access by index; nothing is materialized.
class KTupleSpace {
public:
    explicit KTupleSpace(const std::vector<CandidateSet>& candidate_sets);

    /// Exact combination count; throws ComputeError on uint64 overflow.
    std::uint64_t count() const;
    unsigned __int128 count128() const { return count_; }
    KTuple at(std::uint64_t index) const;
    std::size_t num_layers() const { return ks_.size(); }
    const std::vector<std::vector<int>>& layer_ks() const { return ks_; }

private:
    std::vector<std::vector<int>> ks_; // per layer, candidate k values
    unsigned __int128 count_ = 1;
};

/// Network CR: sum of per-layer original bits over sum of compressed bits.
double network_compression(const ModelSpec& model, const KTuple& ktuple);

/// Shared immutable evaluation state plus the instrumented scoring counter.
/// Codebooks for every (layer, candidate k) pair are precomputed once, so
/// candidate scoring only swaps weight arrays and runs inference.
class Evaluator {
public:
    Evaluator(const ModelSpec& model, const LabeledDataset& dataset,
              double baseline_acc, const std::vector<CandidateSet>& candidate_sets,
              std::size_t exact_kmeans_threshold = 65536,
              std::uint64_t lloyd_seed = 0);

    EvalRecord score_candidate(const KTuple& ktuple) const;
    std::uint64_t score_calls() const { return score_calls_.load(); }
    void reset_score_calls() { score_calls_.store(0); }

    const ModelSpec& model() const { return model_; }
    double baseline_acc() const { return baseline_acc_; }

private:
    struct ClusteredLayer {
        std::vector<float> weights;
        double inertia = 0.0;
        std::uint64_t compressed_bits = 0;
    };
    const ClusteredLayer& clustered(std::size_t layer_pos, int k) const;

    ModelSpec model_;
    const LabeledDataset& dataset_;
    double baseline_acc_;
    std::vector<int> weighted_indices_;
    // per weighted layer: k -> clustered weights
    std::vector<std::vector<std::pair<int, ClusteredLayer>>> cache_;
    std::vector<std::uint64_t> original_bits_;
    mutable std::atomic<std::uint64_t> score_calls_{0};
};

struct ExploreOptions {
    std::uint64_t cap = 1'000'000;
    int workers = 1;
};

struct ExhaustiveResult {
    std::vector<EvalRecord> records; // enumeration order
    double fraction_within_budget = 0.0;
};

/// Measures every combination. Throws ComputeError when the count exceeds
/// the cap (use predicted mode instead).
ExhaustiveResult exhaustive_explore(const Evaluator& eval, const KTupleSpace& space,
                                    double al_budget, const ExploreOptions& opts = {});

/// Deterministic uniform sample of distinct indices in [0, count_total).
/// Size is max(min_size, floor(fraction * count_total)).
std::vector<std::uint64_t> subsample(std::uint64_t count_total, double fraction,
                                     std::uint64_t seed, std::size_t min_size);

/// Predicts every combination via the surrogate; CR is computed exactly.
/// Issues zero scorings.
std::vector<EvalRecord> predicted_explore(const KTupleSpace& space,
                                          const PredictionModel& predictor,
                                          const std::vector<SensitivityCurve>& curves,
                                          const ModelSpec& model);

/// Budget filter plus non-dominated filter under (minimize AL, maximize CR).
/// Exact ties keep the lexicographically smallest ktuple.
ParetoFront pareto_front(const std::vector<EvalRecord>& records, double al_budget);

/// 2-D hypervolume dominated by `points` w.r.t. the reference corner
/// (al = al_budget, cr = 1) under (minimize AL, maximize CR).
double hypervolume(const std::vector<EvalRecord>& points, double al_budget);

/// Re-scores the predicted selection against `all_measured` (by ktuple
/// lookup; missing ktuples are an error) and reports coverage, normalized
/// gap statistics, and the hypervolume ratio.
FrontComparison compare_fronts(const ParetoFront& truth,
                               const ParetoFront& predicted_selection,
                               const std::vector<EvalRecord>& all_measured,
                               double eps_al = 0.05, double eps_cr = 0.05);

} // namespace wsdse

#include "wsdse/network_explorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <thread>

#include "wsdse/codebook.hpp"

namespace wsdse {

const char* al_source_name(AlSource s) {
    return s == AlSource::Measured ? "measured" : "predicted";
}

AlSource al_source_from_name(const std::string& name) {
    if (name == "measured") return AlSource::Measured;
    if (name == "predicted") return AlSource::Predicted;
    throw InvalidArgument("unknown al_source: " + name);
}

double EvalRecord::inertia_sum() const {
    double s = 0.0;
    for (double v : per_layer_inertia) s += v;
    return s;
}

KTupleSpace::KTupleSpace(const std::vector<CandidateSet>& candidate_sets) {
    if (candidate_sets.empty())
        throw InvalidArgument("KTupleSpace: no candidate sets");
    for (const auto& cs : candidate_sets) {
        if (cs.candidates.empty())
            throw InvalidArgument("KTupleSpace: empty candidate set for layer " +
                                  std::to_string(cs.layer));
        std::vector<int> ks;
        for (const auto& c : cs.candidates) ks.push_back(c.k);
        count_ *= static_cast<unsigned __int128>(ks.size());
        ks_.push_back(std::move(ks));
    }
}

std::uint64_t KTupleSpace::count() const {
    if (count_ > static_cast<unsigned __int128>(std::numeric_limits<std::uint64_t>::max()))
        throw ComputeError("KTupleSpace: combination count exceeds 2^64");
    return static_cast<std::uint64_t>(count_);
}

KTuple KTupleSpace::at(std::uint64_t index) const {
    KTuple t;
    t.ks.resize(ks_.size());
    // lexicographic with layer 0 slowest: peel radices from the last layer
    for (std::size_t i = ks_.size(); i-- > 0;) {
        const std::uint64_t radix = ks_[i].size();
        t.ks[i] = ks_[i][index % radix];
        index /= radix;
    }
    return t;
}

double network_compression(const ModelSpec& model, const KTuple& ktuple) {
    const auto weighted = model.weighted_layer_indices();
    if (ktuple.ks.size() != weighted.size())
        throw InvalidArgument("network_compression: ktuple length " +
                              std::to_string(ktuple.ks.size()) + " != weighted layers " +
                              std::to_string(weighted.size()));
    std::uint64_t orig = 0, comp = 0;
    for (std::size_t i = 0; i < weighted.size(); ++i) {
        const auto cs =
            layer_compression(model.layers[weighted[i]].weights.size(), ktuple.ks[i]);
        orig += cs.original_bits;
        comp += cs.compressed_bits;
    }
    return static_cast<double>(orig) / static_cast<double>(comp);
}

Evaluator::Evaluator(const ModelSpec& model, const LabeledDataset& dataset,
                     double baseline_acc, const std::vector<CandidateSet>& candidate_sets,
                     std::size_t exact_kmeans_threshold, std::uint64_t lloyd_seed)
    : model_(model),
      dataset_(dataset),
      baseline_acc_(baseline_acc),
      weighted_indices_(model.weighted_layer_indices()) {
    if (candidate_sets.size() != weighted_indices_.size())
        throw InvalidArgument("Evaluator: candidate sets do not cover all weighted layers");
    cache_.resize(weighted_indices_.size());
    original_bits_.resize(weighted_indices_.size());
    for (std::size_t i = 0; i < weighted_indices_.size(); ++i) {
        const LayerSpec& layer = model_.layers[weighted_indices_[i]];
        original_bits_[i] = 32ull * layer.weights.size();
        for (const auto& cand : candidate_sets[i].candidates) {
            const Codebook cb =
                layer.weights.size() > exact_kmeans_threshold
                    ? kmeans_1d_lloyd(layer.weights, cand.k, lloyd_seed)
                    : kmeans_1d(layer.weights, cand.k);
            ClusteredLayer cl;
            cl.weights = apply_codebook(layer, cb).weights;
            cl.inertia = cb.inertia;
            cl.compressed_bits = layer_compression(layer.weights.size(), cand.k).compressed_bits;
            cache_[i].emplace_back(cand.k, std::move(cl));
        }
        std::sort(cache_[i].begin(), cache_[i].end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
}

const Evaluator::ClusteredLayer& Evaluator::clustered(std::size_t layer_pos, int k) const {
    const auto& row = cache_[layer_pos];
    const auto it = std::lower_bound(row.begin(), row.end(), k,
                                     [](const auto& a, int kk) { return a.first < kk; });
    if (it == row.end() || it->first != k)
        throw InvalidArgument("Evaluator: k=" + std::to_string(k) +
                              " is not a candidate for layer " + std::to_string(layer_pos + 1));
    return it->second;
}

EvalRecord Evaluator::score_candidate(const KTuple& ktuple) const {
    if (ktuple.ks.size() != weighted_indices_.size())
        throw InvalidArgument("score_candidate: ktuple length mismatch");
    ModelSpec work = model_;
    EvalRecord rec;
    rec.ktuple = ktuple;
    rec.al_source = AlSource::Measured;
    rec.per_layer_inertia.resize(ktuple.ks.size());
    std::uint64_t orig = 0, comp = 0;
    for (std::size_t i = 0; i < ktuple.ks.size(); ++i) {
        const ClusteredLayer& cl = clustered(i, ktuple.ks[i]);
        work.layers[weighted_indices_[i]].weights = cl.weights;
        rec.per_layer_inertia[i] = cl.inertia;
        orig += original_bits_[i];
        comp += cl.compressed_bits;
    }
    score_calls_.fetch_add(1, std::memory_order_relaxed);
    rec.al = accuracy_loss(baseline_acc_, score(work, dataset_));
    rec.cr = static_cast<double>(orig) / static_cast<double>(comp);
    return rec;
}

ExhaustiveResult exhaustive_explore(const Evaluator& eval, const KTupleSpace& space,
                                    double al_budget, const ExploreOptions& opts) {
    const std::uint64_t total = space.count();
    if (total > opts.cap)
        throw ComputeError("exhaustive_explore: " + std::to_string(total) +
                           " combinations exceed the cap of " + std::to_string(opts.cap) +
                           "; use predicted mode");
    ExhaustiveResult res;
    res.records.resize(total);
    const int workers = std::max(1, opts.workers);
    std::atomic<std::uint64_t> next{0};
    auto run = [&]() {
        for (std::uint64_t i = next.fetch_add(1); i < total; i = next.fetch_add(1))
            res.records[i] = eval.score_candidate(space.at(i));
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    std::uint64_t within = 0;
    for (const auto& r : res.records)
        if (r.al <= al_budget) ++within;
    res.fraction_within_budget =
        total ? static_cast<double>(within) / static_cast<double>(total) : 0.0;
    return res;
}

namespace {

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
    // rejection sampling; stable across standard libraries
    std::uint64_t x, r;
    do {
        x = rng();
        r = x % n;
    } while (x - r > std::numeric_limits<std::uint64_t>::max() - (n - 1));
    return r;
}

} // namespace

std::vector<std::uint64_t> subsample(std::uint64_t count_total, double fraction,
                                     std::uint64_t seed, std::size_t min_size) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw InvalidArgument("subsample: fraction must be in (0,1]");
    const std::uint64_t target = static_cast<std::uint64_t>(
        std::floor(fraction * static_cast<double>(count_total)));
    const std::uint64_t size = std::max<std::uint64_t>(min_size, target);
    if (size > count_total)
        throw ComputeError("subsample: need " + std::to_string(size) +
                           " samples but only " + std::to_string(count_total) +
                           " candidates exist");
    std::mt19937_64 rng(seed);
    // Floyd's algorithm: uniform without replacement
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = count_total - size; j < count_total; ++j) {
        const std::uint64_t t = bounded_draw(rng, j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    return {chosen.begin(), chosen.end()};
}

std::vector<EvalRecord> predicted_explore(const KTupleSpace& space,
                                          const PredictionModel& predictor,
                                          const std::vector<SensitivityCurve>& curves,
                                          const ModelSpec& model) {
    const std::uint64_t total = space.count();
    std::vector<EvalRecord> records;
    records.reserve(total);
    for (std::uint64_t i = 0; i < total; ++i) {
        EvalRecord rec;
        rec.ktuple = space.at(i);
        rec.al = predict(rec.ktuple, predictor, curves);
        rec.al_source = AlSource::Predicted;
        rec.cr = network_compression(model, rec.ktuple);
        rec.per_layer_inertia.resize(rec.ktuple.ks.size());
        for (std::size_t l = 0; l < rec.ktuple.ks.size(); ++l) {
            const CurvePoint* pt = curves[l].find(rec.ktuple.ks[l]);
            rec.per_layer_inertia[l] = pt ? pt->inertia : 0.0;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

ParetoFront pareto_front(const std::vector<EvalRecord>& records, double al_budget) {
    std::vector<const EvalRecord*> pool;
    for (const auto& r : records)
        if (r.al <= al_budget) pool.push_back(&r);
    // cr descending, then al ascending, then ktuple ascending
    std::sort(pool.begin(), pool.end(), [](const EvalRecord* a, const EvalRecord* b) {
        if (a->cr != b->cr) return a->cr > b->cr;
        if (a->al != b->al) return a->al < b->al;
        return a->ktuple < b->ktuple;
    });
    ParetoFront front;
    front.al_budget = al_budget;
    double best_al = std::numeric_limits<double>::infinity();
    for (const EvalRecord* r : pool) {
        if (r->al < best_al) {
            best_al = r->al;
            front.points.push_back(*r);
        }
    }
    std::reverse(front.points.begin(), front.points.end()); // cr ascending
    return front;
}

double hypervolume(const std::vector<EvalRecord>& points, double al_budget) {
    // dominated area above cr=1 and left of al=budget
    std::vector<std::pair<double, double>> pts; // (al, cr)
    for (const auto& p : points)
        if (p.al <= al_budget && p.cr > 1.0) pts.emplace_back(p.al, p.cr);
    if (pts.empty()) return 0.0;
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double max_cr = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        max_cr = std::max(max_cr, pts[i].second);
        const double right = (i + 1 < pts.size()) ? std::min(pts[i + 1].first, al_budget)
                                                  : al_budget;
        if (right > pts[i].first) area += (right - pts[i].first) * (max_cr - 1.0);
    }
    return area;
}

FrontComparison compare_fronts(const ParetoFront& truth,
                               const ParetoFront& predicted_selection,
                               const std::vector<EvalRecord>& all_measured,
                               double eps_al, double eps_cr) {
    // re-score the predicted selection against ground truth measurements
    std::vector<EvalRecord> rescored;
    for (const auto& p : predicted_selection.points) {
        const auto it = std::find_if(all_measured.begin(), all_measured.end(),
                                     [&](const EvalRecord& m) { return m.ktuple == p.ktuple; });
        if (it == all_measured.end())
            throw InvalidArgument("compare_fronts: predicted ktuple " + p.ktuple.str() +
                                  " has no measured record");
        rescored.push_back(*it);
    }

    FrontComparison cmp;
    cmp.eps_al = eps_al;
    cmp.eps_cr = eps_cr;
    const double budget = truth.al_budget;
    double max_cr_truth = 1.0;
    for (const auto& t : truth.points) max_cr_truth = std::max(max_cr_truth, t.cr);

    std::size_t covered = 0;
    double gap_sum = 0.0;
    for (const auto& t : truth.points) {
        bool match = false;
        double best_gap = std::numeric_limits<double>::infinity();
        for (const auto& p : rescored) {
            if (std::abs(t.al - p.al) <= eps_al && std::abs(t.cr - p.cr) <= eps_cr * t.cr)
                match = true;
            const double da = (t.al - p.al) / budget;
            const double dc = (t.cr - p.cr) / max_cr_truth;
            best_gap = std::min(best_gap, std::sqrt(da * da + dc * dc));
        }
        if (match) ++covered;
        gap_sum += best_gap;
        cmp.max_gap = std::max(cmp.max_gap, best_gap);
    }
    cmp.coverage = truth.points.empty()
                       ? 1.0
                       : static_cast<double>(covered) / static_cast<double>(truth.points.size());
    cmp.mean_gap = truth.points.empty() ? 0.0 : gap_sum / static_cast<double>(truth.points.size());
    cmp.hypervolume_truth = hypervolume(truth.points, budget);
    cmp.hypervolume_predicted = hypervolume(rescored, budget);
    cmp.hypervolume_ratio = cmp.hypervolume_truth > 0.0
                                ? cmp.hypervolume_predicted / cmp.hypervolume_truth
                                : (cmp.hypervolume_predicted > 0.0 ? 0.0 : 1.0);
    return cmp;
}

} // namespace wsdse

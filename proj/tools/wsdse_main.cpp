// wsdse: layer-wise weight-sharing design-space exploration.
//
// Pipeline: `baseline` measures the reference accuracy, `sweep` runs the
// per-layer sensitivity analysis and selects Pareto-efficient candidates,
// `explore` searches the combination space (exhaustively or through the
// fitted accuracy-loss surrogate), `fit`/`compare`/`report` are standalone
// pieces of the same flow.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsdse/io.hpp"
#include "wsdse/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wsdse;

namespace {

struct RunConfig {
    std::string model_path;
    std::string blob_path;
    std::string images_path;
    std::string labels_path;
    int k_min = 1;
    int k_max = 256;
    int stride = 1;
    double budget_pp = 1.0;
    double layer_budget_pp = -1.0; // <0: default to budget_pp
    std::uint64_t seed = 0;
    std::string mode = "exhaustive"; // or "predicted"
    double sample_fraction = 0.001;
    bool filter_valid = false;
    bool with_intercept = false;
    int workers = 1;
    std::string out_dir = ".";
    std::uint64_t cap = 1'000'000;
    double eps_al = 0.05;
    double eps_cr = 0.05;
    std::string config_path;
};

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--config", cfg.config_path, "JSON config file; flags override its values");
    cmd->add_option("--model", cfg.model_path, "model manifest JSON");
    cmd->add_option("--blob", cfg.blob_path, "model weight blob (f32le)");
    cmd->add_option("--images", cfg.images_path, "IDX image file");
    cmd->add_option("--labels", cfg.labels_path, "IDX label file");
    cmd->add_option("--k-min", cfg.k_min, "smallest cluster count to sweep");
    cmd->add_option("--k-max", cfg.k_max, "largest cluster count to sweep");
    cmd->add_option("--stride", cfg.stride, "sweep every stride-th k");
    cmd->add_option("--budget-pp", cfg.budget_pp, "accuracy-loss budget in percentage points");
    cmd->add_option("--layer-budget-pp", cfg.layer_budget_pp,
                    "per-layer AL cap (defaults to --budget-pp)");
    cmd->add_option("--seed", cfg.seed, "RNG seed for subsampling");
    cmd->add_option("--mode", cfg.mode, "exhaustive|predicted")
        ->check(CLI::IsMember({"exhaustive", "predicted"}));
    cmd->add_option("--sample-fraction", cfg.sample_fraction,
                    "fraction of candidates measured for surrogate training");
    cmd->add_flag("--filter-valid", cfg.filter_valid,
                  "fit only on samples within the AL budget");
    cmd->add_flag("--intercept", cfg.with_intercept, "fit the surrogate with an intercept");
    cmd->add_option("--workers", cfg.workers, "scoring worker threads");
    cmd->add_option("--out-dir", cfg.out_dir, "output directory");
    cmd->add_option("--cap", cfg.cap, "max combinations for exhaustive mode");
    cmd->add_option("--eps-al", cfg.eps_al, "coverage tolerance on AL (pp)");
    cmd->add_option("--eps-cr", cfg.eps_cr, "coverage tolerance on CR (relative)");
}

// Flags override config-file values: config fills only options the user
// did not pass on the command line.
void merge_config_file(CLI::App* cmd, RunConfig& cfg) {
    if (cfg.config_path.empty()) return;
    std::ifstream in(cfg.config_path);
    if (!in) throw IoError("cannot open config file " + cfg.config_path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw IoError("invalid JSON in config file " + cfg.config_path);

    auto unset = [&](const char* flag) {
        const auto* opt = cmd->get_option_no_throw(flag);
        return opt != nullptr && opt->count() == 0;
    };
    auto get = [&](const char* key, auto& dst) {
        if (j.contains(key)) dst = j[key].get<std::decay_t<decltype(dst)>>();
    };
    if (unset("--model")) get("model", cfg.model_path);
    if (unset("--blob")) get("blob", cfg.blob_path);
    if (unset("--images")) get("images", cfg.images_path);
    if (unset("--labels")) get("labels", cfg.labels_path);
    if (unset("--k-min")) get("k_min", cfg.k_min);
    if (unset("--k-max")) get("k_max", cfg.k_max);
    if (unset("--stride")) get("stride", cfg.stride);
    if (unset("--budget-pp")) get("budget_pp", cfg.budget_pp);
    if (unset("--layer-budget-pp")) get("layer_budget_pp", cfg.layer_budget_pp);
    if (unset("--seed")) get("seed", cfg.seed);
    if (unset("--mode")) get("mode", cfg.mode);
    if (unset("--sample-fraction")) get("sample_fraction", cfg.sample_fraction);
    if (unset("--filter-valid")) get("filter_valid", cfg.filter_valid);
    if (unset("--intercept")) get("intercept", cfg.with_intercept);
    if (unset("--workers")) get("workers", cfg.workers);
    if (unset("--out-dir")) get("out_dir", cfg.out_dir);
    if (unset("--cap")) get("cap", cfg.cap);
}

void check_config(const RunConfig& cfg) {
    if (cfg.budget_pp <= 0) throw InvalidArgument("--budget-pp must be positive");
    if (cfg.sample_fraction <= 0 || cfg.sample_fraction > 1)
        throw InvalidArgument("--sample-fraction must be in (0,1]");
    if (cfg.k_min < 1) throw InvalidArgument("--k-min must be >= 1");
    if (cfg.k_min > cfg.k_max) throw InvalidArgument("--k-min must not exceed --k-max");
    if (cfg.workers < 1) throw InvalidArgument("--workers must be >= 1");
}

ModelSpec load_model_cfg(const RunConfig& cfg) {
    if (cfg.model_path.empty() || cfg.blob_path.empty())
        throw IoError("missing --model/--blob");
    return io::load_model(cfg.model_path, cfg.blob_path);
}

LabeledDataset load_dataset_cfg(const RunConfig& cfg) {
    if (cfg.images_path.empty() || cfg.labels_path.empty())
        throw IoError("missing --images/--labels");
    LabeledDataset ds;
    ds.samples = io::load_idx_images(cfg.images_path);
    ds.labels = io::load_idx_labels(cfg.labels_path);
    ds.num_classes = 0;
    for (int l : ds.labels) ds.num_classes = std::max(ds.num_classes, l + 1);
    if (ds.num_classes == 0) ds.num_classes = 1;
    ds.validate();
    return ds;
}

SweepConfig sweep_config(const RunConfig& cfg) {
    SweepConfig sc;
    sc.k_min = cfg.k_min;
    sc.k_max = cfg.k_max;
    sc.stride = cfg.stride;
    sc.layer_al_budget = cfg.layer_budget_pp >= 0 ? cfg.layer_budget_pp : cfg.budget_pp;
    return sc;
}

void update_run_log(const fs::path& out_dir, const std::string& section, json entry) {
    const fs::path path = out_dir / "run_log.json";
    json log;
    if (fs::exists(path)) {
        std::ifstream in(path);
        log = json::parse(in, nullptr, false);
        if (log.is_discarded()) log = json::object();
    }
    log["schema_version"] = "1";
    log[section] = std::move(entry);
    std::ofstream out(path, std::ios::binary);
    out << log.dump(2) << "\n";
}

std::vector<SensitivityCurve> load_curves(const fs::path& out_dir, std::size_t n) {
    std::vector<SensitivityCurve> curves;
    for (std::size_t i = 1; i <= n; ++i)
        curves.push_back(
            io::load_curve_csv(out_dir / ("layer_" + std::to_string(i) + "_curve.csv")));
    return curves;
}

int cmd_baseline(const RunConfig& cfg) {
    const ModelSpec model = load_model_cfg(cfg);
    const LabeledDataset dataset = load_dataset_cfg(cfg);
    const double acc = score(model, dataset);
    std::printf("%.4f\n", acc);
    fs::create_directories(cfg.out_dir);
    io::save_baseline_json(acc, dataset.samples.size(), fs::path(cfg.out_dir) / "baseline.json");
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    const ModelSpec model = load_model_cfg(cfg);
    const LabeledDataset dataset = load_dataset_cfg(cfg);
    const fs::path out_dir(cfg.out_dir);
    const double baseline_acc = io::load_baseline_json(out_dir / "baseline.json");
    const SweepConfig sc = sweep_config(cfg);

    const int n = model.num_weighted_layers();
    std::vector<CandidateSet> sets;
    std::uint64_t scorings = 0;
    for (int ordinal = 1; ordinal <= n; ++ordinal) {
        const SensitivityCurve curve =
            sweep_layer(model, ordinal, sc, dataset, baseline_acc);
        scorings += curve.points.size();
        io::save_curve_csv(curve,
                           out_dir / ("layer_" + std::to_string(ordinal) + "_curve.csv"));
        sets.push_back(select_layer_candidates(curve, sc));
        std::cerr << "layer " << ordinal << ": " << curve.points.size() << " swept k, "
                  << sets.back().candidates.size() << " candidates\n";
    }
    io::save_candidates_json(sets, out_dir / "candidates.json");
    std::cerr << "total scorings: " << scorings << "\n";
    update_run_log(out_dir, "sweep",
                   {{"scorings", scorings},
                    {"k_min", sc.k_min},
                    {"k_max", sc.k_max},
                    {"layer_al_budget", *sc.layer_al_budget}});
    return 0;
}

int cmd_explore(const RunConfig& cfg) {
    const ModelSpec model = load_model_cfg(cfg);
    const LabeledDataset dataset = load_dataset_cfg(cfg);
    const fs::path out_dir(cfg.out_dir);
    const double baseline_acc = io::load_baseline_json(out_dir / "baseline.json");
    const auto sets = io::load_candidates_json(out_dir / "candidates.json");

    const KTupleSpace space(sets);
    const Evaluator eval(model, dataset, baseline_acc, sets);
    ExploreOptions opts;
    opts.cap = cfg.cap;
    opts.workers = cfg.workers;

    if (cfg.mode == "exhaustive") {
        const auto t0 = std::chrono::steady_clock::now();
        const ExhaustiveResult res = exhaustive_explore(eval, space, cfg.budget_pp, opts);
        const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
        io::save_results_csv(res.records, out_dir / "results.csv");
        const ParetoFront front = pareto_front(res.records, cfg.budget_pp);
        io::save_front_csv(front, out_dir / "front.csv");
        std::cerr << "exhaustive: " << res.records.size() << " candidates scored in "
                  << dt.count() << " s; " << 100.0 * res.fraction_within_budget
                  << "% within budget; front size " << front.points.size() << "\n";
        update_run_log(out_dir, "explore_exhaustive",
                       {{"candidates", res.records.size()},
                        {"scorings", eval.score_calls()},
                        {"fraction_within_budget", res.fraction_within_budget},
                        {"front_size", front.points.size()},
                        {"budget_pp", cfg.budget_pp}});
        return 0;
    }

    // predicted mode: subsample -> measure -> fit -> predict all -> re-score front
    const std::uint64_t total = space.count();
    const auto curves = load_curves(out_dir, sets.size());
    const auto indices =
        subsample(total, cfg.sample_fraction, cfg.seed, sets.size());

    std::vector<RegressionSample> samples;
    for (const std::uint64_t idx : indices) {
        const KTuple t = space.at(idx);
        const EvalRecord rec = eval.score_candidate(t);
        if (cfg.filter_valid && rec.al > cfg.budget_pp) continue;
        RegressionSample s;
        for (std::size_t l = 0; l < t.ks.size(); ++l) {
            const CurvePoint* pt = curves[l].find(t.ks[l]);
            if (!pt)
                throw ComputeError("swept curve for layer " + std::to_string(l + 1) +
                                   " is missing k=" + std::to_string(t.ks[l]));
            s.features.push_back(pt->al);
        }
        s.target = rec.al;
        samples.push_back(std::move(s));
    }
    const std::uint64_t scorings_subsample = eval.score_calls();
    const PredictionModel predictor = fit(samples, cfg.with_intercept);
    io::save_predictor_json(predictor, out_dir / "predictor.json");

    const auto predicted = predicted_explore(space, predictor, curves, model);
    io::save_results_csv(predicted, out_dir / "predicted.csv");

    const ParetoFront predicted_front = pareto_front(predicted, cfg.budget_pp);
    std::vector<EvalRecord> rescored;
    for (const auto& p : predicted_front.points)
        rescored.push_back(eval.score_candidate(p.ktuple));
    const ParetoFront final_front = pareto_front(rescored, cfg.budget_pp);
    io::save_front_csv(final_front, out_dir / "front_predicted.csv");

    const std::uint64_t scorings_total = eval.score_calls();
    std::cerr << "predicted: " << total << " candidates, " << scorings_subsample
              << " training scorings + " << (scorings_total - scorings_subsample)
              << " front re-scorings (exhaustive would need " << total << ")\n";
    update_run_log(out_dir, "explore_predicted",
                   {{"candidates", total},
                    {"scorings_subsample", scorings_subsample},
                    {"scorings_front", scorings_total - scorings_subsample},
                    {"scorings_total", scorings_total},
                    {"seed", cfg.seed},
                    {"sample_fraction", cfg.sample_fraction},
                    {"filter_valid", cfg.filter_valid},
                    {"front_size", final_front.points.size()},
                    {"budget_pp", cfg.budget_pp}});

    // compare against exhaustive ground truth when it exists
    if (fs::exists(out_dir / "results.csv")) {
        const auto measured = io::load_results_csv(out_dir / "results.csv");
        const ParetoFront truth = pareto_front(measured, cfg.budget_pp);
        const FrontComparison cmp =
            compare_fronts(truth, final_front, measured, cfg.eps_al, cfg.eps_cr);
        io::save_comparison_json(cmp, out_dir / "front_comparison.json");
        std::cerr << "front comparison: coverage " << cmp.coverage << ", hypervolume ratio "
                  << cmp.hypervolume_ratio << "\n";
    }
    return 0;
}

int cmd_fit(const RunConfig& cfg) {
    const fs::path out_dir(cfg.out_dir);
    const auto sets = io::load_candidates_json(out_dir / "candidates.json");
    const auto curves = load_curves(out_dir, sets.size());
    const auto measured = io::load_results_csv(out_dir / "results.csv");

    std::vector<RegressionSample> samples;
    for (const auto& rec : measured) {
        if (rec.al_source != AlSource::Measured) continue;
        if (cfg.filter_valid && rec.al > cfg.budget_pp) continue;
        RegressionSample s;
        for (std::size_t l = 0; l < rec.ktuple.ks.size(); ++l) {
            const CurvePoint* pt = curves[l].find(rec.ktuple.ks[l]);
            if (!pt)
                throw ComputeError("curve for layer " + std::to_string(l + 1) +
                                   " is missing k=" + std::to_string(rec.ktuple.ks[l]));
            s.features.push_back(pt->al);
        }
        s.target = rec.al;
        samples.push_back(std::move(s));
    }
    const PredictionModel predictor = fit(samples, cfg.with_intercept);
    io::save_predictor_json(predictor, out_dir / "predictor.json");
    std::cerr << "fitted on " << samples.size() << " samples, train RMSE "
              << predictor.fit_diagnostics.rmse_train << "\n";
    return 0;
}

int cmd_compare(const RunConfig& cfg) {
    const fs::path out_dir(cfg.out_dir);
    const auto measured = io::load_results_csv(out_dir / "results.csv");
    const ParetoFront truth = pareto_front(measured, cfg.budget_pp);
    ParetoFront predicted;
    predicted.al_budget = cfg.budget_pp;
    predicted.points = io::load_results_csv(out_dir / "front_predicted.csv");
    const FrontComparison cmp =
        compare_fronts(truth, predicted, measured, cfg.eps_al, cfg.eps_cr);
    io::save_comparison_json(cmp, out_dir / "front_comparison.json");
    std::printf("coverage %.4f  mean_gap %.6f  max_gap %.6f  hv_ratio %.4f\n",
                cmp.coverage, cmp.mean_gap, cmp.max_gap, cmp.hypervolume_ratio);
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const fs::path out_dir(cfg.out_dir);
    if (fs::exists(out_dir / "baseline.json"))
        std::printf("baseline accuracy: %.4f\n",
                    io::load_baseline_json(out_dir / "baseline.json"));
    if (fs::exists(out_dir / "candidates.json")) {
        const auto sets = io::load_candidates_json(out_dir / "candidates.json");
        std::uint64_t combos = 1;
        for (const auto& cs : sets) {
            std::printf("layer%d candidates:", cs.layer);
            for (const auto& c : cs.candidates) std::printf(" %d", c.k);
            std::printf("\n");
            combos *= cs.candidates.size();
        }
        std::printf("combination count: %llu\n", static_cast<unsigned long long>(combos));
    }
    for (const char* name : {"front.csv", "front_predicted.csv"}) {
        if (fs::exists(out_dir / name)) {
            const auto pts = io::load_results_csv(out_dir / name);
            std::printf("%s: %zu points\n", name, pts.size());
            for (const auto& p : pts)
                std::printf("  ktuple=%s al=%s cr=%s\n", p.ktuple.str().c_str(),
                            io::format_double(p.al).c_str(), io::format_double(p.cr).c_str());
        }
    }
    if (fs::exists(out_dir / "run_log.json")) {
        std::ifstream in(out_dir / "run_log.json");
        const json log = json::parse(in);
        if (log.contains("explore_predicted"))
            std::printf("predicted-mode scorings: %llu of %llu candidates\n",
                        log["explore_predicted"]["scorings_total"].get<unsigned long long>(),
                        log["explore_predicted"]["candidates"].get<unsigned long long>());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"layer-wise weight-sharing design-space exploration"};
    app.require_subcommand(1);

    RunConfig cfg;
    CLI::App* sub_baseline = app.add_subcommand("baseline", "measure baseline accuracy");
    CLI::App* sub_sweep = app.add_subcommand("sweep", "per-layer sensitivity sweep");
    CLI::App* sub_explore = app.add_subcommand("explore", "combination search");
    CLI::App* sub_fit = app.add_subcommand("fit", "fit the accuracy-loss surrogate");
    CLI::App* sub_compare = app.add_subcommand("compare", "compare predicted vs true fronts");
    CLI::App* sub_report = app.add_subcommand("report", "summarize a run directory");
    for (CLI::App* s :
         {sub_baseline, sub_sweep, sub_explore, sub_fit, sub_compare, sub_report})
        add_common_options(s, cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        merge_config_file(sub, cfg);
        check_config(cfg);
        fs::create_directories(cfg.out_dir);
        if (sub == sub_baseline) return cmd_baseline(cfg);
        if (sub == sub_sweep) return cmd_sweep(cfg);
        if (sub == sub_explore) return cmd_explore(cfg);
        if (sub == sub_fit) return cmd_fit(cfg);
        if (sub == sub_compare) return cmd_compare(cfg);
        if (sub == sub_report) return cmd_report(cfg);
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

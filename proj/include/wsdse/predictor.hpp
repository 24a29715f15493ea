#pragma once

#include <optional>
#include <vector>

#include "wsdse/layer_explorer.hpp"

namespace wsdse {

struct RegressionSample {
    std::vector<double> features; // per-layer AL at the chosen k, length N
    double target = 0.0;          // measured network AL, percentage points
};

struct FitDiagnostics {
    std::size_t num_samples = 0;
    double rmse_train = 0.0;
    double mae_train = 0.0;
};

/// Linear surrogate: predicted network AL = sum_i alphas[i] * AL_i
/// (+ intercept when fitted with one).
struct PredictionModel {
    std::vector<double> alphas;
    std::optional<double> intercept; // absent in the default no-intercept fit
    FitDiagnostics fit_diagnostics;

    double predict_features(const std::vector<double>& features) const;
};

struct ValidationStats {
    double mae = 0.0;
    double rmse = 0.0;
    double max_abs_error = 0.0;
};

/// Ordinary least squares without intercept (normal equations with an SPD
/// check; Householder QR fallback under bad conditioning). Throws
/// ComputeError on too few samples or a rank-deficient feature matrix,
/// naming the degenerate column.
PredictionModel fit(const std::vector<RegressionSample>& samples,
                    bool with_intercept = false);

struct KTuple {
    std::vector<int> ks; // one k per weighted layer, 1-based layer order

    bool operator==(const KTuple&) const = default;
    auto operator<=>(const KTuple&) const = default;
    std::string str() const; // semicolon-joined
};

/// Sum of alphas[i] * curve_i(AL at ktuple.ks[i]). Throws InvalidArgument
/// when some k was never swept.
double predict(const KTuple& ktuple, const PredictionModel& model,
               const std::vector<SensitivityCurve>& curves);

ValidationStats validate(const PredictionModel& model,
                         const std::vector<RegressionSample>& heldout);

} // namespace wsdse

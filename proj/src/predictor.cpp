#include "wsdse/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wsdse {

namespace {

constexpr double kCondLimit = 1e10;
constexpr double kRankTol = 1e-12;

// Cholesky of an SPD matrix, row-major p x p. Returns the index of the first
// non-positive pivot, or -1 on success.
int cholesky(std::vector<double>& a, int p) {
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<std::size_t>(i) * p + j];
            for (int t = 0; t < j; ++t)
                s -= a[static_cast<std::size_t>(i) * p + t] *
                     a[static_cast<std::size_t>(j) * p + t];
            if (i == j) {
                if (s <= kRankTol) return i;
                a[static_cast<std::size_t>(i) * p + j] = std::sqrt(s);
            } else {
                a[static_cast<std::size_t>(i) * p + j] =
                    s / a[static_cast<std::size_t>(j) * p + j];
            }
        }
    }
    return -1;
}

std::vector<double> cholesky_solve(const std::vector<double>& l, int p,
                                   std::vector<double> b) {
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < i; ++j) b[i] -= l[static_cast<std::size_t>(i) * p + j] * b[j];
        b[i] /= l[static_cast<std::size_t>(i) * p + i];
    }
    for (int i = p - 1; i >= 0; --i) {
        for (int j = i + 1; j < p; ++j)
            b[i] -= l[static_cast<std::size_t>(j) * p + i] * b[j];
        b[i] /= l[static_cast<std::size_t>(i) * p + i];
    }
    return b;
}

// Householder QR least-squares for an s x p column-major matrix; used when
// the normal equations are too ill-conditioned.
std::vector<double> qr_solve(std::vector<std::vector<double>> cols,
                             std::vector<double> y) {
    const int p = static_cast<int>(cols.size());
    const std::size_t s = y.size();
    for (int j = 0; j < p; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < s; ++i) norm += cols[j][i] * cols[j][i];
        norm = std::sqrt(norm);
        if (norm <= kRankTol)
            throw ComputeError("fit: feature column " + std::to_string(j) +
                               " is degenerate (rank-deficient design matrix)");
        double alpha = (cols[j][j] > 0) ? -norm : norm;
        std::vector<double> v(s, 0.0);
        for (std::size_t i = j; i < s; ++i) v[i] = cols[j][i];
        v[j] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = j; i < s; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 > 0) {
            for (int jj = j; jj < p; ++jj) {
                double dotp = 0.0;
                for (std::size_t i = j; i < s; ++i) dotp += v[i] * cols[jj][i];
                const double f = 2.0 * dotp / vnorm2;
                for (std::size_t i = j; i < s; ++i) cols[jj][i] -= f * v[i];
            }
            double doty = 0.0;
            for (std::size_t i = j; i < s; ++i) doty += v[i] * y[i];
            const double f = 2.0 * doty / vnorm2;
            for (std::size_t i = j; i < s; ++i) y[i] -= f * v[i];
        }
    }
    std::vector<double> x(p, 0.0);
    for (int i = p - 1; i >= 0; --i) {
        double s2 = y[i];
        for (int j = i + 1; j < p; ++j) s2 -= cols[j][i] * x[j];
        if (std::abs(cols[i][i]) <= kRankTol)
            throw ComputeError("fit: feature column " + std::to_string(i) +
                               " is degenerate (rank-deficient design matrix)");
        x[i] = s2 / cols[i][i];
    }
    return x;
}

} // namespace

double PredictionModel::predict_features(const std::vector<double>& features) const {
    if (features.size() != alphas.size())
        throw InvalidArgument("predict: feature length " + std::to_string(features.size()) +
                              " != number of coefficients " + std::to_string(alphas.size()));
    double acc = intercept.value_or(0.0);
    for (std::size_t i = 0; i < alphas.size(); ++i) acc += alphas[i] * features[i];
    return acc;
}

PredictionModel fit(const std::vector<RegressionSample>& samples, bool with_intercept) {
    if (samples.empty()) throw ComputeError("fit: no samples");
    const std::size_t n_feat = samples.front().features.size();
    for (const auto& s : samples)
        if (s.features.size() != n_feat)
            throw InvalidArgument("fit: inconsistent feature lengths");
    const int p = static_cast<int>(n_feat) + (with_intercept ? 1 : 0);
    if (samples.size() < static_cast<std::size_t>(p))
        throw ComputeError("fit: " + std::to_string(samples.size()) +
                           " samples < " + std::to_string(p) + " coefficients");

    // column-major design matrix; intercept column of ones appended last
    std::vector<std::vector<double>> cols(p, std::vector<double>(samples.size()));
    std::vector<double> y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = 0; j < n_feat; ++j) cols[j][i] = samples[i].features[j];
        if (with_intercept) cols[n_feat][i] = 1.0;
        y[i] = samples[i].target;
    }

    // normal equations G x = b
    std::vector<double> g(static_cast<std::size_t>(p) * p, 0.0);
    std::vector<double> b(p, 0.0);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < samples.size(); ++t) s += cols[i][t] * cols[j][t];
            g[static_cast<std::size_t>(i) * p + j] = s;
            g[static_cast<std::size_t>(j) * p + i] = s;
        }
        for (std::size_t t = 0; t < samples.size(); ++t) b[i] += cols[i][t] * y[t];
    }

    std::vector<double> x;
    std::vector<double> l = g;
    const int bad = cholesky(l, p);
    if (bad >= 0)
        throw ComputeError(
            "fit: feature column " + std::to_string(bad) +
            " is degenerate (e.g. a layer whose AL is 0 for every sampled candidate)");
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < p; ++i) {
        const double d = l[static_cast<std::size_t>(i) * p + i];
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    // squared diagonal ratio approximates cond(G); switch to QR when extreme
    if ((dmax / dmin) * (dmax / dmin) > kCondLimit)
        x = qr_solve(cols, y);
    else
        x = cholesky_solve(l, p, b);

    PredictionModel model;
    model.alphas.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_feat));
    if (with_intercept) model.intercept = x.back();
    model.fit_diagnostics.num_samples = samples.size();
    double sse = 0.0, sae = 0.0;
    for (const auto& s : samples) {
        const double e = model.predict_features(s.features) - s.target;
        sse += e * e;
        sae += std::abs(e);
    }
    model.fit_diagnostics.rmse_train = std::sqrt(sse / static_cast<double>(samples.size()));
    model.fit_diagnostics.mae_train = sae / static_cast<double>(samples.size());
    return model;
}

std::string KTuple::str() const {
    std::string s;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(ks[i]);
    }
    return s;
}

double predict(const KTuple& ktuple, const PredictionModel& model,
               const std::vector<SensitivityCurve>& curves) {
    if (ktuple.ks.size() != model.alphas.size() || ktuple.ks.size() != curves.size())
        throw InvalidArgument("predict: ktuple/coefficient/curve count mismatch");
    std::vector<double> feats(ktuple.ks.size());
    for (std::size_t i = 0; i < ktuple.ks.size(); ++i) {
        const CurvePoint* pt = curves[i].find(ktuple.ks[i]);
        if (!pt)
            throw InvalidArgument("predict: k=" + std::to_string(ktuple.ks[i]) +
                                  " was never swept for layer " + std::to_string(i + 1));
        feats[i] = pt->al;
    }
    return model.predict_features(feats);
}

ValidationStats validate(const PredictionModel& model,
                         const std::vector<RegressionSample>& heldout) {
    if (heldout.empty()) throw InvalidArgument("validate: empty held-out set");
    ValidationStats st;
    double sse = 0.0;
    for (const auto& s : heldout) {
        const double e = std::abs(model.predict_features(s.features) - s.target);
        st.mae += e;
        sse += e * e;
        st.max_abs_error = std::max(st.max_abs_error, e);
    }
    st.mae /= static_cast<double>(heldout.size());
    st.rmse = std::sqrt(sse / static_cast<double>(heldout.size()));
    return st;
}

} // namespace wsdse

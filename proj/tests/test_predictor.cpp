#include <doctest.h>

#include <random>

#include "wsdse/predictor.hpp"

using namespace wsdse;

namespace {

std::vector<RegressionSample> synthetic_samples(const std::vector<double>& alphas,
                                                std::size_t count, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    std::vector<RegressionSample> samples(count);
    for (auto& s : samples) {
        s.features.resize(alphas.size());
        s.target = 0.0;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            s.features[i] = dist(rng);
            s.target += alphas[i] * s.features[i];
        }
    }
    return samples;
}

} // namespace

TEST_CASE("fit recovers known coefficients from noiseless targets") {
    const std::vector<double> truth{1.26, 0.78, 0.95, 0.80, 0.92};
    const auto samples = synthetic_samples(truth, 50, 404);
    const PredictionModel m = fit(samples);
    REQUIRE(m.alphas.size() == truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
        CHECK(m.alphas[i] == doctest::Approx(truth[i]).epsilon(1e-6));
    CHECK(!m.intercept.has_value());
    CHECK(m.fit_diagnostics.rmse_train == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("single-feature exact solve") {
    std::vector<RegressionSample> s{{{2.0}, 1.0}};
    const PredictionModel m = fit(s);
    REQUIRE(m.alphas.size() == 1);
    CHECK(m.alphas[0] == doctest::Approx(0.5));
}

TEST_CASE("residual minimality: perturbing any alpha never decreases SSE") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<RegressionSample> samples(50);
    for (auto& s : samples) {
        s.features = {dist(rng), dist(rng), dist(rng)};
        s.target = dist(rng); // noisy target, no exact solution
    }
    const PredictionModel m = fit(samples);
    auto sse = [&](const std::vector<double>& a) {
        double acc = 0.0;
        for (const auto& s : samples) {
            double p = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) p += a[i] * s.features[i];
            acc += (p - s.target) * (p - s.target);
        }
        return acc;
    };
    const double base = sse(m.alphas);
    for (std::size_t i = 0; i < m.alphas.size(); ++i) {
        for (double d : {-1e-3, 1e-3}) {
            auto a = m.alphas;
            a[i] += d;
            CHECK(sse(a) >= base - 1e-12);
        }
    }
}

TEST_CASE("fit errors: too few samples and rank deficiency") {
    std::vector<RegressionSample> few{{{1.0, 2.0}, 1.0}};
    CHECK_THROWS_AS(fit(few), ComputeError);

    // column 1 identically zero (a layer with AL = 0 everywhere)
    std::vector<RegressionSample> degenerate;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int i = 0; i < 10; ++i)
        degenerate.push_back({{dist(rng), 0.0}, dist(rng)});
    CHECK_THROWS_WITH_AS(fit(degenerate), doctest::Contains("column 1"), ComputeError);
}

TEST_CASE("fit is permutation-invariant in sample order") {
    const std::vector<double> truth{0.4, 1.1, 0.7};
    auto samples = synthetic_samples(truth, 20, 17);
    const PredictionModel a = fit(samples);
    std::reverse(samples.begin(), samples.end());
    const PredictionModel b = fit(samples);
    for (std::size_t i = 0; i < truth.size(); ++i)
        CHECK(a.alphas[i] == doctest::Approx(b.alphas[i]).epsilon(1e-12));
}

TEST_CASE("canonical basis features recover per-sample ratios exactly") {
    std::vector<RegressionSample> samples{
        {{2.0, 0.0, 0.0}, 1.0}, {{0.0, 4.0, 0.0}, 2.0}, {{0.0, 0.0, 5.0}, 10.0}};
    const PredictionModel m = fit(samples);
    CHECK(m.alphas[0] == doctest::Approx(0.5));
    CHECK(m.alphas[1] == doctest::Approx(0.5));
    CHECK(m.alphas[2] == doctest::Approx(2.0));
}

TEST_CASE("optional intercept is fitted when requested") {
    std::vector<RegressionSample> samples;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double x = dist(rng);
        samples.push_back({{x}, 2.0 * x + 0.5});
    }
    const PredictionModel m = fit(samples, true);
    REQUIRE(m.intercept.has_value());
    CHECK(m.alphas[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(*m.intercept == doctest::Approx(0.5).epsilon(1e-9));
}

namespace {

std::vector<SensitivityCurve> curves_from(const std::vector<std::vector<std::pair<int, double>>>& al) {
    std::vector<SensitivityCurve> curves;
    for (std::size_t i = 0; i < al.size(); ++i) {
        SensitivityCurve c;
        c.layer = static_cast<int>(i) + 1;
        for (const auto& [k, a] : al[i]) c.points.push_back({k, a, 1.0, index_bits(k), 0.0, false});
        curves.push_back(std::move(c));
    }
    return curves;
}

} // namespace

TEST_CASE("predict: worked dot product") {
    PredictionModel m;
    m.alphas = {1.26, 0.78, 0.95, 0.80, 0.92};
    const auto curves = curves_from({{{2, 0.1}}, {{3, 0.2}}, {{4, 0.1}}, {{5, 0.3}}, {{6, 0.2}}});
    const double p = predict({{2, 3, 4, 5, 6}}, m, curves);
    CHECK(p == doctest::Approx(0.126 + 0.156 + 0.095 + 0.240 + 0.184));
}

TEST_CASE("predict: zero features give zero regardless of alphas") {
    PredictionModel m;
    m.alphas = {5.0, -3.0};
    const auto curves = curves_from({{{1, 0.0}}, {{1, 0.0}}});
    CHECK(predict({{1, 1}}, m, curves) == 0.0);
}

TEST_CASE("predict with unit alphas equals the plain sum of per-layer ALs") {
    PredictionModel m;
    m.alphas = {1.0, 1.0, 1.0};
    const auto curves = curves_from({{{2, 0.3}}, {{2, 0.4}}, {{2, 0.5}}});
    CHECK(predict({{2, 2, 2}}, m, curves) == doctest::Approx(1.2));
}

TEST_CASE("predict rejects unswept k") {
    PredictionModel m;
    m.alphas = {1.0};
    const auto curves = curves_from({{{2, 0.3}}});
    CHECK_THROWS_AS(predict({{3}}, m, curves), InvalidArgument);
}

TEST_CASE("predict is linear in the feature vector") {
    PredictionModel m;
    m.alphas = {0.3, 1.7, -0.2};
    const std::vector<double> a{0.1, 0.2, 0.3}, b{1.0, 0.5, 0.25};
    std::vector<double> ab(3);
    for (int i = 0; i < 3; ++i) ab[i] = a[i] + b[i];
    CHECK(m.predict_features(a) + m.predict_features(b) ==
          doctest::Approx(m.predict_features(ab)).epsilon(1e-9));
}

TEST_CASE("validate statistics") {
    PredictionModel m;
    m.alphas = {1.0, 1.0};
    std::vector<RegressionSample> exact{{{0.5, 0.5}, 1.0}, {{0.2, 0.3}, 0.5}};
    const ValidationStats s0 = validate(m, exact);
    CHECK(s0.mae == 0.0);
    CHECK(s0.rmse == 0.0);
    CHECK(s0.max_abs_error == 0.0);

    std::vector<RegressionSample> off{{{1.0, 0.0}, 1.5}};
    const ValidationStats s1 = validate(m, off);
    CHECK(s1.mae == doctest::Approx(0.5));
    CHECK(s1.rmse == doctest::Approx(0.5));
    CHECK(s1.max_abs_error == doctest::Approx(0.5));

    // random held-out set vs naive loop
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<RegressionSample> rand_set;
    for (int i = 0; i < 30; ++i) rand_set.push_back({{dist(rng), dist(rng)}, dist(rng)});
    const ValidationStats s2 = validate(m, rand_set);
    double sae = 0.0, sse = 0.0, mx = 0.0;
    for (const auto& s : rand_set) {
        const double e = std::abs(s.features[0] + s.features[1] - s.target);
        sae += e;
        sse += e * e;
        mx = std::max(mx, e);
    }
    CHECK(s2.mae == doctest::Approx(sae / 30.0).epsilon(1e-12));
    CHECK(s2.rmse == doctest::Approx(std::sqrt(sse / 30.0)).epsilon(1e-12));
    CHECK(s2.max_abs_error == doctest::Approx(mx).epsilon(1e-12));

    CHECK_THROWS_AS(validate(m, {}), InvalidArgument);
}

TEST_CASE("fit round-trips arbitrary coefficients on full-rank noiseless data") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 1 + rng() % 6;
        std::vector<double> truth(n);
        for (auto& a : truth) a = dist(rng);
        const auto samples = synthetic_samples(truth, n + 10, rng());
        const PredictionModel m = fit(samples);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(m.alphas[i] == doctest::Approx(truth[i]).epsilon(1e-6));
    }
}

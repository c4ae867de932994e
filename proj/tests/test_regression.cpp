#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mmenc/error.hpp"
#include "mmenc/regression.hpp"
#include "mmenc/rng.hpp"

using namespace mmenc;

namespace {

Eigen::MatrixXd gaussian(std::uint64_t stream, Eigen::Index r, Eigen::Index c)
{
    const CounterRng rng(91);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r * c; ++i) m.data()[i] = rng.normal(stream, static_cast<std::uint64_t>(i));
    return m;
}

FeatureMatrix layer(std::string model, std::string id, Eigen::MatrixXd v)
{
    return {std::move(model), std::move(id), std::move(v), false, 0};
}

}  // namespace

TEST_CASE("lambda grid")
{
    const auto g = RidgeConfig::log_grid();
    REQUIRE(g.lambda_grid.size() == 8);
    CHECK(g.lambda_grid.front() == doctest::Approx(0.1));
    CHECK(g.lambda_grid.back() == doctest::Approx(1e6));
    CHECK(g.lambda_grid[3] == doctest::Approx(100.0));
    RidgeConfig zero{{0.0, 1.0}, 1e-12};
    CHECK_THROWS(zero.validate());
    CHECK_NOTHROW(zero.validate(true));
}

TEST_CASE("a realizable noiseless target scores near 1 on its own layer")
{
    const Eigen::Index n = 300;
    const auto src = gaussian(1, n, 6);
    const Eigen::MatrixXd noisy = src + 3.0 * gaussian(2, n, 6);
    const Eigen::MatrixXd y = src * gaussian(3, 6, 4);  // 2 electrodes x 2 bins
    const std::vector<ModelLayers> models{{"m", {layer("m", "shallow", noisy), layer("m", "deep", src)}}};
    const auto scores = run_regression(models, y, {11, 12}, 2, make_folds(n, 5), RidgeConfig::log_grid());
    REQUIRE(scores.models.size() == 1);
    CHECK(scores.models[0].chosen_layer == std::vector<int>{1, 1});
    for (std::size_t e = 0; e < 2; ++e)
        for (double r : scores.chosen_curve(0, Split::Test, e)) CHECK(r >= 0.999);
    CHECK(scores.models[0].layers[1].chosen_lambda[0] == 0);
}

TEST_CASE("white-noise targets centre test scores on zero")
{
    const Eigen::Index n = 400;
    const auto x = gaussian(4, n, 5);
    const auto y = gaussian(5, n, 60);
    const std::vector<ModelLayers> models{{"m", {layer("m", "l", x)}}};
    const auto scores = run_regression(models, y, {1, 2, 3}, 20, make_folds(n, 5), RidgeConfig::log_grid());
    const auto& r = scores.models[0].layers[0].r[static_cast<int>(Split::Test)];
    double mean = 0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    CHECK(std::abs(mean) < 2.0 / std::sqrt(40.0 * 5.0));
}

TEST_CASE("single layer and lambda reduce to cross_validated_scores")
{
    const Eigen::Index n = 150;
    const auto x = gaussian(6, n, 4);
    const Eigen::MatrixXd y = x * gaussian(7, 4, 3) + gaussian(8, n, 3);
    const auto plan = make_folds(n, 5);
    const std::vector<ModelLayers> models{{"m", {layer("m", "l", x)}}};
    const auto scores = run_regression(models, y, {1}, 3, plan, RidgeConfig{{10.0}, 1e-12});
    const auto direct = cross_validated_scores(x, y, plan, 10.0, "m/l");
    for (int s = 0; s < 3; ++s)
        for (Eigen::Index t = 0; t < 3; ++t)
            CHECK(scores.models[0].layers[0].r[s][static_cast<std::size_t>(t)] == doctest::Approx(direct(s, t)).epsilon(1e-12));
}

TEST_CASE("selection ignores test targets and thread count")
{
    const Eigen::Index n = 200;
    const auto x1 = gaussian(9, n, 8);
    const auto x2 = gaussian(10, n, 3);
    Eigen::MatrixXd y = x1.leftCols(3) * gaussian(11, 3, 6) + 1.5 * gaussian(12, n, 6);
    const std::vector<ModelLayers> models{{"a", {layer("a", "0", x1), layer("a", "1", x2)}},
                                          {"b", {layer("b", "0", x2)}}};
    // A single fold, so permuting its test rows touches nothing the fit or selection reads.
    FoldPlan plan = make_folds(n, 5);
    plan.folds.resize(1);
    plan.k = 1;
    const auto base = run_regression(models, y, {1, 2, 3}, 2, plan, RidgeConfig::log_grid());
    const auto threaded = run_regression(models, y, {1, 2, 3}, 2, plan, RidgeConfig::log_grid(), 4);
    CHECK(threaded.models[0].layers[0].r == base.models[0].layers[0].r);

    auto permuted = y;
    const auto& test = plan.folds[0].test;
    for (std::size_t i = 0; i < test.size(); ++i) permuted.row(test[i]) = y.row(test[(i * 7 + 3) % test.size()]);
    const auto perm = run_regression(models, permuted, {1, 2, 3}, 2, plan, RidgeConfig::log_grid());
    for (std::size_t m = 0; m < 2; ++m) {
        CHECK(perm.models[m].chosen_layer == base.models[m].chosen_layer);
        for (std::size_t l = 0; l < base.models[m].layers.size(); ++l) {
            CHECK(perm.models[m].layers[l].chosen_lambda == base.models[m].layers[l].chosen_lambda);
            // Training moments are formed by subtracting held-out rows, so
            // validation scores agree to rounding rather than bit for bit.
            const auto& a = perm.models[m].layers[l].r[1];
            const auto& b = base.models[m].layers[l].r[1];
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
        }
    }
    CHECK(perm.models[0].layers[0].r[2] != base.models[0].layers[0].r[2]);
}

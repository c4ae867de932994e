#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "mmenc/error.hpp"
#include "mmenc/feature_store.hpp"
#include "mmenc/folds.hpp"
#include "mmenc/regression.hpp"
#include "mmenc/ridge.hpp"
#include "mmenc/rng.hpp"

using namespace mmenc;

namespace {

Eigen::MatrixXd gaussian(std::uint64_t stream, Eigen::Index r, Eigen::Index c)
{
    const CounterRng rng(77);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r * c; ++i) m.data()[i] = rng.normal(stream, static_cast<std::uint64_t>(i));
    return m;
}

std::vector<Eigen::Index> range(Eigen::Index lo, Eigen::Index hi)
{
    std::vector<Eigen::Index> v;
    for (auto i = lo; i < hi; ++i) v.push_back(i);
    return v;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

double col_r(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::Index c)
{
    std::vector<double> x(a.col(c).data(), a.col(c).data() + a.rows());
    std::vector<double> y(b.col(c).data(), b.col(c).data() + b.rows());
    return pearson(x, y).r;
}

}  // namespace

TEST_CASE("contiguous folds rotate around the circle")
{
    const auto plan = make_folds(100, 5);
    REQUIRE(plan.folds.size() == 5);
    CHECK(plan.folds[0].train == range(0, 80));
    CHECK(plan.folds[0].val == range(80, 90));
    CHECK(plan.folds[0].test == range(90, 100));
    CHECK(plan.folds[1].train == range(20, 100));
    CHECK(plan.folds[1].val == range(0, 10));
    CHECK(plan.folds[1].test == range(10, 20));
    CHECK(check_fold_plan(plan).empty());
    for (Eigen::Index n : {50, 57, 101, 999, 1000}) CHECK(check_fold_plan(make_folds(n, 5)).empty());
    CHECK_THROWS_AS(make_folds(49, 5), ConfigError);
}

TEST_CASE("fold checker catches leaks and gaps")
{
    auto plan = make_folds(100, 5);
    plan.folds[2].val.push_back(plan.folds[2].train.front());
    CHECK_FALSE(check_fold_plan(plan).empty());

    plan = make_folds(100, 5);
    plan.folds[0].test.pop_back();
    CHECK_FALSE(check_fold_plan(plan).empty());

    plan = make_folds(100, 5);
    std::swap(plan.folds[0].train[5], plan.folds[0].test[3]);
    CHECK_FALSE(check_fold_plan(plan).empty());
}

TEST_CASE("ridge closed form on hand examples")
{
    Eigen::MatrixXd p(2, 1);
    p << 1, 2;
    Eigen::MatrixXd y(2, 1);
    y << 1, 2;
    CHECK(ridge_fit(p, y, 0.0)(0, 0) == doctest::Approx(1.0));
    CHECK(ridge_fit(p, y, 1.0)(0, 0) == doctest::Approx(5.0 / 6.0));

    const auto ys = gaussian(1, 4, 3);
    CHECK((ridge_fit(Eigen::MatrixXd::Identity(4, 4), ys, 0.0) - ys).cwiseAbs().maxCoeff() < 1e-14);

    Eigen::MatrixXd singular(3, 2);
    singular << 1, 2, 2, 4, 3, 6;
    CHECK_THROWS_AS(ridge_fit(singular, gaussian(2, 3, 1), 0.0), NumericalError);
    CHECK_THROWS_AS(ridge_fit(singular, gaussian(2, 4, 1), 1.0), DataError);
}

TEST_CASE("ridge shrinks monotonically in lambda")
{
    for (std::uint64_t t = 0; t < 20; ++t) {
        const auto p = gaussian(10 + t, 30, 6);
        const auto y = gaussian(50 + t, 30, 2);
        double prev = std::numeric_limits<double>::infinity();
        for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
            const double norm = ridge_fit(p, y, lambda).norm();
            CHECK(norm <= prev);
            prev = norm;
        }
    }
}

TEST_CASE("pearson on hand examples")
{
    const std::vector<double> x{1, 2, 3}, up{2, 4, 6}, down{3, 2, 1};
    CHECK(pearson(x, up).r == doctest::Approx(1.0));
    CHECK(pearson(x, down).r == doctest::Approx(-1.0));
    const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
    CHECK(pearson(a, b).r == doctest::Approx(0.8));
    const std::vector<double> flat{5, 5, 5};
    const auto d = pearson(x, flat);
    CHECK(d.degenerate);
    CHECK(d.r == 0.0);
    CHECK_THROWS_AS(pearson(x, a), DataError);
}

TEST_CASE("fold scores match a direct standardise, fit and correlate composition")
{
    const Eigen::MatrixXd x = gaussian(3, 120, 5) + Eigen::MatrixXd::Constant(120, 5, 3.0);
    const Eigen::MatrixXd w = gaussian(4, 5, 4);
    const Eigen::MatrixXd y = x * w + 2.0 * gaussian(5, 120, 4);
    const auto plan = make_folds(120, 5);
    for (double lambda : {0.1, 10.0, 1000.0}) {
        const auto got = cross_validated_scores(x, y, plan, lambda, "direct");
        Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 4);
        for (const auto& fold : plan.folds) {
            const auto s = Standardizer::fit(rows_of(x, fold.train));
            const auto b = ridge_fit(s.apply(rows_of(x, fold.train)), rows_of(y, fold.train), lambda);
            const std::vector<Eigen::Index>* sets[] = {&fold.train, &fold.val, &fold.test};
            for (int split = 0; split < 3; ++split) {
                const Eigen::MatrixXd pred = s.apply(rows_of(x, *sets[split])) * b;
                const auto truth = rows_of(y, *sets[split]);
                for (Eigen::Index c = 0; c < 4; ++c) expect(split, c) += col_r(pred, truth, c) / 5.0;
            }
        }
        CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("fold system handles constant feature columns")
{
    Eigen::MatrixXd x = gaussian(6, 100, 3);
    x.col(1).setConstant(4.0);
    const Eigen::MatrixXd y = x.col(0) * 2.0 + gaussian(7, 100, 1);
    const auto s = cross_validated_scores(x, y, make_folds(100, 5), 1.0, "constant column");
    CHECK(s.allFinite());
    CHECK(s(2, 0) > 0.5);
}

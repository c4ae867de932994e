#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "mmenc/bootstrap.hpp"
#include "mmenc/error.hpp"
#include "mmenc/rng.hpp"

using namespace mmenc;
namespace fs = std::filesystem;

namespace {

Eigen::MatrixXd gaussian(std::uint64_t stream, Eigen::Index r, Eigen::Index c)
{
    const CounterRng rng(5);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r * c; ++i) m.data()[i] = rng.normal(stream, static_cast<std::uint64_t>(i));
    return m;
}

std::vector<double> onsets(std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1000.0 + 450.0 * static_cast<double>(i);
    return v;
}

BootstrapCI constant_ci(std::size_t n_el, std::size_t n_bins, std::vector<std::vector<double>> lowers)
{
    BootstrapCI ci;
    for (std::size_t e = 0; e < n_el; ++e) ci.electrode_ids.push_back(static_cast<std::int64_t>(e + 1));
    ci.n_bins = n_bins;
    ci.n_resamples = 10;
    for (std::size_t m = 0; m < lowers.size(); ++m) {
        ModelCi mc;
        mc.model_id = "m" + std::to_string(m);
        for (auto& split : mc.cells) split.assign(n_el * n_bins, CiCell{0.5, 0.1, 0.9});
        for (std::size_t t = 0; t < n_el * n_bins; ++t) mc.cells[1][t].lower = lowers[m][t];
        ci.models.push_back(mc);
    }
    return ci;
}

}  // namespace

TEST_CASE("resample rows are in range, sorted and reproducible")
{
    const std::size_t n = 500;
    const auto on = onsets(n);
    const auto a = make_resamples(n, 40, 17, on);
    const auto b = make_resamples(n, 40, 17, on);
    CHECK(a.indices == b.indices);
    CHECK(a.hash() == b.hash());
    CHECK(make_resamples(n, 40, 18, on).hash() != a.hash());

    double distinct = 0;
    for (std::size_t r = 0; r < a.n_resamples; ++r) {
        const auto row = a.row(r);
        CHECK(std::is_sorted(row.begin(), row.end()));
        CHECK(*std::max_element(row.begin(), row.end()) < n);
        distinct += static_cast<double>(std::set<std::uint32_t>(row.begin(), row.end()).size()) / n;
    }
    CHECK(distinct / 40.0 == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.02 / 0.632));

    // Without sorting the multiset of each row is unchanged.
    const auto u = make_resamples(n, 5, 17, on, false);
    for (std::size_t r = 0; r < 5; ++r) {
        std::vector<std::uint32_t> x(u.row(r).begin(), u.row(r).end());
        std::sort(x.begin(), x.end());
        CHECK(std::equal(x.begin(), x.end(), a.row(r).begin()));
    }
}

TEST_CASE("resample sort follows onsets rather than indices")
{
    std::vector<double> on{30, 20, 10, 10};
    const auto s = make_resamples(4, 50, 3, on);
    for (std::size_t r = 0; r < 50; ++r) {
        const auto row = s.row(r);
        for (std::size_t j = 1; j < row.size(); ++j) {
            CHECK(on[row[j - 1]] <= on[row[j]]);
            if (on[row[j - 1]] == on[row[j]]) CHECK(row[j - 1] <= row[j]);
        }
    }
    CHECK_THROWS_AS(make_resamples(5, 2, 1, on), DataError);
}

TEST_CASE("nearest-rank percentile interval")
{
    const auto flat = percentile_ci(std::vector<double>(200, 0.5));
    CHECK(flat.mean == 0.5);
    CHECK(flat.lower == 0.5);
    CHECK(flat.upper == 0.5);

    std::vector<double> seq(1000);
    std::iota(seq.begin(), seq.end(), 1.0);
    std::reverse(seq.begin(), seq.end());
    const auto ci = percentile_ci(seq);
    CHECK(ci.lower == 25.0);
    CHECK(ci.upper == 975.0);
    CHECK(ci.mean == doctest::Approx(500.5));

    std::vector<double> small{3, 1, 2};
    CHECK(percentile_ci(small).lower == 1.0);
    CHECK(percentile_ci(small).upper == 3.0);
    CHECK_THROWS_AS(percentile_ci({}), NumericalError);
}

TEST_CASE("survivors need a strictly positive validation lower bound")
{
    auto ci = constant_ci(2, 3, {{0.0, 0.2, -0.1, 0.3, 0.3, 0.3}, {0.0, 0.0, 0.0, 1e-9, 0.0, 0.0}});
    const auto mask = survivor_mask(ci);
    CHECK_FALSE(mask.at(0, 0, 0));
    CHECK(mask.at(0, 0, 1));
    CHECK(mask.count(0, 0) == 1);
    CHECK(mask.count(0, 1) == 3);
    CHECK(mask.dropped(1, 0));
    CHECK(mask.count(1, 1) == 1);
    // Test and train bounds play no part.
    for (auto& c : ci.models[1].cells[2]) c.lower = -1.0;
    CHECK(survivor_mask(ci).survives == mask.survives);
}

TEST_CASE("bootstrap intervals of a planted electrode")
{
    const Eigen::Index n = 300;
    const auto src = gaussian(1, n, 5);
    Eigen::MatrixXd y(n, 4);
    y.leftCols(2) = src * gaussian(2, 5, 2);    // electrode 1: noiseless
    y.rightCols(2) = gaussian(3, n, 2);         // electrode 2: noise
    const std::vector<ModelLayers> models{{"m", {{"m", "l0", src, false, 0}}},
                                          {"z", {{"z", "l0", gaussian(4, n, 3), false, 0}}}};
    const auto plan = make_folds(n, 5);
    const auto scores = run_regression(models, y, {1, 2}, 2, plan, RidgeConfig::log_grid());
    const auto rs = make_resamples(static_cast<std::size_t>(n), 60, 9, onsets(static_cast<std::size_t>(n)));
    const auto ci = bootstrap_scores(models, y, plan, scores, rs);
    REQUIRE(ci.models.size() == 2);
    CHECK(ci.resample_hash == rs.hash());
    for (std::size_t b = 0; b < 2; ++b) {
        CHECK(ci.at(0, Split::Validation, 0, b).lower > 0.9);
        CHECK(ci.at(0, Split::Test, 0, b).lower > 0.9);
        const auto& c = ci.at(1, Split::Validation, 1, b);
        CHECK(c.lower <= c.mean);
        CHECK(c.mean <= c.upper);
    }
    const auto mask = survivor_mask(ci);
    CHECK(mask.count(0, 0) == 2);

    const auto threaded = bootstrap_scores(models, y, plan, scores, rs, {}, 4);
    for (std::size_t m = 0; m < 2; ++m)
        for (int s = 0; s < kSplitCount; ++s)
            for (std::size_t t = 0; t < 4; ++t) {
                CHECK(threaded.models[m].cells[s][t].mean == ci.models[m].cells[s][t].mean);
                CHECK(threaded.models[m].cells[s][t].lower == ci.models[m].cells[s][t].lower);
            }

    const auto dir = fs::temp_directory_path() / "mmenc_test_bootstrap";
    fs::create_directories(dir);
    write_ci_csv(dir / "ci.csv", ci, 0xabcdef);
    const auto back = read_ci_csv(dir / "ci.csv");
    REQUIRE(back.models.size() == 2);
    CHECK(back.electrode_ids == ci.electrode_ids);
    CHECK(back.n_bins == 2);
    for (std::size_t m = 0; m < 2; ++m) {
        CHECK(back.models[m].model_id == ci.models[m].model_id);
        for (int s = 0; s < kSplitCount; ++s)
            for (std::size_t t = 0; t < 4; ++t) {
                CHECK(back.models[m].cells[s][t].mean == ci.models[m].cells[s][t].mean);
                CHECK(back.models[m].cells[s][t].upper == ci.models[m].cells[s][t].upper);
            }
    }
    write_survivors_csv(dir / "survivors.csv", mask, ci.electrode_ids, 1);
    CHECK(fs::file_size(dir / "survivors.csv") > 0);
    fs::remove_all(dir);
}

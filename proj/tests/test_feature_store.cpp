#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mmenc/error.hpp"
#include "mmenc/feature_io.hpp"
#include "mmenc/feature_store.hpp"
#include "mmenc/rng.hpp"

using namespace mmenc;
namespace fs = std::filesystem;

namespace {

Eigen::MatrixXd gaussian(std::uint64_t seed, Eigen::Index r, Eigen::Index c)
{
    const CounterRng rng(seed);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal(1, static_cast<std::uint64_t>(i * c + j));
    return m;
}

}  // namespace

TEST_CASE("JL target dimension")
{
    CHECK(jl_dimension(1000, 0.1) == 5921);
    CHECK(jl_dimension(100, 0.5) == 222);
    CHECK(jl_dimension(2, 0.5) == 34);
    CHECK(jl_dimension(200, 0.2) == 1223);
    CHECK_THROWS_AS(jl_dimension(100, 0.0), ConfigError);
    CHECK_THROWS_AS(jl_dimension(100, 1.0), ConfigError);
    CHECK_THROWS_AS(jl_dimension(1, 0.5), ConfigError);
}

TEST_CASE("projection is the identity when D does not exceed p")
{
    FeatureMatrix f{"m", "l", gaussian(3, 40, 50), false, 0};
    const auto plan = plan_projection(40, 50, 0.5, 1);
    REQUIRE(plan.is_identity());
    const auto g = sparse_projection(f, plan);
    CHECK(g.values == f.values);
    CHECK_FALSE(g.projected);
}

TEST_CASE("projection matrix entries are ternary with density 1/sqrt(D)")
{
    const ProjectionPlan plan{0.2, 400, 10000, 5};
    const auto r = projection_matrix(plan, "layer");
    const double expected = 400.0 * 10000.0 / 100.0;
    const double sd = std::sqrt(expected);
    CHECK(std::abs(static_cast<double>(r.nonzeros()) - expected) < 5 * sd);
    CHECK(r.magnitude == doctest::Approx(std::sqrt(100.0 / 400.0)));
    std::size_t positive = 0;
    for (auto s : r.signs) positive += s > 0 ? 1 : 0;
    CHECK(std::abs(static_cast<double>(positive) - r.nonzeros() / 2.0) < 5 * std::sqrt(r.nonzeros() / 4.0));
    for (std::size_t j = 0; j < r.target_dim; ++j)
        for (auto k = r.col_offsets[j] + 1; k < r.col_offsets[j + 1]; ++k) REQUIRE(r.rows[k - 1] < r.rows[k]);
}

TEST_CASE("projection matrix regenerates bit-identically and depends on layer and seed")
{
    const ProjectionPlan plan{0.2, 300, 2000, 9};
    const auto a = projection_matrix(plan, "blocks.3.attn");
    const auto b = projection_matrix(plan, "blocks.3.attn");
    CHECK(a.rows == b.rows);
    CHECK(a.signs == b.signs);
    CHECK(projection_matrix(plan, "blocks.4.attn").rows != a.rows);
    auto other = plan;
    other.seed = 10;
    CHECK(projection_matrix(other, "blocks.3.attn").rows != a.rows);
}

TEST_CASE("sparse projection equals the dense product and is linear")
{
    FeatureMatrix f1{"m", "l", gaussian(1, 30, 900), false, 0};
    FeatureMatrix f2{"m", "l", gaussian(2, 30, 900), false, 0};
    const ProjectionPlan plan{0.3, 120, 900, 4};
    const auto g1 = sparse_projection(f1, plan, 1);
    const auto dense = projection_matrix(plan, "l").dense();
    CHECK((g1.values - f1.values * dense).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sparse_projection(f1, plan, 4).values == g1.values);

    FeatureMatrix mix{"m", "l", 2.0 * f1.values - 0.5 * f2.values, false, 0};
    const auto g2 = sparse_projection(f2, plan);
    const auto gm = sparse_projection(mix, plan);
    CHECK((gm.values - (2.0 * g1.values - 0.5 * g2.values)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("non-finite features are rejected")
{
    FeatureMatrix f{"m", "l", gaussian(1, 5, 900), false, 0};
    f.values(2, 3) = std::nan("");
    CHECK_THROWS_AS(sparse_projection(f, {0.3, 100, 900, 1}), DataError);
}

TEST_CASE("standardizer uses population statistics")
{
    Eigen::MatrixXd x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    const auto s = Standardizer::fit(x);
    const auto z = s.apply(x);
    CHECK(z(0, 0) == doctest::Approx(-1.224745));
    CHECK(z(1, 0) == doctest::Approx(0.0));
    CHECK(z(2, 0) == doctest::Approx(1.224745));
    CHECK(z.col(1).cwiseAbs().maxCoeff() == 0.0);

    const auto g = gaussian(4, 50, 6);
    const auto zg = Standardizer::fit(g).apply(g);
    CHECK(zg.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("NFEA files and manifests round-trip")
{
    const auto dir = fs::temp_directory_path() / "mmenc_test_features";
    fs::create_directories(dir);
    FeatureMatrix f{"clip", "visual.3", gaussian(7, 4, 6).cast<float>().cast<double>(), true, 42};
    write_features(dir / "a.nfea", f, 0x1234);
    const auto g = read_features(dir / "a.nfea");
    CHECK(g.values == f.values);
    CHECK(g.model_id == "clip");
    CHECK(g.layer_id == "visual.3");
    CHECK(g.projected);
    CHECK(g.seed == 42);
    const auto h = read_feature_header(dir / "a.nfea");
    CHECK(h.n == 4);
    CHECK(h.dim == 6);
    CHECK(h.dtype == FeatureDtype::F32);

    {
        std::ofstream out(dir / "b.csv");
        out << "f0,f1\n1,2\n3.5,-4\n";
    }
    FeatureManifest m;
    m.entries.push_back({"clip", "visual.3", dir / "a.nfea", ModalityClass::MultimodalTrained, true});
    m.entries.push_back({"bert", "layer.1", dir / "b.csv", ModalityClass::UnimodalLanguage, false});
    write_manifest(dir / "manifest.json", m);
    const auto m2 = read_manifest(dir / "manifest.json");
    REQUIRE(m2.entries.size() == 2);
    CHECK(m2.entries[0].path == dir / "a.nfea");
    CHECK(m2.models().size() == 2);
    CHECK(m2.models()[1].modality == ModalityClass::UnimodalLanguage);
    CHECK_FALSE(m2.models()[1].trained);
    const auto csv = load_feature_entry(m2.entries[1]);
    CHECK(csv.values(1, 1) == -4.0);
    CHECK(load_feature_entry(m2.entries[0]).values == f.values);

    auto wrong = m2.entries[0];
    wrong.layer_id = "visual.4";
    CHECK_THROWS_AS(load_feature_entry(wrong), DataError);

    {
        std::ofstream out(dir / "dup.json");
        out << R"({"entries": [
          {"model_id": "a", "layer_id": "x", "path": "a.nfea", "modality_class": "UnimodalVision", "trained": true},
          {"model_id": "a", "layer_id": "x", "path": "a.nfea", "modality_class": "UnimodalVision", "trained": true}]})";
    }
    CHECK_THROWS_AS(read_manifest(dir / "dup.json"), DataError);
    {
        std::ofstream out(dir / "bad.json");
        out << R"({"entries": [{"model_id": "a", "layer_id": "x", "path": "a.nfea", "modality_class": "Telepathic", "trained": true}]})";
    }
    CHECK_THROWS_AS(read_manifest(dir / "bad.json"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("modality class helpers")
{
    CHECK(counts_as_multimodal(ModalityClass::LinearIntegration));
    CHECK_FALSE(integrates_nonlinearly(ModalityClass::LinearIntegration));
    CHECK(integrates_nonlinearly(ModalityClass::MultimodalArchitectural));
    CHECK_FALSE(counts_as_multimodal(ModalityClass::UnimodalVision));
    CHECK(parse_modality_class(to_string(ModalityClass::MultimodalTrained)) == ModalityClass::MultimodalTrained);
}

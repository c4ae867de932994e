#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "mmenc/error.hpp"
#include "mmenc/feature_io.hpp"
#include "mmenc/pipeline.hpp"
#include "mmenc/response_io.hpp"
#include "mmenc/synth.hpp"

using namespace mmenc;
namespace fs = std::filesystem;

namespace {

SynthConfig small(std::uint64_t seed)
{
    SynthConfig c;
    c.n_events = 300;
    c.electrodes_per_class = {2, 2, 2, 2, 2};
    c.seed = seed;
    return c;
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST_CASE("generation is a pure function of the config")
{
    const auto a = generate(small(3));
    const auto b = generate(small(3));
    const auto c = generate(small(4));
    for (int al = 0; al < 2; ++al) {
        CHECK(a.alignments[al].responses.values == b.alignments[al].responses.values);
        CHECK(a.alignments[al].responses.values != c.alignments[al].responses.values);
        REQUIRE(a.alignments[al].models.size() == 5);
        for (std::size_t m = 0; m < 5; ++m)
            CHECK(a.alignments[al].models[m].layers[1].values == b.alignments[al].models[m].layers[1].values);
    }
    CHECK(a.alignments[0].responses.values != a.alignments[1].responses.values);
}

TEST_CASE("layout of the generated dataset")
{
    const auto d = generate(small(1));
    REQUIRE(d.electrodes.size() == 10);
    REQUIRE(d.truth.size() == 10);
    const PlantedClass order[] = {PlantedClass::MultimodalLinear, PlantedClass::MultimodalNonlinear,
                                  PlantedClass::UnimodalLanguage, PlantedClass::UnimodalVision, PlantedClass::Noise};
    for (std::size_t e = 0; e < 10; ++e) {
        CHECK(d.truth[e].electrode_id == static_cast<std::int64_t>(e + 1));
        CHECK(d.truth[e].planted == order[e / 2]);
        CHECK(d.electrodes[e].electrode_id == d.truth[e].electrode_id);
    }
    CHECK(d.truth[2].source == "mm");
    CHECK(d.truth[4].source == "lang");
    CHECK(d.truth[6].source == "vis");
    CHECK(d.truth[9].source.empty());
    for (const auto& al : d.alignments) {
        CHECK(al.events.size() == 300);
        CHECK(al.responses.n_bins == 20);
        for (std::size_t i = 1; i < al.events.size(); ++i) CHECK(al.events[i].onset_ms > al.events[i - 1].onset_ms);
    }
    const ModelClasses classes(d.specs);
    CHECK(classes.of("mm") == ModalityClass::MultimodalArchitectural);
    CHECK(classes.of("concat") == ModalityClass::LinearIntegration);
    CHECK(classes.of("linfuse") == ModalityClass::LinearIntegration);
    for (auto p : order) CHECK(parse_planted_class(to_string(p)) == p);
}

TEST_CASE("without noise each planted electrode is best explained by its source")
{
    auto cfg = small(9);
    cfg.noise_sigma = 0.0;
    const auto d = generate(cfg);
    AnalysisParams params;
    for (int al = 0; al < 2; ++al) {
        const auto scores = regress_alignment(d.alignments[al].models, d.alignments[al].responses, params);
        for (std::size_t e = 0; e < 8; ++e) {
            const auto src = scores.model_index(d.truth[e].source);
            const double own = mean(scores.chosen_curve(src, Split::Test, e));
            CHECK(own > 0.95);
            double best_other = -1.0;
            for (std::size_t m = 0; m < scores.models.size(); ++m)
                if (m != src) best_other = std::max(best_other, mean(scores.chosen_curve(m, Split::Test, e)));
            // Linear fusion models contain the unimodal latents, so they may
            // tie with the source; nothing may beat it by more than rounding.
            CHECK(own >= best_other - 0.01);
            if (d.truth[e].planted == PlantedClass::MultimodalNonlinear) CHECK(own > best_other + 0.2);
        }
    }
}

TEST_CASE("files written for a synthetic dataset read back")
{
    const auto d = generate(small(2));
    const auto dir = fs::temp_directory_path() / "mmenc_test_synth";
    fs::remove_all(dir);
    const auto paths = write_synth(dir, d, 0x42);
    const auto truth = read_truth_csv(paths.truth);
    REQUIRE(truth.size() == d.truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        CHECK(truth[i].electrode_id == d.truth[i].electrode_id);
        CHECK(truth[i].planted == d.truth[i].planted);
        CHECK(truth[i].source == d.truth[i].source);
        CHECK(truth[i].weights[0] == d.truth[i].weights[0]);
        CHECK(truth[i].weights[1] == d.truth[i].weights[1]);
    }
    for (int al = 0; al < 2; ++al) {
        const auto manifest = read_manifest(paths.manifests[al]);
        CHECK(manifest.models().size() == 5);
        const auto* entry = manifest.layers_of("mm").back();
        const auto f = load_feature_entry(*entry);
        // Features are stored in single precision.
        const auto& want = d.alignments[al].models[2].layers[1].values;
        CHECK(f.values.rows() == want.rows());
        CHECK((f.values - want).cwiseAbs().maxCoeff() <= 1e-6 * want.cwiseAbs().maxCoeff());
        CHECK(fs::exists(paths.events[al]));
        CHECK(fs::exists(paths.responses[al]));
    }
    fs::remove_all(dir);
}

TEST_CASE("recovery report counts planted classes")
{
    const auto d = generate(small(5));
    TestSuite suite;
    for (const auto& t : d.truth)
        for (auto test : kAllTests) {
            TestOutcome o;
            o.electrode_id = t.electrode_id;
            o.test = test;
            const bool nonlinear = t.planted == PlantedClass::MultimodalNonlinear;
            const bool linear = t.planted == PlantedClass::MultimodalLinear;
            o.pass = test == TestId::NonlinearIntegration ? nonlinear : (nonlinear || linear);
            suite.outcomes.push_back(o);
        }
    const auto r = oracle_recovery_report(suite, d.truth);
    CHECK(r.strict_sensitivity == 1.0);
    CHECK(r.nonlinear_sensitivity == 1.0);
    CHECK(r.nonlinear_false_positive == 0.0);
    CHECK(r.linear_strict_not_nonlinear == 1.0);
    CHECK(r.weak_false_positive == 0.0);
    CHECK(r.totals[static_cast<std::size_t>(PlantedClass::Noise)] == 2);
    CHECK(r.to_json().find("strict_sensitivity") != std::string::npos);
}

TEST_CASE("invalid synthetic configs are rejected")
{
    auto c = small(1);
    c.n_events = 10;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small(1);
    c.noise_sigma = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

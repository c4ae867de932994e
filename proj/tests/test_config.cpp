#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mmenc/config.hpp"
#include "mmenc/error.hpp"

using namespace mmenc;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const std::string& name, const std::string& text)
{
    const auto dir = fs::temp_directory_path() / "mmenc_test_config";
    fs::create_directories(dir);
    std::ofstream(dir / name) << text;
    return dir / name;
}

}  // namespace

TEST_CASE("defaults and flag overrides")
{
    const auto c = load_config(std::nullopt, {{"seed", "11"}, {"B", "250"}, {"alpha", "0.1"}, {"sort_by_onset", "false"}});
    CHECK(c.require_seed() == 11);
    CHECK(c.b == 250);
    CHECK(c.b2 == 1000);
    CHECK(c.alpha == 0.1);
    CHECK_FALSE(c.sort_by_onset);
    CHECK(c.k_folds == 5);
    CHECK(c.min_bins == 10);
}

TEST_CASE("file values, relative paths and flag precedence")
{
    const auto file = write_file("a.json", R"({"seed": 5, "B2": 300, "window_ms": 675,
        "language_events": "data/lang.csv", "contrasts": [{"name": "trained", "first": "x", "second": "y"}]})");
    const auto c = load_config(file, {{"B2", "400"}, {"vision_events", "rel/vis.csv"}});
    CHECK(c.b2 == 400);
    CHECK(c.window.window_ms == 675.0);
    CHECK(c.alignments[0].events == file.parent_path() / "data/lang.csv");
    CHECK(c.alignments[1].events == (fs::current_path() / "rel/vis.csv").lexically_normal());
    REQUIRE(c.contrasts.size() == 1);
    CHECK(c.contrasts[0].name == "trained");

    const auto f = load_config(std::nullopt, {{"seed", "1"}, {"contrasts", "rand=a:b,c:d"}});
    REQUIRE(f.contrasts.size() == 2);
    CHECK(f.contrasts[0].name == "rand");
    CHECK(f.contrasts[1].name == "c_vs_d");
    CHECK_THROWS_AS(load_config(std::nullopt, {{"contrasts", "ab"}}), ConfigError);
}

TEST_CASE("type conflicts name both sources")
{
    const auto file = write_file("b.json", R"({"seed": 5, "B": 200})");
    try {
        load_config(file, {{"B", "many"}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("--B=many") != std::string::npos);
        CHECK(msg.find(file.string()) != std::string::npos);
    }
    const auto bad = write_file("c.json", R"({"B": "lots"})");
    try {
        load_config(bad, {});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("'B'") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config(std::nullopt, {{"no_such_key", "1"}}), ConfigError);
    CHECK_THROWS_AS(load_config(write_file("d.json", R"({"mystery": 1})"), {}), ConfigError);
    CHECK_THROWS_AS(load_config(write_file("e.json", "[1, 2]"), {}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {{"alpha", "1.5"}}), ConfigError);
}

TEST_CASE("seed is mandatory")
{
    const auto c = load_config(std::nullopt, {});
    CHECK_FALSE(c.seed.has_value());
    CHECK_THROWS_AS(c.require_seed(), ConfigError);
}

TEST_CASE("hash tracks analysis settings only")
{
    const auto base = load_config(std::nullopt, {{"seed", "3"}});
    const auto moved = load_config(std::nullopt, {{"seed", "3"}, {"threads", "8"}, {"out_dir", "/tmp/elsewhere"},
                                                   {"language_events", "/x/y.csv"}});
    CHECK(base.hash() == moved.hash());
    CHECK(base.hash() != load_config(std::nullopt, {{"seed", "4"}}).hash());
    CHECK(base.hash() != load_config(std::nullopt, {{"seed", "3"}, {"B", "999"}}).hash());
}

TEST_CASE("written config reloads to the same settings")
{
    const auto c = load_config(std::nullopt, {{"seed", "21"}, {"B", "123"}, {"contrasts", "k=a:b"}, {"synth_noise_sigma", "0.5"}});
    const auto path = fs::temp_directory_path() / "mmenc_test_config" / "round.json";
    write_config(path, c);
    const auto back = load_config(path, {});
    CHECK(back.hash() == c.hash());
    CHECK(back.b == 123);
    CHECK(back.contrasts.size() == 1);
    CHECK(back.synth.noise_sigma == 0.5);
    CHECK(back.to_json(false) == c.to_json(false));
}

TEST_CASE("every key is documented")
{
    const auto& keys = config_keys();
    CHECK(keys.size() > 30);
    for (const auto& k : keys) {
        CHECK_FALSE(k.help.empty());
        CHECK_FALSE(k.type.empty());
    }
}

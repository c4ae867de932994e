#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "mmenc/error.hpp"
#include "mmenc/event_model.hpp"
#include "mmenc/response_io.hpp"

using namespace mmenc;
namespace fs = std::filesystem;

namespace {

RawSignal ramp(std::size_t n, double rate = 2000.0)
{
    RawSignal s{1, std::vector<double>(n), rate};
    std::iota(s.samples.begin(), s.samples.end(), 0.0);
    return s;
}

EventStructure event(std::int64_t id, double onset)
{
    return {id, onset, "t", "i.png", Alignment::LanguageAligned};
}

ResponseTensor small_tensor(std::size_t n_el, std::size_t n_ev, std::size_t n_bins)
{
    ResponseTensor t;
    for (std::size_t e = 0; e < n_el; ++e)
        t.electrodes.push_back({static_cast<std::int64_t>(e + 10), 1, "superiortemporal", std::nullopt});
    t.n_events = n_ev;
    t.n_bins = n_bins;
    t.bin_centers_ms.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) t.bin_centers_ms[b] = 25.0 * static_cast<double>(b);
    t.values.resize(n_el * n_ev * n_bins);
    for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = 0.25 * static_cast<double>(i % 17) - 1.0;
    return t;
}

}  // namespace

TEST_CASE("bin counts follow the floor formula")
{
    CHECK(bin_count({4000, 200, 25}) == 153);
    CHECK(bin_count({200, 200, 25}) == 1);
    CHECK(bin_count({400, 200, 100}) == 3);
    CHECK(bin_count({0.3, 0.1, 0.1}) == 3);
    CHECK_THROWS_AS(bin_count({100, 200, 25}), ConfigError);
    CHECK_THROWS_AS(bin_count({4000, 200, 0}), ConfigError);
}

TEST_CASE("bin centres step by the stride")
{
    const auto c = bin_centers_ms({4000, 200, 25});
    REQUIRE(c.size() == 153);
    CHECK(c.front() == doctest::Approx(-1900.0));
    for (std::size_t b = 1; b < c.size(); ++b) CHECK(c[b] - c[b - 1] == doctest::Approx(25.0));
}

TEST_CASE("ramp signal gives the arithmetic mean of each sub-window")
{
    const auto sig = ramp(20000);
    const std::vector<EventStructure> events{event(0, 2000.0)};
    const auto slice = extract_response(sig, events, {});
    REQUIRE(slice.kept.size() == 1);
    REQUIRE(slice.values.size() == 153);
    CHECK(slice.values[0] == doctest::Approx(199.5));
    // Bin b starts 50 samples later than bin b-1 at 2 kHz.
    CHECK(slice.values[1] == doctest::Approx(249.5));
    CHECK(slice.values[152] == doctest::Approx(199.5 + 152 * 50));
}

TEST_CASE("constant signal maps to the constant in every bin")
{
    RawSignal sig{1, std::vector<double>(12000, 3.25), 2000.0};
    const std::vector<EventStructure> events{event(0, 2500.0), event(1, 3000.0)};
    const auto slice = extract_response(sig, events, {});
    for (double v : slice.values) CHECK(v == 3.25);
}

TEST_CASE("windows past the recording edge are dropped with a reason")
{
    const auto sig = ramp(9000);  // 4.5 s
    const std::vector<EventStructure> events{event(0, 1000.0), event(1, 2000.0), event(2, 2600.0)};
    const auto slice = extract_response(sig, events, {});
    REQUIRE(slice.kept == std::vector<std::size_t>{1});
    REQUIRE(slice.rejected.size() == 2);
    CHECK(slice.rejected[0].event_id == 0);
    CHECK(slice.rejected[0].reason.find("exceeds recording") != std::string::npos);
}

TEST_CASE("mean-bin linearity")
{
    auto sig = ramp(20000);
    for (std::size_t i = 0; i < sig.samples.size(); ++i) sig.samples[i] = std::sin(0.001 * static_cast<double>(i) * i);
    auto scaled = sig;
    for (auto& v : scaled.samples) v = -2.5 * v + 0.75;
    const std::vector<EventStructure> events{event(0, 2500.0), event(1, 6000.0)};
    const auto a = extract_response(sig, events, {});
    const auto b = extract_response(scaled, events, {});
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(b.values[i] - (-2.5 * a.values[i] + 0.75)) < 1e-12);
}

TEST_CASE("window lengths must be whole samples")
{
    CHECK_THROWS_AS(WindowSpec({4000, 200, 25}).validate_for_rate(30.0), ConfigError);
    CHECK_NOTHROW(WindowSpec({4000, 200, 25}).validate_for_rate(2000.0));
}

TEST_CASE("an event is kept only if every electrode kept it")
{
    std::vector<RawSignal> signals{ramp(20000), ramp(9000)};
    signals[1].electrode_id = 2;
    const std::vector<ElectrodeMeta> meta{{1, 1, "insula", std::nullopt}, {2, 1, "insula", std::nullopt}};
    const std::vector<EventStructure> events{event(0, 2000.0), event(1, 5000.0)};
    for (unsigned threads : {1u, 2u}) {
        const auto ds = extract_dataset(signals, meta, events, {}, threads);
        REQUIRE(ds.events.size() == 1);
        CHECK(ds.events[0].event_id == 0);
        CHECK(ds.responses.n_events == 1);
        CHECK(ds.responses.n_electrodes() == 2);
        CHECK(ds.responses.at(1, 0, 0) == doctest::Approx(199.5));
        CHECK(validate_dataset(ds.events, ds.responses).ok());
    }
}

TEST_CASE("dataset validation reports each violation")
{
    auto t = small_tensor(2, 3, 4);
    std::vector<EventStructure> events{event(0, 10), event(1, 20), event(2, 30)};
    CHECK(validate_dataset(events, t).ok());

    auto dup = t;
    dup.electrodes[1].electrode_id = dup.electrodes[0].electrode_id;
    const auto r1 = validate_dataset(events, dup);
    REQUIRE_FALSE(r1.ok());
    CHECK(r1.violations[0].rfind("duplicate electrode", 0) == 0);

    auto swapped = events;
    std::swap(swapped[1].onset_ms, swapped[2].onset_ms);
    const auto r2 = validate_dataset(swapped, t);
    REQUIRE_FALSE(r2.ok());
    CHECK(r2.violations[0].rfind("non-monotone onsets", 0) == 0);

    auto mixed = events;
    mixed[2].alignment = Alignment::VisionAligned;
    CHECK_FALSE(validate_dataset(mixed, t).ok());

    auto negative = events;
    negative[0].onset_ms = -5;
    CHECK_FALSE(validate_dataset(negative, t).ok());

    auto nan = t;
    nan.values[3] = std::nan("");
    CHECK_FALSE(validate_dataset(events, nan).ok());

    events.pop_back();
    CHECK_FALSE(validate_dataset(events, t).ok());
}

TEST_CASE("target matrix layout is event by electrode-major bins")
{
    const auto t = small_tensor(2, 3, 4);
    const auto y = t.target_matrix();
    REQUIRE(y.rows() == 3);
    REQUIRE(y.cols() == 8);
    CHECK(y(2, 1 * 4 + 3) == t.at(1, 2, 3));
}

TEST_CASE("event, electrode and response files round-trip")
{
    const auto dir = fs::temp_directory_path() / "mmenc_test_event_model";
    fs::create_directories(dir);
    std::vector<EventStructure> events{event(0, 10.5), {1, 20.25, "a, \"quoted\" word", "f.png", Alignment::LanguageAligned}};
    write_events_csv(dir / "events.csv", events);
    const auto ev2 = read_events_csv(dir / "events.csv");
    REQUIRE(ev2.size() == 2);
    CHECK(ev2[1].text == events[1].text);
    CHECK(ev2[1].onset_ms == 20.25);

    std::vector<ElectrodeMeta> meta{{3, 7, "insula", std::array<double, 3>{1.5, -2.0, 3.0}}, {4, 7, "precuneus", std::nullopt}};
    write_electrodes_csv(dir / "el.csv", meta);
    const auto m2 = read_electrodes_csv(dir / "el.csv");
    REQUIRE(m2.size() == 2);
    CHECK(m2[0].coordinates.has_value());
    CHECK((*m2[0].coordinates)[1] == -2.0);
    CHECK_FALSE(m2[1].coordinates.has_value());

    const auto t = small_tensor(2, 3, 4);
    write_responses(dir / "r.nrsp", t, 0xabcdefull);
    std::uint64_t hash = 0;
    const auto t2 = read_responses(dir / "r.nrsp", &hash);
    CHECK(hash == 0xabcdefull);
    CHECK(t2.values == t.values);  // values are exactly representable in f32
    CHECK(t2.electrodes[1].region_label == "superiortemporal");
    write_responses_csv(dir / "r.csv", t);
    CHECK(load_responses(dir / "r.csv").values == t.values);

    std::vector<RawSignal> sigs{ramp(100), ramp(100)};
    sigs[1].electrode_id = 9;
    write_signals(dir / "s.nsig", sigs);
    const auto s2 = read_signals(dir / "s.nsig");
    REQUIRE(s2.size() == 2);
    CHECK(s2[1].electrode_id == 9);
    CHECK(s2[0].samples[99] == 99.0);
    fs::remove_all(dir);
}

TEST_CASE("region labels")
{
    CHECK(default_dkt_labels().size() == 31);
    CHECK(std::find(default_dkt_labels().begin(), default_dkt_labels().end(), "superiortemporal") !=
          default_dkt_labels().end());
}

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmenc/comparison.hpp"
#include "mmenc/event_model.hpp"
#include "mmenc/model_spec.hpp"

namespace mmenc {

enum class TestId
{
    Weak,
    WeakSLIP,
    Strict,
    StrictSLIP,
    NonlinearIntegration
};
inline constexpr std::size_t kTestCount = 5;
inline constexpr std::array<TestId, kTestCount> kAllTests{TestId::Weak, TestId::WeakSLIP, TestId::Strict,
                                                          TestId::StrictSLIP, TestId::NonlinearIntegration};

std::string_view to_string(TestId t);
std::string_view display_name(TestId t);
TestId parse_test_id(std::string_view s);

/// Per-alignment flags index 0 = language-aligned, 1 = vision-aligned. For the
/// strict tests they hold the underlying weak result in that alignment, and
/// `pass` requires both. `evaluated` is false for nonlinear-integration rows
/// of electrodes that did not pass the strict test.
struct TestOutcome
{
    std::int64_t electrode_id = 0;
    TestId test = TestId::Weak;
    std::array<bool, 2> alignment_pass{false, false};
    bool pass = false;
    bool evaluated = true;
    std::string support;  // winning model per alignment, "lang|vis"
};

/// Looks up modality classes by model id.
class ModelClasses
{
public:
    explicit ModelClasses(std::span<const ModelSpec> specs) : specs_(specs.begin(), specs.end()) {}
    ModalityClass of(std::string_view model_id) const;
    std::vector<std::string> with_class(bool (*pred)(ModalityClass)) const;
    const std::vector<ModelSpec>& specs() const { return specs_; }

private:
    std::vector<ModelSpec> specs_;
};

/// Weak test in one alignment: the winner counts as multimodal and was either
/// the default winner or significant after FDR.
bool weak_pass(const ComparisonVerdict& battery_verdict, const ModelClasses& classes);

/// SLIP contrast in one alignment: the multimodal member of the pair wins.
bool slip_pass(const ComparisonVerdict& pair_verdict, std::string_view multimodal_id);

/// Everything the tests need from one alignment.
struct AlignmentEvidence
{
    const BootstrapCI* ci = nullptr;
    const SurvivorMask* mask = nullptr;
    const ScoreTensor* scores = nullptr;
    std::vector<ComparisonVerdict> battery;  // full battery, one per electrode
    std::vector<ComparisonVerdict> slip;     // SLIP pair, one per electrode
};

struct SlipPair
{
    std::string multimodal;
    std::string unimodal;
};

/// Pairwise verdicts produced for the nonlinear-integration test, kept for
/// export: candidate vs each linear-integration model.
struct NonlinearEvidence
{
    std::array<std::vector<ComparisonVerdict>, 2> pairs;  // per alignment, FDR-adjusted within the alignment
};

/// Candidate for the nonlinear test: the best-ranked surviving model whose
/// class integrates nonlinearly.
std::optional<std::size_t> nonlinear_candidate(const BootstrapCI& ci, const SurvivorMask& mask, std::size_t electrode,
                                               const ModelClasses& classes);

struct TestSuite
{
    std::vector<TestOutcome> outcomes;  // electrode-major, kAllTests order
    NonlinearEvidence nonlinear;

    const TestOutcome& at(std::size_t electrode, TestId t) const
    {
        return outcomes[electrode * kTestCount + static_cast<std::size_t>(t)];
    }
};

/// All five tests. Both alignments must cover the same electrodes in the same
/// order. Throws ConfigError when the SLIP pair or the linear-integration
/// models are missing from the battery.
TestSuite run_tests(const AlignmentEvidence& language, const AlignmentEvidence& vision, const ModelClasses& classes,
                    const SlipPair& slip, const ComparisonConfig& config);

struct RegionSummary
{
    std::string region;
    std::size_t n_electrodes = 0;
    std::array<std::array<std::size_t, 3>, kTestCount> counts{};  // [test][language, vision, combined]
    bool both_alignments = false;  // some electrode passes the weak test in both alignments

    double percent(TestId t, std::size_t column) const
    {
        return n_electrodes == 0 ? 0.0
                                 : 100.0 * static_cast<double>(counts[static_cast<std::size_t>(t)][column]) /
                                       static_cast<double>(n_electrodes);
    }
    bool no_multimodal() const { return counts[static_cast<std::size_t>(TestId::Weak)][2] == 0; }
};

/// One row per region that has electrodes, sorted by label. Throws DataError
/// naming every electrode whose label is not in `known_labels`.
std::vector<RegionSummary> aggregate_regions(const TestSuite& suite, std::span<const ElectrodeMeta> electrodes,
                                             std::span<const std::string> known_labels);

void write_outcomes_csv(const std::filesystem::path& path, const TestSuite& suite,
                        std::span<const ElectrodeMeta> electrodes, std::uint64_t config_hash);
TestSuite read_outcomes_csv(const std::filesystem::path& path);
void write_regions_csv(const std::filesystem::path& path, std::span<const RegionSummary> regions,
                       std::uint64_t config_hash);

/// Plain-text table of pass counts per test and alignment plus the passing
/// electrodes of each test.
std::string format_test_table(const TestSuite& suite, std::size_t n_electrodes, std::uint64_t config_hash);

}  // namespace mmenc

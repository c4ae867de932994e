#pragma once

#include <cstdint>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmenc/bootstrap.hpp"
#include "mmenc/event_model.hpp"
#include "mmenc/regression.hpp"

namespace mmenc {

enum class VerdictKind
{
    DefaultWinner,
    BootstrapWin,
    NoDecision
};

std::string_view to_string(VerdictKind k);
VerdictKind parse_verdict_kind(std::string_view s);

/// Outcome of one electrode's comparison. A NoDecision verdict may still name
/// the top two models when their difference was tested but not significant.
struct ComparisonVerdict
{
    std::int64_t electrode_id = 0;
    std::string winner;
    std::string runner_up;
    double diff = std::numeric_limits<double>::quiet_NaN();
    double p_raw = std::numeric_limits<double>::quiet_NaN();
    double p_adj = std::numeric_limits<double>::quiet_NaN();
    std::size_t shared_bins = 0;
    VerdictKind kind = VerdictKind::NoDecision;

    bool decided() const { return kind != VerdictKind::NoDecision; }
    bool tested() const { return !std::isnan(p_raw); }
};

struct ComparisonConfig
{
    double alpha = 0.05;
    std::size_t min_bins = 10;
    std::size_t b2 = 1000;
    std::uint64_t seed = 0;
};

/// Indices into `ci.models` of the models with at least one surviving bin at
/// `electrode`, best first by mean validation CI mean over surviving bins.
/// Equal means fall back to model_id order. `subset` restricts the battery
/// (all models when empty).
std::vector<std::size_t> rank_models(const BootstrapCI& ci, const SurvivorMask& mask, std::size_t electrode,
                                     std::span<const std::size_t> subset = {});

std::optional<std::size_t> default_winner(const SurvivorMask& mask, std::size_t electrode, std::size_t min_bins = 10,
                                          std::span<const std::size_t> subset = {});

struct TimebinResult
{
    double diff = 0.0;  // observed mean(top) - mean(second) over the shared bins
    double p = 1.0;
};

/// One-sided Monte-Carlo test over bins: resample `shared_bins` with
/// replacement b2 times and count differences <= 0.
/// p = (1 + count) / (b2 + 1).
TimebinResult timebin_bootstrap(std::span<const double> top, std::span<const double> second,
                                std::span<const std::size_t> shared_bins, std::size_t b2, std::uint64_t seed,
                                std::uint64_t stream);

struct FdrResult
{
    std::vector<double> adjusted;
    std::vector<bool> rejected;
};

/// Benjamini-Hochberg step-up. Rejects the k smallest p-values for the largest
/// k with p_(k) <= k alpha / m; adjusted values are the running minimum of
/// m p_(i) / i from the top, capped at 1.
FdrResult fdr_adjust(std::span<const double> p, double alpha = 0.05);

/// Verdicts for every electrode over one battery of models (indices into
/// `ci.models`), FDR-corrected across the electrodes that reached the bin test.
/// `test_key` names the battery; it seeds the bin resampling together with the
/// electrode id, so a given top-2 pair always sees the same resamples.
std::vector<ComparisonVerdict> compare_battery(const BootstrapCI& ci, const SurvivorMask& mask,
                                               const ScoreTensor& scores, std::span<const std::size_t> subset,
                                               std::string_view test_key, const ComparisonConfig& config);

/// Single electrode before FDR (p_adj left empty).
ComparisonVerdict compare_electrode(const BootstrapCI& ci, const SurvivorMask& mask, const ScoreTensor& scores,
                                    std::size_t electrode, std::span<const std::size_t> subset,
                                    std::string_view test_key, const ComparisonConfig& config);

/// Apply BH across the tested verdicts and promote significant ones.
void apply_fdr(std::vector<ComparisonVerdict>& verdicts, double alpha);

void write_verdicts_csv(const std::filesystem::path& path, std::span<const ComparisonVerdict> verdicts,
                        std::span<const ElectrodeMeta> electrodes, std::uint64_t config_hash);
std::vector<ComparisonVerdict> read_verdicts_csv(const std::filesystem::path& path);

}  // namespace mmenc

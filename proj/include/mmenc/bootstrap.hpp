#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mmenc/folds.hpp"
#include "mmenc/regression.hpp"

namespace mmenc {

/// B rows of event indices drawn with replacement. Row r, position j is a pure
/// function of (seed, r, j); rows are then sorted by onset so duplicated events
/// stay adjacent and contiguous splits stay contiguous in movie time.
struct ResampleSet
{
    std::size_t n_events = 0;
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;
    bool sorted = true;
    std::vector<std::uint32_t> indices;  // [row][position]

    std::span<const std::uint32_t> row(std::size_t r) const
    {
        return std::span<const std::uint32_t>(indices).subspan(r * n_events, n_events);
    }
    /// Digest over every index; equal digests mean identical resamples.
    std::uint64_t hash() const;
};

ResampleSet make_resamples(std::size_t n_events, std::size_t n_resamples, std::uint64_t seed,
                           std::span<const double> onsets_ms, bool sort_by_onset = true);

struct CiCell
{
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Mean and nearest-rank 2.5% / 97.5% order statistics (1-based ranks
/// ceil(0.025 B) and ceil(0.975 B)).
CiCell percentile_ci(std::vector<double> samples);

struct ModelCi
{
    std::string model_id;
    std::array<std::vector<CiCell>, kSplitCount> cells;  // [split][electrode * n_bins + bin]
    std::size_t failed_resamples = 0;
};

struct BootstrapCI
{
    std::vector<std::int64_t> electrode_ids;
    std::size_t n_bins = 0;
    std::size_t n_resamples = 0;
    std::uint64_t resample_hash = 0;
    std::vector<ModelCi> models;

    std::size_t n_electrodes() const { return electrode_ids.size(); }
    std::size_t model_index(const std::string& id) const;
    const CiCell& at(std::size_t model, Split split, std::size_t electrode, std::size_t bin) const
    {
        return models[model].cells[static_cast<int>(split)][electrode * n_bins + bin];
    }
};

struct BootstrapConfig
{
    double max_failure_fraction = 0.01;
    double rcond_tolerance = 1e-12;
};

/// Re-runs the fold regressions on every resampled dataset, reusing the lambda
/// and layer each (model, electrode) was assigned by `selections`.
/// `models` must be in the same order as `selections.models`.
BootstrapCI bootstrap_scores(const std::vector<ModelLayers>& models, const Eigen::MatrixXd& targets,
                             const FoldPlan& plan, const ScoreTensor& selections, const ResampleSet& resamples,
                             const BootstrapConfig& config = {}, unsigned threads = 1);

/// Survivor bins: validation lower95 strictly above zero.
struct SurvivorMask
{
    std::vector<std::string> model_ids;
    std::size_t n_electrodes = 0;
    std::size_t n_bins = 0;
    std::vector<std::uint8_t> survives;  // [model][electrode][bin]

    bool at(std::size_t m, std::size_t e, std::size_t b) const { return survives[(m * n_electrodes + e) * n_bins + b] != 0; }
    std::size_t count(std::size_t m, std::size_t e) const;
    /// A model is dropped from an electrode when no bin survives.
    bool dropped(std::size_t m, std::size_t e) const { return count(m, e) == 0; }
};

SurvivorMask survivor_mask(const BootstrapCI& ci);

// CSV interchange. The CI file carries no resample metadata; that lives in the
// JSON sidecar written by the pipeline.
void write_ci_csv(const std::filesystem::path& path, const BootstrapCI& ci, std::uint64_t config_hash);
BootstrapCI read_ci_csv(const std::filesystem::path& path);
void write_survivors_csv(const std::filesystem::path& path, const SurvivorMask& mask,
                         std::span<const std::int64_t> electrode_ids, std::uint64_t config_hash);

}  // namespace mmenc

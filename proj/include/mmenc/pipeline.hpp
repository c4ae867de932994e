#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mmenc/bootstrap.hpp"
#include "mmenc/comparison.hpp"
#include "mmenc/config.hpp"
#include "mmenc/feature_io.hpp"
#include "mmenc/multimodality.hpp"
#include "mmenc/regression.hpp"
#include "mmenc/synth.hpp"

namespace mmenc {

inline constexpr const char* kEngineVersion = "0.1.0";

/// Analysis settings shared by the in-memory and file-based paths.
struct AnalysisParams
{
    int k_folds = 5;
    RidgeConfig ridge = RidgeConfig::log_grid();
    std::size_t b = 1000;
    bool sort_by_onset = true;
    BootstrapConfig bootstrap;
    ComparisonConfig compare;
    unsigned threads = 1;

    static AnalysisParams from(const RunConfig& config);
};

struct AlignmentAnalysis
{
    ScoreTensor scores;
    BootstrapCI ci;
    SurvivorMask mask;
    std::vector<ComparisonVerdict> battery;
    std::vector<ComparisonVerdict> slip;
    std::map<std::string, std::vector<ComparisonVerdict>> contrasts;

    AlignmentEvidence evidence() const { return {&ci, &mask, &scores, battery, slip}; }
};

ScoreTensor regress_alignment(const std::vector<ModelLayers>& models, const ResponseTensor& responses,
                              const AnalysisParams& params);

BootstrapCI bootstrap_alignment(const std::vector<ModelLayers>& models, const ResponseTensor& responses,
                                const std::vector<EventStructure>& events, const ScoreTensor& scores,
                                const AnalysisParams& params, std::uint64_t seed);

/// Indices into `ci.models` of a named pair; ConfigError if either is absent.
std::vector<std::size_t> pair_subset(const BootstrapCI& ci, const std::string& first, const std::string& second);

/// Battery, SLIP pair and extra contrasts for one alignment.
void compare_alignment(AlignmentAnalysis& analysis, const SlipPair& slip, const std::vector<Contrast>& contrasts,
                       const ComparisonConfig& config);

/// Regression, bootstrap and comparisons on in-memory data.
AlignmentAnalysis analyze_alignment(const std::vector<ModelLayers>& models, const ResponseTensor& responses,
                                    const std::vector<EventStructure>& events, const AnalysisParams& params,
                                    std::uint64_t seed, const SlipPair& slip,
                                    const std::vector<Contrast>& contrasts = {});

struct SynthRun
{
    std::array<AlignmentAnalysis, 2> alignments;
    TestSuite suite;
    RecoveryReport recovery;
};

/// Whole pipeline on a generated dataset without touching the filesystem.
SynthRun analyze_synth(const SynthDataset& data, const AnalysisParams& params, std::uint64_t seed,
                       const SlipPair& slip);

// File-based stages. Each reads its predecessors' artifacts from
// config.out_dir and throws StageOrderError when one is missing.
void stage_ingest(const RunConfig& config);
void stage_regress(const RunConfig& config);
void stage_bootstrap(const RunConfig& config);
void stage_compare(const RunConfig& config);
void stage_tests(const RunConfig& config);
void stage_report(const RunConfig& config);
/// Generates a synthetic dataset under out_dir/synth and writes a run config
/// pointing at it; returns that config's path.
std::filesystem::path stage_synth(const RunConfig& config);
void run_all(const RunConfig& config);

/// Analytic oracles (ridge, Pearson, BH, JL). Prints one line per check.
bool selfcheck(std::ostream& out);

}  // namespace mmenc

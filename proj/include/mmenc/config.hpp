#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmenc/event_model.hpp"
#include "mmenc/synth.hpp"

namespace mmenc {

/// Input files of one dataset alignment. Responses come either as a
/// precomputed tensor or as raw signals windowed during ingest.
struct AlignmentPaths
{
    std::filesystem::path events;
    std::filesystem::path responses;
    std::filesystem::path signals;
    std::filesystem::path features;  // model manifest
};

/// A named pairwise comparison run alongside the battery (e.g. trained vs
/// randomly initialised variants of one network).
struct Contrast
{
    std::string name;
    std::string first;
    std::string second;
};

struct RunConfig
{
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::filesystem::path out_dir = "mmenc_out";

    WindowSpec window;
    double lambda_min = 0.1;
    double lambda_max = 1e6;
    int lambda_count = 8;
    int k_folds = 5;
    double epsilon = 0.1;

    std::size_t b = 1000;
    std::size_t b2 = 1000;
    bool sort_by_onset = true;
    double max_failure_fraction = 0.01;

    double alpha = 0.05;
    std::size_t min_bins = 10;
    std::string slip_multimodal;
    std::string slip_unimodal;
    std::vector<Contrast> contrasts;

    std::filesystem::path electrodes;
    std::filesystem::path dkt_labels;
    std::filesystem::path ground_truth;
    std::array<AlignmentPaths, 2> alignments;  // language, vision

    SynthConfig synth;

    /// Seed or ConfigError: there is no wall-clock fallback.
    std::uint64_t require_seed() const;

    /// FNV-1a over the canonical JSON of every analysis setting. Paths,
    /// the output directory and the thread count do not enter the hash.
    std::uint64_t hash() const;

    /// Canonical JSON (flat keys, sorted).
    std::string to_json(bool include_paths = true) const;
};

/// Every key accepted in the config file and as a --flag of the same name.
struct ConfigKey
{
    std::string name;
    std::string type;  // "int", "uint", "float", "bool", "string", "path", "contrasts"
    std::string help;
};
const std::vector<ConfigKey>& config_keys();

/// Builds the effective configuration from an optional JSON file and flag
/// overrides (key -> raw text). Relative paths in the file resolve against its
/// directory; relative paths from flags resolve against the working directory.
/// Unknown keys, malformed values and type conflicts between the two sources
/// throw ConfigError naming both.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::map<std::string, std::string>& overrides);

void write_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace mmenc

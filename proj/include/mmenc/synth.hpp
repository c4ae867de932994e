#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mmenc/event_model.hpp"
#include "mmenc/feature_io.hpp"
#include "mmenc/multimodality.hpp"
#include "mmenc/regression.hpp"

namespace mmenc {

enum class PlantedClass
{
    MultimodalLinear,
    MultimodalNonlinear,
    UnimodalLanguage,
    UnimodalVision,
    Noise
};
inline constexpr std::size_t kPlantedClassCount = 5;
std::string_view to_string(PlantedClass c);
PlantedClass parse_planted_class(std::string_view s);

struct SynthConfig
{
    std::size_t n_events = 1000;
    std::array<std::size_t, kPlantedClassCount> electrodes_per_class{10, 10, 10, 10, 10};
    std::size_t latent_dim = 16;       // L and V
    std::size_t interaction_dim = 16;  // M
    std::size_t fused_dim = 8;         // linear fusion model
    double noise_sigma = 0.31622776601683794;  // unit-variance signal at peak gain, SNR 10
    double layer_noise = 1.0;          // additive noise on the shallow layer of every model
    WindowSpec window{675.0, 200.0, 25.0};
    std::uint64_t seed = 0;

    void validate() const;
};

/// Model ids emitted by the generator.
namespace synth_models {
inline constexpr std::string_view kLanguage = "lang";
inline constexpr std::string_view kVision = "vis";
inline constexpr std::string_view kMultimodal = "mm";
inline constexpr std::string_view kConcat = "concat";
inline constexpr std::string_view kFused = "linfuse";
}  // namespace synth_models

struct SynthTruth
{
    std::int64_t electrode_id = 0;
    PlantedClass planted = PlantedClass::Noise;
    std::string source;                      // generating model id, empty for noise
    std::array<std::vector<double>, 2> weights;  // per alignment
};

struct SynthAlignment
{
    Alignment alignment = Alignment::LanguageAligned;
    std::vector<EventStructure> events;
    std::vector<ModelLayers> models;
    ResponseTensor responses;
};

struct SynthDataset
{
    std::vector<ModelSpec> specs;
    std::vector<ElectrodeMeta> electrodes;
    std::array<SynthAlignment, 2> alignments;  // language, vision
    std::vector<SynthTruth> truth;
};

SynthDataset generate(const SynthConfig& config);

struct SynthPaths
{
    std::filesystem::path electrodes;
    std::filesystem::path truth;
    std::array<std::filesystem::path, 2> events;
    std::array<std::filesystem::path, 2> responses;
    std::array<std::filesystem::path, 2> manifests;
};

/// NFEA features with one manifest per alignment, event CSVs, NRSP responses,
/// electrode metadata and the ground-truth CSV.
SynthPaths write_synth(const std::filesystem::path& dir, const SynthDataset& data, std::uint64_t config_hash = 0);

void write_truth_csv(const std::filesystem::path& path, std::span<const SynthTruth> truth);
std::vector<SynthTruth> read_truth_csv(const std::filesystem::path& path);

struct RecoveryReport
{
    /// [planted class][test] electrodes passing the test's combined outcome.
    std::array<std::array<std::size_t, kTestCount>, kPlantedClassCount> passes{};
    std::array<std::size_t, kPlantedClassCount> totals{};

    double strict_sensitivity = 0.0;          // nonlinear electrodes passing Strict
    double nonlinear_sensitivity = 0.0;       // nonlinear electrodes passing NonlinearIntegration
    double nonlinear_false_positive = 0.0;    // all other electrodes passing NonlinearIntegration
    double linear_strict_not_nonlinear = 0.0; // linear electrodes passing Strict but not NonlinearIntegration
    double weak_false_positive = 0.0;         // noise and unimodal electrodes passing Weak in either alignment

    std::string to_json() const;
};

RecoveryReport oracle_recovery_report(const TestSuite& suite, std::span<const SynthTruth> truth);

}  // namespace mmenc

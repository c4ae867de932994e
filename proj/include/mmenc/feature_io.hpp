#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmenc/feature_store.hpp"
#include "mmenc/model_spec.hpp"

namespace mmenc {

// NFEA: "NFEA" | u32 version | u64 config_hash | string model_id | string layer_id |
// u64 n | u64 D | u32 dtype (1 = f32, 2 = f64) | u64 seed | u8 projected |
// payload row-major [n][D] in dtype.
inline constexpr std::uint32_t kFeatureFormatVersion = 1;
enum class FeatureDtype : std::uint32_t
{
    F32 = 1,
    F64 = 2
};

void write_features(const std::filesystem::path& path, const FeatureMatrix& f, std::uint64_t config_hash = 0);
FeatureMatrix read_features(const std::filesystem::path& path);

/// Header-only read (n, D, ids) without loading the payload.
struct FeatureHeader
{
    std::string model_id;
    std::string layer_id;
    std::uint64_t n = 0;
    std::uint64_t dim = 0;
    FeatureDtype dtype = FeatureDtype::F32;
    std::uint64_t seed = 0;
    bool projected = false;
};
FeatureHeader read_feature_header(const std::filesystem::path& path);

/// CSV alternative: header f0..f{D-1}, one row per event; ids come from the manifest.
FeatureMatrix read_features_csv(const std::filesystem::path& path, std::string model_id, std::string layer_id);

struct ManifestEntry
{
    std::string model_id;
    std::string layer_id;
    std::filesystem::path path;  // absolute after reading
    ModalityClass modality = ModalityClass::UnimodalVision;
    bool trained = true;
};

/// JSON model-zoo manifest: {"entries": [{model_id, layer_id, path,
/// modality_class, trained}, ...]}; relative paths resolve against the
/// manifest's directory.
struct FeatureManifest
{
    std::vector<ManifestEntry> entries;

    /// Distinct models in order of first appearance.
    std::vector<ModelSpec> models() const;
    std::vector<const ManifestEntry*> layers_of(const std::string& model_id) const;
};

FeatureManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const FeatureManifest& manifest);

/// Load one entry, dispatching on extension (.csv or NFEA).
FeatureMatrix load_feature_entry(const ManifestEntry& entry);

}  // namespace mmenc

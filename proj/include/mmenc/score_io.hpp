#pragma once

#include <cstdint>
#include <filesystem>

#include "mmenc/regression.hpp"

namespace mmenc {

// NSCR: "NSCR" | u32 version | u64 config_hash | u64 n_electrodes |
// i64 electrode_ids[] | u64 n_bins | f64 bin_centers[] | u32 n_lambdas |
// f64 lambdas[] | u32 n_models | per model: string model_id, u32 n_layers,
// per layer: string layer_id, i32 chosen_lambda[n_electrodes],
// f64 r[3][n_electrodes][n_bins] (train, val, test); then
// i32 chosen_layer[n_electrodes].
inline constexpr std::uint32_t kScoreFormatVersion = 1;

void write_scores(const std::filesystem::path& path, const ScoreTensor& scores, std::uint64_t config_hash);
ScoreTensor read_scores(const std::filesystem::path& path, std::uint64_t* config_hash = nullptr);

/// Long CSV: model,layer,electrode,bin,split,r,lambda,chosen_layer,config_hash.
void write_scores_csv(const std::filesystem::path& path, const ScoreTensor& scores, std::uint64_t config_hash);

}  // namespace mmenc

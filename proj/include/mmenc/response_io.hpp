#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mmenc/event_model.hpp"

namespace mmenc {

// NRSP: "NRSP" | u32 version | u64 config_hash | u64 n_electrodes | u64 n_events |
// u64 n_bins | f64 bin_centers[n_bins] | electrode table (i64 id, i64 subject,
// string region) | f32 payload [electrode][event][bin].
inline constexpr std::uint32_t kResponseFormatVersion = 1;

void write_responses(const std::filesystem::path& path, const ResponseTensor& tensor, std::uint64_t config_hash = 0);
ResponseTensor read_responses(const std::filesystem::path& path, std::uint64_t* config_hash = nullptr);

/// Long CSV: electrode_id,subject_id,region_label,event,bin,bin_center_ms,value.
void write_responses_csv(const std::filesystem::path& path, const ResponseTensor& tensor);
ResponseTensor read_responses_csv(const std::filesystem::path& path);

/// Dispatches on extension: ".csv" reads the long CSV, anything else NRSP.
ResponseTensor load_responses(const std::filesystem::path& path);

// NSIG raw recordings: "NSIG" | u32 version | u64 n_channels | u64 n_samples |
// f64 sample_rate_hz | i64 electrode_ids[n_channels] | f32 payload [channel][sample].
void write_signals(const std::filesystem::path& path, const std::vector<RawSignal>& signals);
std::vector<RawSignal> read_signals(const std::filesystem::path& path);

}  // namespace mmenc

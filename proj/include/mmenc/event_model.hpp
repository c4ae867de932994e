#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mmenc {

/// Which modality anchors the event onsets of a dataset.
enum class Alignment
{
    LanguageAligned,
    VisionAligned
};

std::string_view to_string(Alignment a);
Alignment parse_alignment(std::string_view s);

/// One image-text pair with its onset; the unit of resampling.
struct EventStructure
{
    std::int64_t event_id = 0;
    double onset_ms = 0.0;
    std::string text;
    std::string image_ref;
    Alignment alignment = Alignment::LanguageAligned;
};

struct ElectrodeMeta
{
    std::int64_t electrode_id = 0;
    std::int64_t subject_id = 0;
    std::string region_label;
    std::optional<std::array<double, 3>> coordinates;
};

struct RawSignal
{
    std::int64_t electrode_id = 0;
    std::vector<double> samples;
    double sample_rate_hz = 2000.0;
};

/// Peri-event window centred on the onset, averaged in sliding sub-windows.
struct WindowSpec
{
    double window_ms = 4000.0;
    double sub_window_ms = 200.0;
    double stride_ms = 25.0;

    /// Throws ConfigError on non-positive sizes or sub_window > window.
    void validate() const;
    /// Additionally requires every length to be a whole number of samples.
    void validate_for_rate(double sample_rate_hz) const;
};

/// floor((window - sub_window) / stride) + 1.
std::size_t bin_count(const WindowSpec& spec);

/// Bin centres relative to the onset, in ms.
std::vector<double> bin_centers_ms(const WindowSpec& spec);

/// Electrode x event x bin mean-activity array.
struct ResponseTensor
{
    std::vector<ElectrodeMeta> electrodes;
    std::size_t n_events = 0;
    std::size_t n_bins = 0;
    std::vector<double> bin_centers_ms;
    std::vector<double> values;  // row-major [electrode][event][bin]

    std::size_t n_electrodes() const { return electrodes.size(); }
    std::size_t index(std::size_t e, std::size_t ev, std::size_t b) const { return (e * n_events + ev) * n_bins + b; }
    double& at(std::size_t e, std::size_t ev, std::size_t b) { return values[index(e, ev, b)]; }
    double at(std::size_t e, std::size_t ev, std::size_t b) const { return values[index(e, ev, b)]; }

    /// Regression targets: n_events x (n_electrodes * n_bins), column e * n_bins + b.
    Eigen::MatrixXd target_matrix() const;
};

struct EventRejection
{
    std::int64_t event_id = 0;
    std::string reason;
};

/// Per-electrode extraction result for the events whose window fits the recording.
struct ResponseSlice
{
    std::size_t n_bins = 0;
    std::vector<std::size_t> kept;  // indices into the input event list
    std::vector<double> values;     // [kept][bin]
    std::vector<EventRejection> rejected;
};

ResponseSlice extract_response(const RawSignal& signal, std::span<const EventStructure> events,
                               const WindowSpec& spec);

struct ExtractedDataset
{
    std::vector<EventStructure> events;  // events kept for every electrode
    ResponseTensor responses;
    std::vector<EventRejection> rejected;
};

/// Extract all electrodes; an event is dropped if its window leaves any
/// electrode's recording.
ExtractedDataset extract_dataset(std::span<const RawSignal> signals, std::span<const ElectrodeMeta> electrodes,
                                 std::span<const EventStructure> events, const WindowSpec& spec,
                                 unsigned threads = 1);

struct ValidationReport
{
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_dataset(std::span<const EventStructure> events, const ResponseTensor& responses);

// CSV interchange for events and electrode metadata.
std::vector<EventStructure> read_events_csv(const std::filesystem::path& path);
void write_events_csv(const std::filesystem::path& path, std::span<const EventStructure> events);
std::vector<ElectrodeMeta> read_electrodes_csv(const std::filesystem::path& path);
void write_electrodes_csv(const std::filesystem::path& path, std::span<const ElectrodeMeta> electrodes);

/// Region label lookup: one label per line, '#' comments allowed.
std::vector<std::string> read_region_labels(const std::filesystem::path& path);
/// The DKT cortical labels shipped with the engine.
const std::vector<std::string>& default_dkt_labels();

}  // namespace mmenc

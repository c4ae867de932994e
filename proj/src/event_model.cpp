#include "mmenc/event_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "mmenc/error.hpp"
#include "mmenc/io.hpp"
#include "mmenc/parallel.hpp"

namespace mmenc {

std::string_view to_string(Alignment a)
{
    return a == Alignment::LanguageAligned ? "language" : "vision";
}

Alignment parse_alignment(std::string_view s)
{
    if (s == "language" || s == "LanguageAligned" || s == "language_aligned") return Alignment::LanguageAligned;
    if (s == "vision" || s == "VisionAligned" || s == "vision_aligned") return Alignment::VisionAligned;
    throw DataError(fmt::format("unknown alignment '{}'", s));
}

void WindowSpec::validate() const
{
    if (!(window_ms > 0) || !(sub_window_ms > 0) || !(stride_ms > 0))
        throw ConfigError(fmt::format("window spec ({}, {}, {}) must be positive", window_ms, sub_window_ms, stride_ms));
    if (sub_window_ms > window_ms)
        throw ConfigError(fmt::format("sub_window_ms {} exceeds window_ms {}", sub_window_ms, window_ms));
}

namespace {

bool whole(double x) { return std::abs(x - std::round(x)) < 1e-9 * std::max(1.0, std::abs(x)); }

std::int64_t samples_for(double ms, double rate) { return std::llround(ms * rate / 1000.0); }

}  // namespace

void WindowSpec::validate_for_rate(double sample_rate_hz) const
{
    validate();
    if (!(sample_rate_hz > 0)) throw ConfigError("sample rate must be positive");
    for (double ms : {window_ms, sub_window_ms, stride_ms})
        if (!whole(ms * sample_rate_hz / 1000.0))
            throw ConfigError(fmt::format("{} ms is not a whole number of samples at {} Hz", ms, sample_rate_hz));
}

std::size_t bin_count(const WindowSpec& spec)
{
    spec.validate();
    // Guard the floor against representation error, e.g. 0.3 / 0.1.
    const double q = (spec.window_ms - spec.sub_window_ms) / spec.stride_ms;
    return static_cast<std::size_t>(std::floor(q + 1e-9)) + 1;
}

std::vector<double> bin_centers_ms(const WindowSpec& spec)
{
    const std::size_t n = bin_count(spec);
    std::vector<double> centers(n);
    const double first = -spec.window_ms / 2.0 + spec.sub_window_ms / 2.0;
    for (std::size_t b = 0; b < n; ++b) centers[b] = first + static_cast<double>(b) * spec.stride_ms;
    return centers;
}

Eigen::MatrixXd ResponseTensor::target_matrix() const
{
    Eigen::MatrixXd y(static_cast<Eigen::Index>(n_events), static_cast<Eigen::Index>(n_electrodes() * n_bins));
    for (std::size_t e = 0; e < n_electrodes(); ++e)
        for (std::size_t ev = 0; ev < n_events; ++ev)
            for (std::size_t b = 0; b < n_bins; ++b)
                y(static_cast<Eigen::Index>(ev), static_cast<Eigen::Index>(e * n_bins + b)) = at(e, ev, b);
    return y;
}

ResponseSlice extract_response(const RawSignal& signal, std::span<const EventStructure> events,
                               const WindowSpec& spec)
{
    spec.validate_for_rate(signal.sample_rate_hz);
    const double rate = signal.sample_rate_hz;
    const auto window = samples_for(spec.window_ms, rate);
    const auto sub = samples_for(spec.sub_window_ms, rate);
    const auto stride = samples_for(spec.stride_ms, rate);
    const auto total = static_cast<std::int64_t>(signal.samples.size());
    const double duration_ms = static_cast<double>(total) * 1000.0 / rate;

    ResponseSlice slice;
    slice.n_bins = bin_count(spec);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        const auto start = samples_for(ev.onset_ms - spec.window_ms / 2.0, rate);
        if (start < 0 || start + window > total) {
            slice.rejected.push_back(
                {ev.event_id, fmt::format("window [{}, {}) ms exceeds recording [0, {}) ms on electrode {}",
                                          ev.onset_ms - spec.window_ms / 2.0, ev.onset_ms + spec.window_ms / 2.0,
                                          duration_ms, signal.electrode_id)});
            continue;
        }
        slice.kept.push_back(i);
        for (std::size_t b = 0; b < slice.n_bins; ++b) {
            const auto lo = start + static_cast<std::int64_t>(b) * stride;
            double sum = 0.0;
            for (auto s = lo; s < lo + sub; ++s) sum += signal.samples[static_cast<std::size_t>(s)];
            slice.values.push_back(sum / static_cast<double>(sub));
        }
    }
    return slice;
}

ExtractedDataset extract_dataset(std::span<const RawSignal> signals, std::span<const ElectrodeMeta> electrodes,
                                 std::span<const EventStructure> events, const WindowSpec& spec, unsigned threads)
{
    std::vector<const RawSignal*> by_electrode(electrodes.size(), nullptr);
    for (std::size_t e = 0; e < electrodes.size(); ++e) {
        for (const auto& s : signals)
            if (s.electrode_id == electrodes[e].electrode_id) by_electrode[e] = &s;
        if (!by_electrode[e])
            throw DataError(fmt::format("no raw signal for electrode {}", electrodes[e].electrode_id));
    }

    std::vector<ResponseSlice> slices(electrodes.size());
    parallel_for(electrodes.size(), threads,
                 [&](std::size_t e) { slices[e] = extract_response(*by_electrode[e], events, spec); });

    // An event survives only if every electrode kept it.
    std::vector<int> keep_count(events.size(), 0);
    for (const auto& s : slices)
        for (auto i : s.kept) ++keep_count[i];

    ExtractedDataset out;
    std::set<std::int64_t> reported;
    for (const auto& s : slices)
        for (const auto& r : s.rejected)
            if (reported.insert(r.event_id).second) out.rejected.push_back(r);

    std::vector<std::size_t> kept_events;
    for (std::size_t i = 0; i < events.size(); ++i)
        if (keep_count[i] == static_cast<int>(electrodes.size())) kept_events.push_back(i);

    auto& t = out.responses;
    t.electrodes.assign(electrodes.begin(), electrodes.end());
    t.n_events = kept_events.size();
    t.n_bins = bin_count(spec);
    t.bin_centers_ms = bin_centers_ms(spec);
    t.values.assign(t.n_electrodes() * t.n_events * t.n_bins, 0.0);
    for (std::size_t e = 0; e < electrodes.size(); ++e) {
        const auto& s = slices[e];
        std::size_t k = 0;
        for (std::size_t row = 0; row < s.kept.size(); ++row) {
            const auto ev = s.kept[row];
            while (k < kept_events.size() && kept_events[k] < ev) ++k;
            if (k == kept_events.size() || kept_events[k] != ev) continue;
            for (std::size_t b = 0; b < t.n_bins; ++b) t.at(e, k, b) = s.values[row * t.n_bins + b];
        }
    }
    for (auto i : kept_events) out.events.push_back(events[i]);
    return out;
}

ValidationReport validate_dataset(std::span<const EventStructure> events, const ResponseTensor& responses)
{
    ValidationReport report;
    auto& v = report.violations;

    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].onset_ms < 0) v.push_back(fmt::format("negative onset: event {}", events[i].event_id));
        if (i > 0) {
            if (!(events[i].onset_ms > events[i - 1].onset_ms) || events[i].event_id <= events[i - 1].event_id) {
                v.push_back(fmt::format("non-monotone onsets: event {} after event {}", events[i].event_id,
                                        events[i - 1].event_id));
            }
            if (events[i].alignment != events[0].alignment)
                v.push_back(fmt::format("mixed alignment: event {}", events[i].event_id));
        }
    }

    if (responses.n_events != events.size())
        v.push_back(fmt::format("event count mismatch: {} events, responses hold {}", events.size(),
                                responses.n_events));
    if (responses.bin_centers_ms.size() != responses.n_bins)
        v.push_back(fmt::format("bin-count mismatch: {} bin centres for {} bins", responses.bin_centers_ms.size(),
                                responses.n_bins));
    if (responses.values.size() != responses.n_electrodes() * responses.n_events * responses.n_bins)
        v.push_back("bin-count mismatch: payload size does not match electrodes x events x bins");

    std::set<std::pair<std::int64_t, std::int64_t>> ids;
    for (const auto& e : responses.electrodes)
        if (!ids.insert({e.subject_id, e.electrode_id}).second)
            v.push_back(fmt::format("duplicate electrode: {} (subject {})", e.electrode_id, e.subject_id));

    const auto bad = std::count_if(responses.values.begin(), responses.values.end(),
                                   [](double x) { return !std::isfinite(x); });
    if (bad > 0) v.push_back(fmt::format("missing values: {} non-finite entries", bad));
    return report;
}

std::vector<EventStructure> read_events_csv(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto c_id = t.column("event_id", src), c_on = t.column("onset_ms", src), c_text = t.column("text", src),
               c_img = t.column("image_ref", src), c_al = t.column("alignment", src);
    std::vector<EventStructure> events;
    events.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        events.push_back({parse_int(r[c_id], src), parse_double(r[c_on], src), r[c_text], r[c_img],
                          parse_alignment(r[c_al])});
    }
    return events;
}

void write_events_csv(const std::filesystem::path& path, std::span<const EventStructure> events)
{
    CsvWriter w(path, {"event_id", "onset_ms", "text", "image_ref", "alignment"});
    for (const auto& e : events) {
        w.cell(e.event_id).cell(e.onset_ms).cell(e.text).cell(e.image_ref).cell(to_string(e.alignment));
        w.end_row();
    }
    w.finish();
}

std::vector<ElectrodeMeta> read_electrodes_csv(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto c_id = t.column("electrode_id", src), c_sub = t.column("subject_id", src),
               c_reg = t.column("region_label", src), c_x = t.column("x", src), c_y = t.column("y", src),
               c_z = t.column("z", src);
    std::vector<ElectrodeMeta> out;
    for (const auto& r : t.rows) {
        ElectrodeMeta m{parse_int(r[c_id], src), parse_int(r[c_sub], src), r[c_reg], std::nullopt};
        if (!r[c_x].empty() || !r[c_y].empty() || !r[c_z].empty())
            m.coordinates = std::array{parse_double(r[c_x], src), parse_double(r[c_y], src), parse_double(r[c_z], src)};
        out.push_back(std::move(m));
    }
    return out;
}

void write_electrodes_csv(const std::filesystem::path& path, std::span<const ElectrodeMeta> electrodes)
{
    CsvWriter w(path, {"electrode_id", "subject_id", "region_label", "x", "y", "z"});
    for (const auto& e : electrodes) {
        w.cell(e.electrode_id).cell(e.subject_id).cell(e.region_label);
        if (e.coordinates) {
            for (double c : *e.coordinates) w.cell(c);
        } else {
            w.empty().empty().empty();
        }
        w.end_row();
    }
    w.finish();
}

std::vector<std::string> read_region_labels(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open region label list " + path.string());
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        labels.push_back(line);
    }
    return labels;
}

const std::vector<std::string>& default_dkt_labels()
{
    static const std::vector<std::string> labels = {
        "caudalanteriorcingulate", "caudalmiddlefrontal", "cuneus", "entorhinal", "fusiform",
        "inferiorparietal", "inferiortemporal", "isthmuscingulate", "lateraloccipital", "lateralorbitofrontal",
        "lingual", "medialorbitofrontal", "middletemporal", "parahippocampal", "paracentral",
        "parsopercularis", "parsorbitalis", "parstriangularis", "pericalcarine", "postcentral",
        "posteriorcingulate", "precentral", "precuneus", "rostralanteriorcingulate", "rostralmiddlefrontal",
        "superiorfrontal", "superiorparietal", "superiortemporal", "supramarginal", "transversetemporal",
        "insula"};
    return labels;
}

}  // namespace mmenc

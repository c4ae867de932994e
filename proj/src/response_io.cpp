#include "mmenc/response_io.hpp"

#include <map>
#include <tuple>

#include <fmt/format.h>

#include "mmenc/io.hpp"

namespace mmenc {

void write_responses(const std::filesystem::path& path, const ResponseTensor& t, std::uint64_t config_hash)
{
    BinaryWriter w(path);
    w.put_magic("NRSP");
    w.put(kResponseFormatVersion);
    w.put(config_hash);
    w.put(static_cast<std::uint64_t>(t.n_electrodes()));
    w.put(static_cast<std::uint64_t>(t.n_events));
    w.put(static_cast<std::uint64_t>(t.n_bins));
    w.put_array(std::span<const double>(t.bin_centers_ms));
    for (const auto& e : t.electrodes) {
        w.put(static_cast<std::int64_t>(e.electrode_id));
        w.put(static_cast<std::int64_t>(e.subject_id));
        w.put_string(e.region_label);
    }
    std::vector<float> payload(t.values.begin(), t.values.end());
    w.put_array(std::span<const float>(payload));
    w.finish();
}

ResponseTensor read_responses(const std::filesystem::path& path, std::uint64_t* config_hash)
{
    BinaryReader r(path);
    r.expect_magic("NRSP");
    const auto version = r.get<std::uint32_t>();
    if (version != kResponseFormatVersion)
        throw DataError(fmt::format("{}: unsupported NRSP version {}", path.string(), version));
    const auto hash = r.get<std::uint64_t>();
    if (config_hash) *config_hash = hash;
    ResponseTensor t;
    const auto n_el = r.get<std::uint64_t>();
    t.n_events = r.get<std::uint64_t>();
    t.n_bins = r.get<std::uint64_t>();
    if (n_el > (1u << 24) || t.n_events > (1u << 28) || t.n_bins > (1u << 20))
        throw DataError(path.string() + ": implausible NRSP dimensions");
    t.bin_centers_ms.resize(t.n_bins);
    r.get_array(std::span<double>(t.bin_centers_ms));
    t.electrodes.resize(n_el);
    for (auto& e : t.electrodes) {
        e.electrode_id = r.get<std::int64_t>();
        e.subject_id = r.get<std::int64_t>();
        e.region_label = r.get_string();
    }
    std::vector<float> payload(n_el * t.n_events * t.n_bins);
    r.get_array(std::span<float>(payload));
    t.values.assign(payload.begin(), payload.end());
    return t;
}

void write_responses_csv(const std::filesystem::path& path, const ResponseTensor& t)
{
    CsvWriter w(path, {"electrode_id", "subject_id", "region_label", "event", "bin", "bin_center_ms", "value"});
    for (std::size_t e = 0; e < t.n_electrodes(); ++e)
        for (std::size_t ev = 0; ev < t.n_events; ++ev)
            for (std::size_t b = 0; b < t.n_bins; ++b) {
                const auto& m = t.electrodes[e];
                w.cell(m.electrode_id).cell(m.subject_id).cell(m.region_label).cell(ev).cell(b);
                w.cell(t.bin_centers_ms[b]).cell(t.at(e, ev, b));
                w.end_row();
            }
    w.finish();
}

ResponseTensor read_responses_csv(const std::filesystem::path& path)
{
    const auto table = read_csv(path);
    const auto src = path.string();
    const auto c_id = table.column("electrode_id", src), c_sub = table.column("subject_id", src),
               c_reg = table.column("region_label", src), c_ev = table.column("event", src),
               c_bin = table.column("bin", src), c_ctr = table.column("bin_center_ms", src),
               c_val = table.column("value", src);

    // Electrodes in order of first appearance; events and bins dense from 0.
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> electrode_index;
    ResponseTensor t;
    std::size_t n_ev = 0, n_bins = 0;
    for (const auto& r : table.rows) {
        const auto key = std::pair{parse_int(r[c_sub], src), parse_int(r[c_id], src)};
        if (!electrode_index.contains(key)) {
            electrode_index[key] = t.electrodes.size();
            t.electrodes.push_back({key.second, key.first, r[c_reg], std::nullopt});
        }
        n_ev = std::max<std::size_t>(n_ev, static_cast<std::size_t>(parse_int(r[c_ev], src)) + 1);
        n_bins = std::max<std::size_t>(n_bins, static_cast<std::size_t>(parse_int(r[c_bin], src)) + 1);
    }
    t.n_events = n_ev;
    t.n_bins = n_bins;
    t.bin_centers_ms.assign(n_bins, 0.0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    t.values.assign(t.n_electrodes() * n_ev * n_bins, nan);
    for (const auto& r : table.rows) {
        const auto e = electrode_index.at({parse_int(r[c_sub], src), parse_int(r[c_id], src)});
        const auto ev = static_cast<std::size_t>(parse_int(r[c_ev], src));
        const auto b = static_cast<std::size_t>(parse_int(r[c_bin], src));
        t.bin_centers_ms[b] = parse_double(r[c_ctr], src);
        t.at(e, ev, b) = parse_double(r[c_val], src);
    }
    for (double v : t.values)
        if (std::isnan(v)) throw DataError(src + ": response CSV does not cover every electrode x event x bin cell");
    return t;
}

ResponseTensor load_responses(const std::filesystem::path& path)
{
    if (path.extension() == ".csv") return read_responses_csv(path);
    return read_responses(path);
}

void write_signals(const std::filesystem::path& path, const std::vector<RawSignal>& signals)
{
    if (signals.empty()) throw DataError("no signals to write");
    const auto n = signals.front().samples.size();
    const double rate = signals.front().sample_rate_hz;
    for (const auto& s : signals)
        if (s.samples.size() != n || s.sample_rate_hz != rate)
            throw DataError("NSIG requires equal length and sample rate across channels");
    BinaryWriter w(path);
    w.put_magic("NSIG");
    w.put(std::uint32_t{1});
    w.put(static_cast<std::uint64_t>(signals.size()));
    w.put(static_cast<std::uint64_t>(n));
    w.put(rate);
    for (const auto& s : signals) w.put(static_cast<std::int64_t>(s.electrode_id));
    for (const auto& s : signals) {
        std::vector<float> f(s.samples.begin(), s.samples.end());
        w.put_array(std::span<const float>(f));
    }
    w.finish();
}

std::vector<RawSignal> read_signals(const std::filesystem::path& path)
{
    BinaryReader r(path);
    r.expect_magic("NSIG");
    if (r.get<std::uint32_t>() != 1) throw DataError(path.string() + ": unsupported NSIG version");
    const auto channels = r.get<std::uint64_t>();
    const auto n = r.get<std::uint64_t>();
    const auto rate = r.get<double>();
    if (channels > (1u << 20) || n > (std::uint64_t{1} << 36)) throw DataError(path.string() + ": implausible NSIG");
    std::vector<RawSignal> out(channels);
    for (auto& s : out) {
        s.electrode_id = r.get<std::int64_t>();
        s.sample_rate_hz = rate;
    }
    std::vector<float> buf(n);
    for (auto& s : out) {
        r.get_array(std::span<float>(buf));
        s.samples.assign(buf.begin(), buf.end());
    }
    return out;
}

}  // namespace mmenc

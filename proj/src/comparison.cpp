#include "mmenc/comparison.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "mmenc/error.hpp"
#include "mmenc/io.hpp"
#include "mmenc/rng.hpp"

namespace mmenc {

std::string_view to_string(VerdictKind k)
{
    switch (k) {
    case VerdictKind::DefaultWinner: return "DefaultWinner";
    case VerdictKind::BootstrapWin: return "BootstrapWin";
    case VerdictKind::NoDecision: return "NoDecision";
    }
    return "NoDecision";
}

VerdictKind parse_verdict_kind(std::string_view s)
{
    if (s == "DefaultWinner") return VerdictKind::DefaultWinner;
    if (s == "BootstrapWin") return VerdictKind::BootstrapWin;
    if (s == "NoDecision") return VerdictKind::NoDecision;
    throw DataError(fmt::format("unknown verdict kind '{}'", s));
}

namespace {

std::vector<std::size_t> battery(std::size_t n_models, std::span<const std::size_t> subset)
{
    if (!subset.empty()) return {subset.begin(), subset.end()};
    std::vector<std::size_t> all(n_models);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
}

}  // namespace

std::vector<std::size_t> rank_models(const BootstrapCI& ci, const SurvivorMask& mask, std::size_t electrode,
                                     std::span<const std::size_t> subset)
{
    struct Entry
    {
        std::size_t model;
        double score;
    };
    std::vector<Entry> entries;
    for (const auto m : battery(ci.models.size(), subset)) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t b = 0; b < ci.n_bins; ++b)
            if (mask.at(m, electrode, b)) {
                sum += ci.at(m, Split::Validation, electrode, b).mean;
                ++n;
            }
        if (n > 0) entries.push_back({m, sum / static_cast<double>(n)});
    }
    std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return ci.models[a.model].model_id < ci.models[b.model].model_id;
    });
    std::vector<std::size_t> order;
    for (const auto& e : entries) order.push_back(e.model);
    return order;
}

std::optional<std::size_t> default_winner(const SurvivorMask& mask, std::size_t electrode, std::size_t min_bins,
                                          std::span<const std::size_t> subset)
{
    std::optional<std::size_t> found;
    for (const auto m : battery(mask.model_ids.size(), subset)) {
        if (mask.count(m, electrode) < min_bins) continue;
        if (found) return std::nullopt;
        found = m;
    }
    return found;
}

TimebinResult timebin_bootstrap(std::span<const double> top, std::span<const double> second,
                                std::span<const std::size_t> shared_bins, std::size_t b2, std::uint64_t seed,
                                std::uint64_t stream)
{
    if (shared_bins.empty()) throw DataError("time-bin bootstrap needs at least one shared bin");
    if (b2 == 0) throw ConfigError("B2 must be positive");
    const std::size_t n = shared_bins.size();
    std::vector<double> delta(n);
    for (std::size_t i = 0; i < n; ++i) delta[i] = top[shared_bins[i]] - second[shared_bins[i]];

    TimebinResult out;
    out.diff = std::accumulate(delta.begin(), delta.end(), 0.0) / static_cast<double>(n);
    const CounterRng rng(seed);
    std::size_t non_positive = 0;
    for (std::size_t r = 0; r < b2; ++r) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += delta[rng.below(n, stream, r * n + j)];
        if (sum <= 0.0) ++non_positive;
    }
    out.p = static_cast<double>(1 + non_positive) / static_cast<double>(b2 + 1);
    return out;
}

FdrResult fdr_adjust(std::span<const double> p, double alpha)
{
    const std::size_t m = p.size();
    for (std::size_t i = 0; i < m; ++i)
        if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw DataError(fmt::format("p-value {} at position {} is outside [0, 1]", p[i], i));
    FdrResult out{std::vector<double>(m, 1.0), std::vector<bool>(m, false)};
    if (m == 0) return out;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    const double md = static_cast<double>(m);
    std::size_t k_max = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (p[order[i]] <= static_cast<double>(i + 1) * alpha / md) k_max = i + 1;
    for (std::size_t i = 0; i < k_max; ++i) out.rejected[order[i]] = true;

    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        running = std::min(running, md * p[order[i]] / static_cast<double>(i + 1));
        out.adjusted[order[i]] = running;
    }
    return out;
}

ComparisonVerdict compare_electrode(const BootstrapCI& ci, const SurvivorMask& mask, const ScoreTensor& scores,
                                    std::size_t electrode, std::span<const std::size_t> subset,
                                    std::string_view test_key, const ComparisonConfig& config)
{
    ComparisonVerdict v;
    v.electrode_id = ci.electrode_ids[electrode];
    if (const auto dw = default_winner(mask, electrode, config.min_bins, subset)) {
        v.winner = ci.models[*dw].model_id;
        v.shared_bins = mask.count(*dw, electrode);
        v.kind = VerdictKind::DefaultWinner;
        return v;
    }
    const auto ranked = rank_models(ci, mask, electrode, subset);
    if (ranked.size() < 2) return v;

    const auto top = ranked[0], second = ranked[1];
    v.winner = ci.models[top].model_id;
    v.runner_up = ci.models[second].model_id;
    std::vector<std::size_t> shared;
    for (std::size_t b = 0; b < ci.n_bins; ++b)
        if (mask.at(top, electrode, b) && mask.at(second, electrode, b)) shared.push_back(b);
    v.shared_bins = shared.size();
    if (shared.size() < config.min_bins) return v;

    const auto top_curve = scores.chosen_curve(scores.model_index(v.winner), Split::Test, electrode);
    const auto second_curve = scores.chosen_curve(scores.model_index(v.runner_up), Split::Test, electrode);
    const auto stream = stream_key(fnv1a64(test_key), static_cast<std::uint64_t>(v.electrode_id));
    const auto res = timebin_bootstrap(top_curve, second_curve, shared, config.b2, config.seed, stream);
    v.diff = res.diff;
    v.p_raw = res.p;
    return v;
}

void apply_fdr(std::vector<ComparisonVerdict>& verdicts, double alpha)
{
    std::vector<std::size_t> tested;
    std::vector<double> p;
    for (std::size_t i = 0; i < verdicts.size(); ++i)
        if (verdicts[i].tested()) {
            tested.push_back(i);
            p.push_back(verdicts[i].p_raw);
        }
    const auto fdr = fdr_adjust(p, alpha);
    for (std::size_t j = 0; j < tested.size(); ++j) {
        auto& v = verdicts[tested[j]];
        v.p_adj = fdr.adjusted[j];
        v.kind = fdr.rejected[j] ? VerdictKind::BootstrapWin : VerdictKind::NoDecision;
    }
}

std::vector<ComparisonVerdict> compare_battery(const BootstrapCI& ci, const SurvivorMask& mask,
                                               const ScoreTensor& scores, std::span<const std::size_t> subset,
                                               std::string_view test_key, const ComparisonConfig& config)
{
    if (ci.electrode_ids != scores.electrode_ids || ci.n_bins != scores.n_bins)
        throw DataError("confidence intervals and score tensor cover different electrodes or bins");
    if (mask.model_ids.size() != ci.models.size()) throw DataError("survivor mask does not match the interval table");
    std::vector<ComparisonVerdict> out;
    out.reserve(ci.n_electrodes());
    for (std::size_t e = 0; e < ci.n_electrodes(); ++e)
        out.push_back(compare_electrode(ci, mask, scores, e, subset, test_key, config));
    apply_fdr(out, config.alpha);
    return out;
}

void write_verdicts_csv(const std::filesystem::path& path, std::span<const ComparisonVerdict> verdicts,
                        std::span<const ElectrodeMeta> electrodes, std::uint64_t config_hash)
{
    CsvWriter w(path, {"electrode", "subject", "region", "winner", "runner_up", "diff", "p_raw", "p_adj",
                       "shared_bins", "kind", "config_hash"});
    const auto hash = hex64(config_hash);
    for (const auto& v : verdicts) {
        const auto meta = std::find_if(electrodes.begin(), electrodes.end(),
                                       [&](const ElectrodeMeta& m) { return m.electrode_id == v.electrode_id; });
        w.cell(v.electrode_id);
        if (meta != electrodes.end())
            w.cell(meta->subject_id).cell(meta->region_label);
        else
            w.empty().empty();
        w.cell(v.winner).cell(v.runner_up).cell(v.diff).cell(v.p_raw).cell(v.p_adj).cell(v.shared_bins);
        w.cell(to_string(v.kind)).cell(hash);
        w.end_row();
    }
    w.finish();
}

std::vector<ComparisonVerdict> read_verdicts_csv(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto c_e = t.column("electrode", src), c_w = t.column("winner", src), c_r = t.column("runner_up", src),
               c_d = t.column("diff", src), c_p = t.column("p_raw", src), c_a = t.column("p_adj", src),
               c_s = t.column("shared_bins", src), c_k = t.column("kind", src);
    const auto opt = [&](const std::string& s) { return s.empty() ? std::nan("") : parse_double(s, src); };
    std::vector<ComparisonVerdict> out;
    for (const auto& r : t.rows) {
        ComparisonVerdict v;
        v.electrode_id = parse_int(r[c_e], src);
        v.winner = r[c_w];
        v.runner_up = r[c_r];
        v.diff = opt(r[c_d]);
        v.p_raw = opt(r[c_p]);
        v.p_adj = opt(r[c_a]);
        v.shared_bins = static_cast<std::size_t>(parse_int(r[c_s], src));
        v.kind = parse_verdict_kind(r[c_k]);
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace mmenc

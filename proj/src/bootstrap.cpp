#include "mmenc/bootstrap.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "mmenc/error.hpp"
#include "mmenc/io.hpp"
#include "mmenc/parallel.hpp"
#include "mmenc/rng.hpp"

namespace mmenc {

namespace {
constexpr std::uint64_t kResampleStream = 0x5245534D504C45ull;  // "RESMPLE"
}

std::uint64_t ResampleSet::hash() const
{
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(indices.data()), indices.size() * sizeof(std::uint32_t)));
}

ResampleSet make_resamples(std::size_t n_events, std::size_t n_resamples, std::uint64_t seed,
                           std::span<const double> onsets_ms, bool sort_by_onset)
{
    if (n_events < 2) throw ConfigError("bootstrap needs at least 2 events");
    if (onsets_ms.size() != n_events)
        throw DataError(fmt::format("{} onsets for {} events", onsets_ms.size(), n_events));
    ResampleSet set{n_events, n_resamples, seed, sort_by_onset, {}};
    set.indices.resize(n_events * n_resamples);
    const CounterRng rng(seed);
    for (std::size_t r = 0; r < n_resamples; ++r) {
        auto* row = set.indices.data() + r * n_events;
        const auto stream = stream_key(kResampleStream, r);
        for (std::size_t j = 0; j < n_events; ++j) row[j] = static_cast<std::uint32_t>(rng.below(n_events, stream, j));
        if (sort_by_onset)
            std::sort(row, row + n_events, [&](std::uint32_t a, std::uint32_t b) {
                return onsets_ms[a] < onsets_ms[b] || (onsets_ms[a] == onsets_ms[b] && a < b);
            });
    }
    return set;
}

CiCell percentile_ci(std::vector<double> samples)
{
    if (samples.empty()) throw NumericalError("confidence interval of an empty sample");
    const std::size_t b = samples.size();
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(b);
    std::sort(samples.begin(), samples.end());
    const std::size_t lo_rank = std::max<std::size_t>(1, (25 * b + 999) / 1000);
    const std::size_t hi_rank = std::max<std::size_t>(1, (975 * b + 999) / 1000);
    return {mean, samples[lo_rank - 1], samples[hi_rank - 1]};
}

std::size_t BootstrapCI::model_index(const std::string& id) const
{
    for (std::size_t m = 0; m < models.size(); ++m)
        if (models[m].model_id == id) return m;
    throw DataError(fmt::format("model '{}' has no bootstrap intervals", id));
}

namespace {

/// Target columns one layer is responsible for, grouped by lambda index.
struct LayerGroup
{
    std::size_t layer = 0;
    std::vector<Eigen::Index> cols;                                  // into the full target matrix
    std::vector<std::pair<int, std::vector<Eigen::Index>>> by_lambda;  // positions within `cols`
};

std::vector<LayerGroup> plan_groups(const ModelScores& ms, std::size_t n_el, std::size_t n_bins)
{
    std::vector<LayerGroup> groups;
    for (std::size_t l = 0; l < ms.layers.size(); ++l) {
        LayerGroup g{l, {}, {}};
        std::map<int, std::vector<Eigen::Index>> lambdas;
        for (std::size_t e = 0; e < n_el; ++e) {
            if (ms.chosen_layer[e] != static_cast<int>(l)) continue;
            for (std::size_t b = 0; b < n_bins; ++b) {
                lambdas[ms.layers[l].chosen_lambda[e]].push_back(static_cast<Eigen::Index>(g.cols.size()));
                g.cols.push_back(static_cast<Eigen::Index>(e * n_bins + b));
            }
        }
        if (g.cols.empty()) continue;
        for (auto& [k, pos] : lambdas) g.by_lambda.emplace_back(k, std::move(pos));
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace

BootstrapCI bootstrap_scores(const std::vector<ModelLayers>& models, const Eigen::MatrixXd& targets,
                             const FoldPlan& plan, const ScoreTensor& selections, const ResampleSet& resamples,
                             const BootstrapConfig& config, unsigned threads)
{
    if (models.size() != selections.models.size())
        throw DataError("bootstrap: model list does not match the regression selections");
    if (resamples.n_events != static_cast<std::size_t>(targets.rows()) ||
        plan.n_events != static_cast<Eigen::Index>(resamples.n_events))
        throw DataError("bootstrap: resample width, targets and fold plan disagree on the event count");

    const std::size_t n_el = selections.n_electrodes(), n_bins = selections.n_bins;
    const auto n_targets = n_el * n_bins;
    const std::size_t n_res = resamples.n_resamples;
    const double k_folds = static_cast<double>(plan.folds.size());

    BootstrapCI ci;
    ci.electrode_ids = selections.electrode_ids;
    ci.n_bins = n_bins;
    ci.n_resamples = n_res;
    ci.resample_hash = resamples.hash();

    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto& ms = selections.models[m];
        if (ms.model_id != models[m].model_id || ms.layers.size() != models[m].layers.size())
            throw DataError(fmt::format("bootstrap: model {} does not match its selections", models[m].model_id));
        const auto groups = plan_groups(ms, n_el, n_bins);

        // [resample][split][target]; float keeps 1000 x 3 x T affordable.
        std::vector<float> store(n_res * kSplitCount * n_targets, 0.0f);
        std::vector<std::uint8_t> failed(n_res, 0);

        parallel_for(n_res, threads, [&](std::size_t r) {
            const auto idx = resamples.row(r);
            float* dst = store.data() + r * kSplitCount * n_targets;
            for (const auto& g : groups) {
                const auto& x = models[m].layers[g.layer].values;
                Eigen::MatrixXd xr(static_cast<Eigen::Index>(idx.size()), x.cols());
                Eigen::MatrixXd yr(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(g.cols.size()));
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    xr.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
                    for (std::size_t c = 0; c < g.cols.size(); ++c)
                        yr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = targets(idx[i], g.cols[c]);
                }
                const DesignMoments moments(xr, yr);
                Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kSplitCount, yr.cols());
                for (const auto& fold : plan.folds) {
                    const auto system = FoldSystem::build(moments, fold);
                    for (const auto& [k, pos] : g.by_lambda) {
                        Eigen::MatrixXd out(kSplitCount, static_cast<Eigen::Index>(pos.size()));
                        if (!system.score(selections.lambda_grid[static_cast<std::size_t>(k)], pos, out,
                                          config.rcond_tolerance)) {
                            failed[r] = 1;
                            return;
                        }
                        for (std::size_t i = 0; i < pos.size(); ++i) sums.col(pos[i]) += out.col(static_cast<Eigen::Index>(i));
                    }
                }
                sums /= k_folds;
                for (int s = 0; s < kSplitCount; ++s)
                    for (std::size_t c = 0; c < g.cols.size(); ++c)
                        dst[static_cast<std::size_t>(s) * n_targets + static_cast<std::size_t>(g.cols[c])] =
                            static_cast<float>(sums(s, static_cast<Eigen::Index>(c)));
            }
        });

        ModelCi mci;
        mci.model_id = ms.model_id;
        mci.failed_resamples = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
        if (static_cast<double>(mci.failed_resamples) > config.max_failure_fraction * static_cast<double>(n_res)) {
            std::vector<std::size_t> which;
            for (std::size_t r = 0; r < n_res && which.size() < 10; ++r)
                if (failed[r]) which.push_back(r);
            throw NumericalError(fmt::format("bootstrap for model {}: {} of {} resamples failed (first: {})",
                                             ms.model_id, mci.failed_resamples, n_res, fmt::join(which, ",")));
        }
        std::vector<double> sample;
        sample.reserve(n_res);
        for (int s = 0; s < kSplitCount; ++s) {
            mci.cells[s].resize(n_targets);
            for (std::size_t t = 0; t < n_targets; ++t) {
                sample.clear();
                for (std::size_t r = 0; r < n_res; ++r)
                    if (!failed[r]) sample.push_back(store[(r * kSplitCount + static_cast<std::size_t>(s)) * n_targets + t]);
                mci.cells[s][t] = percentile_ci(sample);
            }
        }
        ci.models.push_back(std::move(mci));
    }
    return ci;
}

std::size_t SurvivorMask::count(std::size_t m, std::size_t e) const
{
    std::size_t c = 0;
    for (std::size_t b = 0; b < n_bins; ++b) c += at(m, e, b) ? 1 : 0;
    return c;
}

SurvivorMask survivor_mask(const BootstrapCI& ci)
{
    SurvivorMask mask;
    mask.n_electrodes = ci.n_electrodes();
    mask.n_bins = ci.n_bins;
    for (const auto& m : ci.models) mask.model_ids.push_back(m.model_id);
    mask.survives.resize(ci.models.size() * mask.n_electrodes * mask.n_bins);
    for (std::size_t m = 0; m < ci.models.size(); ++m)
        for (std::size_t e = 0; e < mask.n_electrodes; ++e)
            for (std::size_t b = 0; b < mask.n_bins; ++b)
                mask.survives[(m * mask.n_electrodes + e) * mask.n_bins + b] =
                    ci.at(m, Split::Validation, e, b).lower > 0.0 ? 1 : 0;
    return mask;
}

void write_ci_csv(const std::filesystem::path& path, const BootstrapCI& ci, std::uint64_t config_hash)
{
    CsvWriter w(path, {"model", "electrode", "bin", "split", "mean", "lower95", "upper95", "config_hash"});
    const auto hash = hex64(config_hash);
    for (std::size_t m = 0; m < ci.models.size(); ++m)
        for (std::size_t e = 0; e < ci.n_electrodes(); ++e)
            for (std::size_t b = 0; b < ci.n_bins; ++b)
                for (int s = 0; s < kSplitCount; ++s) {
                    const auto& c = ci.at(m, static_cast<Split>(s), e, b);
                    w.cell(ci.models[m].model_id).cell(ci.electrode_ids[e]).cell(b).cell(to_string(static_cast<Split>(s)));
                    w.cell(c.mean).cell(c.lower).cell(c.upper).cell(hash);
                    w.end_row();
                }
    w.finish();
}

BootstrapCI read_ci_csv(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto c_m = t.column("model", src), c_e = t.column("electrode", src), c_b = t.column("bin", src),
               c_s = t.column("split", src), c_mean = t.column("mean", src), c_lo = t.column("lower95", src),
               c_hi = t.column("upper95", src);
    BootstrapCI ci;
    std::map<std::string, std::size_t> model_pos;
    std::map<std::int64_t, std::size_t> el_pos;
    std::size_t n_bins = 0;
    for (const auto& r : t.rows) {
        if (!model_pos.contains(r[c_m])) {
            model_pos[r[c_m]] = ci.models.size();
            ci.models.push_back({r[c_m], {}, 0});
        }
        const auto e = parse_int(r[c_e], src);
        if (!el_pos.contains(e)) {
            el_pos[e] = ci.electrode_ids.size();
            ci.electrode_ids.push_back(e);
        }
        n_bins = std::max<std::size_t>(n_bins, static_cast<std::size_t>(parse_int(r[c_b], src)) + 1);
    }
    ci.n_bins = n_bins;
    const auto n_targets = ci.n_electrodes() * n_bins;
    for (auto& m : ci.models)
        for (auto& s : m.cells) s.assign(n_targets, CiCell{std::nan(""), std::nan(""), std::nan("")});
    for (const auto& r : t.rows) {
        int split = -1;
        for (int s = 0; s < kSplitCount; ++s)
            if (r[c_s] == to_string(static_cast<Split>(s))) split = s;
        if (split < 0) throw DataError(fmt::format("{}: unknown split '{}'", src, r[c_s]));
        const auto m = model_pos.at(r[c_m]);
        const auto e = el_pos.at(parse_int(r[c_e], src));
        const auto b = static_cast<std::size_t>(parse_int(r[c_b], src));
        ci.models[m].cells[split][e * n_bins + b] = {parse_double(r[c_mean], src), parse_double(r[c_lo], src),
                                                     parse_double(r[c_hi], src)};
    }
    for (const auto& m : ci.models)
        for (const auto& s : m.cells)
            for (const auto& c : s)
                if (std::isnan(c.mean)) throw DataError(src + ": confidence-interval table is incomplete");
    return ci;
}

void write_survivors_csv(const std::filesystem::path& path, const SurvivorMask& mask,
                         std::span<const std::int64_t> electrode_ids, std::uint64_t config_hash)
{
    CsvWriter w(path, {"model", "electrode", "bin", "survives", "config_hash"});
    const auto hash = hex64(config_hash);
    for (std::size_t m = 0; m < mask.model_ids.size(); ++m)
        for (std::size_t e = 0; e < mask.n_electrodes; ++e)
            for (std::size_t b = 0; b < mask.n_bins; ++b) {
                w.cell(mask.model_ids[m]).cell(electrode_ids[e]).cell(b).cell(mask.at(m, e, b)).cell(hash);
                w.end_row();
            }
    w.finish();
}

}  // namespace mmenc

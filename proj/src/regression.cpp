#include "mmenc/regression.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mmenc/error.hpp"
#include "mmenc/parallel.hpp"

namespace mmenc {

RidgeConfig RidgeConfig::log_grid(double lo, double hi, int count)
{
    if (!(lo > 0) || !(hi >= lo) || count < 1) throw ConfigError("invalid lambda grid bounds");
    RidgeConfig c;
    if (count == 1) {
        c.lambda_grid = {lo};
        return c;
    }
    const double step = (std::log10(hi) - std::log10(lo)) / (count - 1);
    for (int i = 0; i < count; ++i) c.lambda_grid.push_back(std::pow(10.0, std::log10(lo) + step * i));
    c.lambda_grid.back() = hi;
    c.lambda_grid.front() = lo;
    return c;
}

void RidgeConfig::validate(bool allow_zero) const
{
    if (lambda_grid.empty()) throw ConfigError("empty lambda grid");
    for (double l : lambda_grid)
        if (!(allow_zero ? l >= 0 : l > 0)) throw ConfigError(fmt::format("lambda {} not allowed in grid", l));
}

std::size_t ScoreTensor::model_index(const std::string& model_id) const
{
    for (std::size_t m = 0; m < models.size(); ++m)
        if (models[m].model_id == model_id) return m;
    throw DataError(fmt::format("model '{}' not in score tensor", model_id));
}

Eigen::MatrixXd cross_validated_scores(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                                       const FoldPlan& plan, double lambda, const std::string& context,
                                       double rcond_tolerance)
{
    const DesignMoments moments(features, targets);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(kSplitCount, targets.cols());
    Eigen::MatrixXd fold_scores(kSplitCount, targets.cols());
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const auto system = FoldSystem::build(moments, plan.folds[f]);
        if (!system.score(lambda, {}, fold_scores, rcond_tolerance))
            throw NumericalError(fmt::format("non-finite predictions for {} at lambda={} fold={}", context, lambda, f));
        sum += fold_scores;
    }
    return sum / static_cast<double>(plan.folds.size());
}

namespace {

struct LayerJob
{
    std::size_t model;
    std::size_t layer;
};

/// Mean of a score row over each electrode's bins.
std::vector<double> electrode_means(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::size_t n_el, std::size_t n_bins)
{
    std::vector<double> means(n_el);
    for (std::size_t e = 0; e < n_el; ++e)
        means[e] = row.segment(static_cast<Eigen::Index>(e * n_bins), static_cast<Eigen::Index>(n_bins)).mean();
    return means;
}

}  // namespace

ScoreTensor run_regression(const std::vector<ModelLayers>& models, const Eigen::MatrixXd& targets,
                           std::vector<std::int64_t> electrode_ids, std::size_t n_bins, const FoldPlan& plan,
                           const RidgeConfig& config, unsigned threads)
{
    config.validate();
    const std::size_t n_el = electrode_ids.size();
    const auto n_targets = static_cast<Eigen::Index>(n_el * n_bins);
    if (targets.cols() != n_targets)
        throw DataError(fmt::format("targets have {} columns, expected {} electrodes x {} bins", targets.cols(), n_el, n_bins));
    if (targets.rows() != plan.n_events)
        throw DataError(fmt::format("targets have {} events, fold plan {}", targets.rows(), plan.n_events));

    ScoreTensor out;
    out.electrode_ids = std::move(electrode_ids);
    out.n_bins = n_bins;
    out.lambda_grid = config.lambda_grid;

    std::vector<LayerJob> jobs;
    for (std::size_t m = 0; m < models.size(); ++m) {
        if (models[m].layers.empty()) throw DataError(fmt::format("model '{}' has no layers", models[m].model_id));
        ModelScores ms;
        ms.model_id = models[m].model_id;
        for (std::size_t l = 0; l < models[m].layers.size(); ++l) {
            const auto& layer = models[m].layers[l];
            if (layer.n_events() != targets.rows())
                throw DataError(fmt::format("{}/{} has {} events, responses {}", layer.model_id, layer.layer_id,
                                            layer.n_events(), targets.rows()));
            ms.layers.push_back({layer.layer_id, {}, {}});
            jobs.push_back({m, l});
        }
        out.models.push_back(std::move(ms));
    }

    const auto n_lambda = config.lambda_grid.size();
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const auto [m, l] = jobs[j];
        const auto& layer = models[m].layers[l];
        const DesignMoments moments(layer.values, targets);

        // [lambda] -> 3 x T fold sums, accumulated in fold order.
        std::vector<Eigen::MatrixXd> sums(n_lambda, Eigen::MatrixXd::Zero(kSplitCount, n_targets));
        Eigen::MatrixXd fold_scores(kSplitCount, n_targets);
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            const auto system = FoldSystem::build(moments, plan.folds[f]);
            for (std::size_t k = 0; k < n_lambda; ++k) {
                if (!system.score(config.lambda_grid[k], {}, fold_scores, config.rcond_tolerance))
                    throw NumericalError(fmt::format("non-finite predictions for {}/{} at lambda={} fold={}",
                                                     layer.model_id, layer.layer_id, config.lambda_grid[k], f));
                sums[k] += fold_scores;
            }
        }
        const double k_folds = static_cast<double>(plan.folds.size());
        for (auto& s : sums) s /= k_folds;

        auto& ls = out.models[m].layers[l];
        ls.chosen_lambda.assign(n_el, 0);
        std::vector<double> best(n_el, -std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < n_lambda; ++k) {
            const auto means = electrode_means(sums[k].row(static_cast<int>(Split::Validation)), n_el, n_bins);
            for (std::size_t e = 0; e < n_el; ++e)
                if (means[e] > best[e]) {
                    best[e] = means[e];
                    ls.chosen_lambda[e] = static_cast<int>(k);
                }
        }
        for (int s = 0; s < kSplitCount; ++s) {
            ls.r[s].resize(static_cast<std::size_t>(n_targets));
            for (std::size_t e = 0; e < n_el; ++e)
                for (std::size_t b = 0; b < n_bins; ++b) {
                    const auto t = static_cast<Eigen::Index>(e * n_bins + b);
                    ls.r[s][static_cast<std::size_t>(t)] = sums[static_cast<std::size_t>(ls.chosen_lambda[e])](s, t);
                }
        }
    });

    for (auto& ms : out.models) {
        ms.chosen_layer.assign(n_el, 0);
        for (std::size_t e = 0; e < n_el; ++e) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < ms.layers.size(); ++l) {
                const auto& v = ms.layers[l].r[static_cast<int>(Split::Validation)];
                double mean = 0;
                for (std::size_t b = 0; b < n_bins; ++b) mean += v[e * n_bins + b];
                mean /= static_cast<double>(n_bins);
                if (mean > best) {
                    best = mean;
                    ms.chosen_layer[e] = static_cast<int>(l);
                }
            }
        }
    }
    return out;
}

}  // namespace mmenc

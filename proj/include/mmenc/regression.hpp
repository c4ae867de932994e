#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mmenc/feature_store.hpp"
#include "mmenc/folds.hpp"
#include "mmenc/ridge.hpp"

namespace mmenc {

struct RidgeConfig
{
    std::vector<double> lambda_grid;
    double rcond_tolerance = 1e-12;

    /// `count` log-spaced values from lo to hi inclusive.
    static RidgeConfig log_grid(double lo = 0.1, double hi = 1e6, int count = 8);
    /// All lambdas must be positive unless `allow_zero` (oracle tests only).
    void validate(bool allow_zero = false) const;
};

/// All layers of one model, already projected if needed.
struct ModelLayers
{
    std::string model_id;
    std::vector<FeatureMatrix> layers;
};

struct LayerScores
{
    std::string layer_id;
    std::array<std::vector<double>, kSplitCount> r;  // [split][electrode * n_bins + bin] at the chosen lambda
    std::vector<int> chosen_lambda;                  // per electrode, index into the grid
};

struct ModelScores
{
    std::string model_id;
    std::vector<LayerScores> layers;
    std::vector<int> chosen_layer;  // per electrode
};

/// Fold-averaged Pearson scores by (model, layer, split, electrode, bin) with
/// the validation-selected lambda and layer.
struct ScoreTensor
{
    std::vector<std::int64_t> electrode_ids;
    std::size_t n_bins = 0;
    std::vector<double> bin_centers_ms;
    std::vector<double> lambda_grid;
    std::vector<ModelScores> models;

    std::size_t n_electrodes() const { return electrode_ids.size(); }
    std::size_t model_index(const std::string& model_id) const;

    std::span<const double> curve(std::size_t model, std::size_t layer, Split split, std::size_t electrode) const
    {
        const auto& v = models[model].layers[layer].r[static_cast<int>(split)];
        return std::span<const double>(v).subspan(electrode * n_bins, n_bins);
    }
    /// Score curve of the model's chosen layer.
    std::span<const double> chosen_curve(std::size_t model, Split split, std::size_t electrode) const
    {
        return curve(model, static_cast<std::size_t>(models[model].chosen_layer[electrode]), split, electrode);
    }
};

/// Cross-validated ridge for every (model, layer, lambda): lambda is chosen per
/// (model, layer, electrode) by the bin-averaged validation score, then the
/// layer per (model, electrode) by the same criterion; ties go to the lower
/// index. `targets` is n_events x (n_electrodes * n_bins).
ScoreTensor run_regression(const std::vector<ModelLayers>& models, const Eigen::MatrixXd& targets,
                           std::vector<std::int64_t> electrode_ids, std::size_t n_bins, const FoldPlan& plan,
                           const RidgeConfig& config, unsigned threads = 1);

/// Fold-averaged scores (3 x T, or 3 x |cols|) of one design at one lambda.
/// Throws NumericalError naming `context`, lambda and fold on failure.
Eigen::MatrixXd cross_validated_scores(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                                       const FoldPlan& plan, double lambda, const std::string& context,
                                       double rcond_tolerance = 1e-12);

}  // namespace mmenc

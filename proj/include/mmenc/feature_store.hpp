#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mmenc {

/// Layer activations for one (model, layer): one row per event.
struct FeatureMatrix
{
    std::string model_id;
    std::string layer_id;
    Eigen::MatrixXd values;  // n_events x D
    bool projected = false;
    std::uint64_t seed = 0;

    Eigen::Index n_events() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }
};

/// Smallest p with p >= 4 ln(n) / (eps^2/2 - eps^3/3).
std::size_t jl_dimension(std::size_t n, double epsilon);

struct ProjectionPlan
{
    double epsilon = 0.1;
    std::size_t target_dim = 0;
    std::size_t source_dim = 0;
    std::uint64_t seed = 0;

    bool is_identity() const { return source_dim <= target_dim; }
};

ProjectionPlan plan_projection(std::size_t n_events, std::size_t source_dim, double epsilon, std::uint64_t seed);

/// Sparse ternary matrix R (D x p), stored by target column. Entries are
/// +-sqrt(sqrt(D)/p) with probability 1/(2 sqrt D) each, zero otherwise.
struct SparseProjection
{
    std::size_t source_dim = 0;
    std::size_t target_dim = 0;
    double magnitude = 0.0;
    std::vector<std::size_t> col_offsets;  // target_dim + 1
    std::vector<std::uint32_t> rows;       // source index per nonzero
    std::vector<std::int8_t> signs;        // +1 / -1 per nonzero

    std::size_t nonzeros() const { return rows.size(); }
    Eigen::MatrixXd dense() const;
};

/// Regenerates R for (plan.seed, layer_id, D, p). Source row d draws its
/// nonzero positions by geometric skipping over Philox stream (layer, d), which
/// is an exact simulation of i.i.d. Bernoulli placement.
SparseProjection projection_matrix(const ProjectionPlan& plan, std::string_view layer_id);

/// F R, or F unchanged when the plan is the identity. Throws DataError on
/// non-finite input.
FeatureMatrix sparse_projection(const FeatureMatrix& features, const ProjectionPlan& plan, unsigned threads = 1);

/// Column standardisation fitted on a training split (population std;
/// zero-variance columns get scale 1).
struct Standardizer
{
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd>& train);
    Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

}  // namespace mmenc

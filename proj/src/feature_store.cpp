#include "mmenc/feature_store.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mmenc/error.hpp"
#include "mmenc/parallel.hpp"
#include "mmenc/rng.hpp"

namespace mmenc {

std::size_t jl_dimension(std::size_t n, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError(fmt::format("epsilon {} outside (0, 1)", epsilon));
    if (n < 2) throw ConfigError("jl_dimension needs at least 2 events");
    const double denom = epsilon * epsilon / 2.0 - epsilon * epsilon * epsilon / 3.0;
    return static_cast<std::size_t>(std::ceil(4.0 * std::log(static_cast<double>(n)) / denom));
}

ProjectionPlan plan_projection(std::size_t n_events, std::size_t source_dim, double epsilon, std::uint64_t seed)
{
    return {epsilon, jl_dimension(n_events, epsilon), source_dim, seed};
}

Eigen::MatrixXd SparseProjection::dense() const
{
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(source_dim), static_cast<Eigen::Index>(target_dim));
    for (std::size_t j = 0; j < target_dim; ++j)
        for (auto k = col_offsets[j]; k < col_offsets[j + 1]; ++k)
            r(rows[k], static_cast<Eigen::Index>(j)) = signs[k] * magnitude;
    return r;
}

SparseProjection projection_matrix(const ProjectionPlan& plan, std::string_view layer_id)
{
    const std::size_t d_src = plan.source_dim, p = plan.target_dim;
    if (p == 0) throw ConfigError("projection target dimension is zero");
    const double q = 1.0 / std::sqrt(static_cast<double>(d_src));
    const double log_miss = std::log1p(-q);
    const CounterRng rng(plan.seed);
    const std::uint64_t layer_key = fnv1a64(layer_id);

    // Pass 1: nonzeros by source row, generated row-wise (each row its own stream).
    std::vector<std::vector<std::uint32_t>> positions(d_src);
    std::vector<std::vector<std::int8_t>> row_signs(d_src);
    for (std::size_t d = 0; d < d_src; ++d) {
        const auto stream = stream_key(layer_key, d);
        std::uint64_t counter = 0;
        std::int64_t j = -1;
        for (;;) {
            const auto b = rng.block(stream, counter++);
            const double u = (static_cast<double>(b[0] >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
            const double gap = q >= 1.0 ? 0.0 : std::floor(std::log(u) / log_miss);
            if (gap >= static_cast<double>(p)) break;
            j += static_cast<std::int64_t>(gap) + 1;
            if (j >= static_cast<std::int64_t>(p)) break;
            positions[d].push_back(static_cast<std::uint32_t>(j));
            row_signs[d].push_back((b[1] >> 63) ? std::int8_t{-1} : std::int8_t{1});
        }
    }

    // Pass 2: transpose to column-major storage, rows ascending within a column.
    SparseProjection r;
    r.source_dim = d_src;
    r.target_dim = p;
    r.magnitude = std::sqrt(std::sqrt(static_cast<double>(d_src)) / static_cast<double>(p));
    r.col_offsets.assign(p + 1, 0);
    for (const auto& row : positions)
        for (auto j : row) ++r.col_offsets[j + 1];
    for (std::size_t j = 0; j < p; ++j) r.col_offsets[j + 1] += r.col_offsets[j];
    r.rows.resize(r.col_offsets[p]);
    r.signs.resize(r.col_offsets[p]);
    std::vector<std::size_t> fill(r.col_offsets.begin(), r.col_offsets.end() - 1);
    for (std::size_t d = 0; d < d_src; ++d)
        for (std::size_t k = 0; k < positions[d].size(); ++k) {
            const auto slot = fill[positions[d][k]]++;
            r.rows[slot] = static_cast<std::uint32_t>(d);
            r.signs[slot] = row_signs[d][k];
        }
    return r;
}

FeatureMatrix sparse_projection(const FeatureMatrix& features, const ProjectionPlan& plan, unsigned threads)
{
    if (static_cast<std::size_t>(features.dim()) != plan.source_dim)
        throw ConfigError(fmt::format("projection plan expects D={}, layer {} has D={}", plan.source_dim,
                                      features.layer_id, features.dim()));
    if (!features.values.allFinite())
        throw DataError(fmt::format("non-finite features in {}/{}", features.model_id, features.layer_id));
    if (plan.is_identity()) return features;

    const auto r = projection_matrix(plan, features.layer_id);
    FeatureMatrix out;
    out.model_id = features.model_id;
    out.layer_id = features.layer_id;
    out.projected = true;
    out.seed = plan.seed;
    out.values.resize(features.n_events(), static_cast<Eigen::Index>(plan.target_dim));
    parallel_for(plan.target_dim, threads, [&](std::size_t j) {
        auto col = out.values.col(static_cast<Eigen::Index>(j));
        col.setZero();
        for (auto k = r.col_offsets[j]; k < r.col_offsets[j + 1]; ++k) {
            if (r.signs[k] > 0)
                col += features.values.col(r.rows[k]);
            else
                col -= features.values.col(r.rows[k]);
        }
        col *= r.magnitude;
    });
    return out;
}

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd>& train)
{
    const auto n = train.rows();
    Standardizer s;
    s.mean.resize(train.cols());
    s.scale.resize(train.cols());
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        const auto col = train.col(c);
        if (n == 0 || col.maxCoeff() == col.minCoeff()) {
            s.mean(c) = n == 0 ? 0.0 : col(0);
            s.scale(c) = 1.0;
            continue;
        }
        const double mu = col.mean();
        const double var = (col.array() - mu).square().sum() / static_cast<double>(n);
        s.mean(c) = mu;
        s.scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const
{
    return (x.rowwise() - mean).array().rowwise() / scale.array();
}

}  // namespace mmenc

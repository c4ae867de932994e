#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Dense>
#include <fmt/ostream.h>

#include "mmenc/comparison.hpp"
#include "mmenc/feature_store.hpp"
#include "mmenc/pipeline.hpp"
#include "mmenc/ridge.hpp"
#include "mmenc/rng.hpp"

namespace mmenc {

namespace {

Eigen::MatrixXd random_matrix(const CounterRng& rng, std::uint64_t stream, Eigen::Index r, Eigen::Index c)
{
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r * c; ++i) m.data()[i] = rng.normal(stream, static_cast<std::uint64_t>(i));
    return m;
}

double ridge_check()
{
    const CounterRng rng(11);
    double worst = 0.0;
    const double lambdas[] = {0.1, 1.0, 10.0};
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto n = static_cast<Eigen::Index>(12 + rng.below(39, 1, t));
        const auto d = static_cast<Eigen::Index>(1 + rng.below(10, 2, t));
        const auto p = random_matrix(rng, stream_key(3, t), n, d);
        const auto y = random_matrix(rng, stream_key(4, t), n, 3);
        const double lambda = lambdas[t % 3];
        const Eigen::MatrixXd a = p.transpose() * p + lambda * Eigen::MatrixXd::Identity(d, d);
        const Eigen::MatrixXd expect = a.inverse() * (p.transpose() * y);
        const auto got = ridge_fit(p, y, lambda);
        worst = std::max(worst, (got - expect).norm() / expect.norm());
    }
    return worst;
}

double pearson_check()
{
    const CounterRng rng(12);
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const auto n = static_cast<std::size_t>(3 + rng.below(200, 1, t));
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.normal(stream_key(2, t), i);
            y[i] = 0.5 * x[i] + rng.normal(stream_key(3, t), i);
        }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += x[i];
            my += y[i];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        worst = std::max(worst, std::abs(pearson(x, y).r - sxy / std::sqrt(sxx * syy)));
    }
    return worst;
}

bool bh_check()
{
    const CounterRng rng(13);
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const auto m = static_cast<std::size_t>(1 + rng.below(64, 1, t));
        std::vector<double> p(m);
        for (std::size_t i = 0; i < m; ++i) {
            // Coarse grid so ties occur.
            p[i] = std::floor(rng.uniform(stream_key(2, t), i) * 40.0) / 40.0 * (t % 2 ? 1.0 : 0.2);
        }
        const auto fdr = fdr_adjust(p, 0.05);
        const double md = static_cast<double>(m);
        double threshold = -1.0;
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t k = 0;
            for (std::size_t l = 0; l < m; ++l) k += p[l] <= p[j] ? 1 : 0;
            if (p[j] <= static_cast<double>(k) * 0.05 / md) threshold = std::max(threshold, p[j]);
        }
        for (std::size_t i = 0; i < m; ++i) {
            double adj = 1.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (p[j] < p[i]) continue;
                std::size_t k = 0;
                for (std::size_t l = 0; l < m; ++l) k += p[l] <= p[j] ? 1 : 0;
                adj = std::min(adj, md * p[j] / static_cast<double>(k));
            }
            if (fdr.adjusted[i] != adj || fdr.rejected[i] != (p[i] <= threshold)) return false;
        }
    }
    return true;
}

double jl_check()
{
    const std::size_t n = 200, d = 10000;
    const CounterRng rng(14);
    FeatureMatrix f{"selfcheck", "jl", random_matrix(rng, 1, n, d), false, 0};
    const auto plan = plan_projection(n, d, 0.2, 99);
    const auto g = sparse_projection(f, plan, 1).values;
    std::size_t ok = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double before = (f.values.row(i) - f.values.row(j)).squaredNorm();
            const double after = (g.row(i) - g.row(j)).squaredNorm();
            ok += (after >= 0.8 * before && after <= 1.2 * before) ? 1 : 0;
            ++total;
        }
    return static_cast<double>(ok) / static_cast<double>(total);
}

}  // namespace

bool selfcheck(std::ostream& out)
{
    bool all = true;
    const auto line = [&](bool pass, std::string_view name, const std::string& detail) {
        all = all && pass;
        fmt::print(out, "{} {:<8} {}\n", pass ? "PASS" : "FAIL", name, detail);
    };
    const double ridge = ridge_check();
    line(ridge <= 1e-8, "ridge", fmt::format("max relative error {:.3e} over 100 systems", ridge));
    const double pr = pearson_check();
    line(pr <= 1e-12, "pearson", fmt::format("max abs error {:.3e} over 1000 vectors", pr));
    line(bh_check(), "bh", "1000 random p-vectors against the brute-force step-up rule");
    const double jl = jl_check();
    line(jl >= 0.99, "jl", fmt::format("{:.4f} of pairwise distances within 1 +- 0.2", jl));
    return all;
}

}  // namespace mmenc

#include "mmenc/ridge.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "mmenc/error.hpp"
#include "mmenc/feature_store.hpp"

namespace mmenc {

Eigen::MatrixXd ridge_fit(const Eigen::Ref<const Eigen::MatrixXd>& p, const Eigen::Ref<const Eigen::MatrixXd>& y,
                          double lambda, double rcond_tolerance)
{
    if (p.rows() != y.rows()) throw DataError(fmt::format("ridge_fit: {} design rows vs {} target rows", p.rows(), y.rows()));
    if (lambda < 0) throw ConfigError("ridge penalty must be non-negative");
    Eigen::MatrixXd gram = p.transpose() * p;
    gram.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success || !(llt.rcond() > rcond_tolerance))
        throw NumericalError(fmt::format("singular ridge system at lambda={}", lambda));
    return llt.solve(p.transpose() * y);
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw DataError(fmt::format("pearson: length mismatch {} vs {}", x.size(), y.size()));
    if (x.size() < 2) throw DataError("pearson: need at least 2 observations");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return {0.0, true};
    return {sxy / std::sqrt(sxx * syy), false};
}

Eigen::RowVectorXd pearson_columns(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b)
{
    const Eigen::MatrixXd ac = a.rowwise() - a.colwise().mean();
    const Eigen::MatrixXd bc = b.rowwise() - b.colwise().mean();
    const Eigen::ArrayXXd num = (ac.array() * bc.array()).colwise().sum();
    const Eigen::ArrayXXd den = (ac.colwise().squaredNorm().array() * bc.colwise().squaredNorm().array()).sqrt();
    Eigen::RowVectorXd r(a.cols());
    for (Eigen::Index c = 0; c < a.cols(); ++c) r(c) = den(0, c) > 0.0 ? num(0, c) / den(0, c) : 0.0;
    return r;
}

const char* to_string(Split s)
{
    switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "val";
    case Split::Test: return "test";
    }
    return "?";
}

DesignMoments::DesignMoments(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y)
{
    if (x.rows() != y.rows()) throw DataError(fmt::format("design has {} rows, targets {}", x.rows(), y.rows()));
    x_ = x.rowwise() - x.colwise().mean();
    y_ = y.rowwise() - y.colwise().mean();
    xty_.noalias() = x_.transpose() * y_;
    y_sum_ = y_.colwise().sum();
    y_sq_ = y_.colwise().squaredNorm();
}

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& m, std::span<const Eigen::Index> cols)
{
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(cols[i]);
    return out;
}

}  // namespace

FoldSystem FoldSystem::build(const DesignMoments& m, const Fold& fold)
{
    const auto x_train = gather_rows(m.x(), fold.train);
    const auto std_fit = Standardizer::fit(x_train);
    const auto x_train_std = std_fit.apply(x_train);

    FoldSystem s;
    s.gram.noalias() = x_train_std.transpose() * x_train_std;

    const auto xv = gather_rows(m.x(), fold.val);
    const auto xt = gather_rows(m.x(), fold.test);
    s.y_val = gather_rows(m.y(), fold.val);
    s.y_test = gather_rows(m.y(), fold.test);

    // Training cross-product and target moments = full data minus held-out rows.
    Eigen::MatrixXd xty = m.xty();
    xty.noalias() -= xv.transpose() * s.y_val;
    xty.noalias() -= xt.transpose() * s.y_test;
    const Eigen::RowVectorXd y_sum = m.y_sum() - s.y_val.colwise().sum() - s.y_test.colwise().sum();
    const Eigen::RowVectorXd y_sq = m.y_sq() - s.y_val.colwise().squaredNorm() - s.y_test.colwise().squaredNorm();
    const double n_train = static_cast<double>(fold.train.size());

    s.cross = xty - std_fit.mean.transpose() * y_sum;
    s.cross.array().colwise() /= std_fit.scale.transpose().array();
    s.y_ss = (y_sq.array() - y_sum.array().square() / n_train).max(0.0).matrix();

    s.x_val = std_fit.apply(xv);
    s.x_test = std_fit.apply(xt);
    return s;
}

bool FoldSystem::score(double lambda, std::span<const Eigen::Index> cols, Eigen::Ref<Eigen::MatrixXd> out,
                       double rcond_tolerance) const
{
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success || !(llt.rcond() > rcond_tolerance)) return false;

    const bool all = cols.empty();
    const Eigen::MatrixXd c = all ? cross : gather_cols(cross, cols);
    const Eigen::MatrixXd beta = llt.solve(c);
    if (!beta.allFinite()) return false;

    // Training r from moments: predictions have zero mean on the training rows,
    // so cov = b'c and var = b'Gb.
    const Eigen::MatrixXd gb = gram * beta;
    const Eigen::ArrayXXd num = (beta.array() * c.array()).colwise().sum();
    const Eigen::ArrayXXd var_hat = (beta.array() * gb.array()).colwise().sum();
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
        const double ss = all ? y_ss(j) : y_ss(cols[static_cast<std::size_t>(j)]);
        const double den = std::sqrt(var_hat(0, j) * ss);
        out(static_cast<int>(Split::Train), j) = den > 0.0 ? num(0, j) / den : 0.0;
    }

    const Eigen::MatrixXd pred_val = x_val * beta;
    const Eigen::MatrixXd pred_test = x_test * beta;
    if (!pred_val.allFinite() || !pred_test.allFinite()) return false;
    if (all) {
        out.row(static_cast<int>(Split::Validation)) = pearson_columns(pred_val, y_val);
        out.row(static_cast<int>(Split::Test)) = pearson_columns(pred_test, y_test);
    } else {
        out.row(static_cast<int>(Split::Validation)) = pearson_columns(pred_val, gather_cols(y_val, cols));
        out.row(static_cast<int>(Split::Test)) = pearson_columns(pred_test, gather_cols(y_test, cols));
    }
    return true;
}

}  // namespace mmenc

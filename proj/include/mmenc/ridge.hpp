#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mmenc/folds.hpp"

namespace mmenc {

/// B = (P'P + lambda I)^-1 P'Y via Cholesky of the Gram matrix, shared across
/// all target columns. lambda = 0 is accepted (oracle use); a singular system
/// throws NumericalError.
Eigen::MatrixXd ridge_fit(const Eigen::Ref<const Eigen::MatrixXd>& p, const Eigen::Ref<const Eigen::MatrixXd>& y,
                          double lambda, double rcond_tolerance = 1e-12);

struct PearsonResult
{
    double r = 0.0;
    bool degenerate = false;  // one side had zero variance; r reported as 0
};

PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Column-wise Pearson r between equally shaped matrices; degenerate columns give 0.
Eigen::RowVectorXd pearson_columns(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                   const Eigen::Ref<const Eigen::MatrixXd>& b);

enum class Split : int
{
    Train = 0,
    Validation = 1,
    Test = 2
};
inline constexpr int kSplitCount = 3;
const char* to_string(Split s);

/// Cross-products of one design (features X, targets Y) over all rows, kept so
/// each fold's training statistics follow by subtracting its held-out rows.
/// Both sides are shifted by their full-data column means first, which leaves
/// standardised fits unchanged and limits cancellation.
class DesignMoments
{
public:
    DesignMoments(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y);

    const Eigen::MatrixXd& x() const { return x_; }
    const Eigen::MatrixXd& y() const { return y_; }
    const Eigen::MatrixXd& xty() const { return xty_; }
    const Eigen::RowVectorXd& y_sum() const { return y_sum_; }
    const Eigen::RowVectorXd& y_sq() const { return y_sq_; }

private:
    Eigen::MatrixXd x_;
    Eigen::MatrixXd y_;
    Eigen::MatrixXd xty_;
    Eigen::RowVectorXd y_sum_;
    Eigen::RowVectorXd y_sq_;
};

/// Everything needed to score any lambda on one fold: the standardised
/// training Gram matrix and cross-product, plus standardised held-out rows.
/// Standardisation is fitted on the training rows only.
struct FoldSystem
{
    Eigen::MatrixXd gram;       // p x p
    Eigen::MatrixXd cross;      // p x T
    Eigen::RowVectorXd y_ss;    // centred training sum of squares per target
    Eigen::MatrixXd x_val, x_test;
    Eigen::MatrixXd y_val, y_test;

    static FoldSystem build(const DesignMoments& m, const Fold& fold);

    /// Per-split Pearson r (3 x |cols|) for one lambda. `cols` selects target
    /// columns (all when empty). Returns false if the solve produced
    /// non-finite values.
    bool score(double lambda, std::span<const Eigen::Index> cols, Eigen::Ref<Eigen::MatrixXd> out,
               double rcond_tolerance = 1e-12) const;
};

}  // namespace mmenc

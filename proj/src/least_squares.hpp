#pragma once

#include <vector>

#include <Eigen/Dense>

namespace nrpm::detail {

struct LeastSquaresSolution {
    Eigen::VectorXd coefficients;
    double rss = 0.0;
    bool full_rank = true;
};

/// Least-squares solve of design * c = rhs. Columns are equilibrated before a
/// column-pivoting QR; a rank-deficient system falls back to the
/// minimum-norm solution of the original (unscaled) system.
LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs);

/// Leave-one-out predictions yhat_i of a model refitted without row i, via
/// the hat-matrix identity. Returns false if any row has leverage ~1 (the
/// reduced system would be rank-deficient); the caller must refit then.
bool leave_one_out_predictions(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs,
                               Eigen::VectorXd& predictions);

}  // namespace nrpm::detail

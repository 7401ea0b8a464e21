#include "least_squares.hpp"

#include <cmath>

namespace nrpm::detail {

namespace {

Eigen::VectorXd column_scales(const Eigen::MatrixXd& design) {
    Eigen::VectorXd scales(design.cols());
    for (Eigen::Index c = 0; c < design.cols(); ++c) {
        const double m = design.col(c).cwiseAbs().maxCoeff();
        scales(c) = m > 0.0 ? m : 1.0;
    }
    return scales;
}

constexpr double kLeverageLimit = 1.0 - 1e-10;

}  // namespace

LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs) {
    LeastSquaresSolution out;
    const Eigen::VectorXd scales = column_scales(design);
    const Eigen::MatrixXd scaled = design * scales.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    if (qr.rank() == design.cols()) {
        out.coefficients = qr.solve(rhs).cwiseQuotient(scales);
    } else {
        out.full_rank = false;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
        out.coefficients = cod.solve(rhs);
    }
    out.rss = (design * out.coefficients - rhs).squaredNorm();
    return out;
}

bool leave_one_out_predictions(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs,
                               Eigen::VectorXd& predictions) {
    const Eigen::Index n = design.rows();
    const Eigen::VectorXd scales = column_scales(design);
    const Eigen::MatrixXd scaled = design * scales.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    const Eigen::Index rank = qr.rank();
    if (rank != design.cols()) {
        return false;
    }
    const Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
    const Eigen::VectorXd leverage = thin_q.rowwise().squaredNorm();
    if (leverage.maxCoeff() > kLeverageLimit) {
        return false;
    }
    const Eigen::VectorXd fitted = scaled * qr.solve(rhs);
    predictions.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double residual = rhs(i) - fitted(i);
        predictions(i) = rhs(i) - residual / (1.0 - leverage(i));
    }
    return true;
}

}  // namespace nrpm::detail

#include "pdmdp/numerics.hpp"

#include <cmath>
#include <limits>

namespace pdmdp::numerics {

Vec solve_linear(const Mat& A, const Vec& b) {
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw SolverError("solve_linear: shape mismatch");
    if (A.rows() == 0) return Vec(0);

    Eigen::PartialPivLU<Mat> lu(A);
    const Vec diag = lu.matrixLU().diagonal();
    const double scale = A.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < diag.size(); ++k) {
        if (!(std::abs(diag[k]) > scale * 1e-14))
            throw SingularMatrix("solve_linear: vanishing pivot at index " +
                                 std::to_string(k));
    }
    return lu.solve(b);
}

double lu_pivot_ratio(const Mat& A) {
    if (A.rows() == 0) return 1.0;
    Eigen::PartialPivLU<Mat> lu(A);
    const Vec diag = lu.matrixLU().diagonal().cwiseAbs();
    const double lo = diag.minCoeff();
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return diag.maxCoeff() / lo;
}

bool is_substochastic(const Mat& P, double tol) {
    if (P.size() == 0) return true;
    if (P.minCoeff() < 0.0) return false;
    return P.rowwise().sum().maxCoeff() <= 1.0 + tol;
}

Vec resolvent_apply(const Mat& P, double gamma, const Vec& b) {
    const Mat A = Mat::Identity(P.rows(), P.cols()) - gamma * P;
    return solve_linear(A, b);
}

bool lemma5_check(const Mat& P, double gamma, int k) {
    const int n = static_cast<int>(P.rows());
    Vec e = Vec::Zero(n);
    e[k] = 1.0;
    const Vec h = resolvent_apply(P, gamma, e);
    for (int i = 0; i < n; ++i) {
        if (i != k && !(h[k] > h[i])) return false;
    }
    return true;
}

bool lemma6_check(const Mat& P, const Vec& c, int k, const Vec& pi, double z,
                  double gamma) {
    const Vec v = resolvent_apply(P, gamma, c);
    if (!(v[k] > z + gamma * pi.dot(v)))
        throw PreconditionViolated("lemma6_check: swap is not improving");

    Mat P_hat = P;
    P_hat.row(k) = pi.transpose();
    Vec c_hat = c;
    c_hat[k] = z;
    const Vec v_hat = resolvent_apply(P_hat, gamma, c_hat);

    return v_hat[k] < c[k] + gamma * P.row(k).dot(v_hat);
}

} // namespace pdmdp::numerics

#pragma once

#include "pdmdp/types.hpp"

namespace pdmdp::numerics {

/// Solves Ax = b by dense LU with partial pivoting. Callers pass I - gamma*P
/// blocks, which are nonsingular for gamma < 1; a vanishing pivot throws
/// SingularMatrix.
Vec solve_linear(const Mat& A, const Vec& b);

/// max |u_kk| / min |u_kk| over the diagonal of U in the partial-pivoting
/// factorization. Used by the test suite to reject ill-conditioned draws.
double lu_pivot_ratio(const Mat& A);

/// True if P is nonnegative with row sums <= 1 + tol.
bool is_substochastic(const Mat& P, double tol = 1e-12);

/// (I - gamma*P)^{-1} b for substochastic P and gamma < 1.
Vec resolvent_apply(const Mat& P, double gamma, const Vec& b);

/// Computes h = (I - gamma*P)^{-1} e_k and checks h_k > h_i for all i != k,
/// which certifies that e_k is the unique stochastic maximizer of pi^T h.
bool lemma5_check(const Mat& P, double gamma, int k);

/// Single-row policy swap check. With v solving v = c + gamma*P*v and the
/// swap (row k -> pi, c_k -> z) improving (v_k > z + gamma*pi^T v), the
/// reevaluated vhat must satisfy vhat_k < c_k + gamma * P.row(k) * vhat,
/// i.e. swapping back is not an improvement. Throws PreconditionViolated if
/// the swap is not improving.
bool lemma6_check(const Mat& P, const Vec& c, int k, const Vec& pi, double z,
                  double gamma);

} // namespace pdmdp::numerics

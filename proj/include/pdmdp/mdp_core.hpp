#pragma once

#include "pdmdp/types.hpp"

namespace pdmdp {

/// c_i(u) + gamma * P_i.(u) v — the one-step lookahead cost of (i, u).
double q_value(const MdpInstance& inst, const ValueFunction& v, int i, int u);

/// Slack of the dual constraint for (i, u): q_value - v_i. Nonnegative at a
/// feasible v, zero on tight constraints.
double constraint_slack(const MdpInstance& inst, const ValueFunction& v,
                        int i, int u);

/// (Tv)_i = min_u q_value(v, i, u).
ValueFunction bellman_backup(const ValueFunction& v, const MdpInstance& inst);

/// Minimizing action per state; ties broken toward the lowest action index.
Policy greedy_policy(const ValueFunction& v, const MdpInstance& inst);

/// Unique solution of v = c(mu) + gamma * P(mu) v.
ValueFunction evaluate_policy(const Policy& mu, const MdpInstance& inst);

/// True iff v_i <= q_value(v, i, u) + tol for every pair.
bool is_dual_feasible(const ValueFunction& v, const MdpInstance& inst,
                      double tol);

/// ||v - Tv||_inf
double bellman_residual(const ValueFunction& v, const MdpInstance& inst);

/// Dual feasible starting point: 0 when min cost >= 0, otherwise the constant
/// vector (min cost / (1 - gamma)), which satisfies every constraint by
/// direct substitution.
ValueFunction initial_feasible_point(const MdpInstance& inst);

} // namespace pdmdp

#pragma once

#include "pdmdp/types.hpp"

namespace pdmdp {

/// Constraints holding with equality at the current dual point, ordered
/// lexicographically by (state, action).
struct TightSet {
    std::vector<StateActionPair> pairs;

    bool contains(const StateActionPair& p) const;
    int size() const { return static_cast<int>(pairs.size()); }
    bool empty() const { return pairs.empty(); }
};

/// Outcome of the ratio test: the step length and every pair achieving it
/// within the tie tolerance, lexicographically ordered.
struct StepResult {
    double theta = 0.0;
    std::vector<StateActionPair> argmin_pairs;
};

/// All (i, u) with |q_value(v,i,u) - v_i| <= tol. Throws InfeasibleInput if
/// any slack is below -tol.
TightSet tight_set(const ValueFunction& v, const MdpInstance& inst,
                   double tol);

/// Feasibility of a direction for the restricted dual: vhat <= 1 + tol
/// componentwise and vhat_i <= gamma * P_i.(u) vhat + tol for every tight
/// pair.
bool drp_feasible(const Vec& vhat, const TightSet& tight,
                  const MdpInstance& inst, double tol);

/// Ratio test over K = { (i,u) : vhat_i - gamma * P_i.(u) vhat > 0 }:
///   theta = min_K slack(i,u) / (vhat_i - gamma * P_i.(u) vhat).
/// Membership in K uses a threshold scaled by ||vhat||_inf so that the
/// result is invariant under positive rescaling of vhat. Throws
/// UnboundedStep when K is empty.
StepResult step_size(const ValueFunction& v, const Vec& vhat,
                     const MdpInstance& inst, double tie_tol,
                     double direction_tol = 1e-12);

} // namespace pdmdp

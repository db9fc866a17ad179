#include "pdmdp/dual_lp.hpp"

#include "pdmdp/mdp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdmdp {

bool TightSet::contains(const StateActionPair& p) const {
    return std::binary_search(pairs.begin(), pairs.end(), p);
}

TightSet tight_set(const ValueFunction& v, const MdpInstance& inst,
                   double tol) {
    TightSet out;
    for (int i = 0; i < inst.n; ++i) {
        for (int u = 0; u < inst.m; ++u) {
            const double slack = constraint_slack(inst, v, i, u);
            if (slack < -tol)
                throw InfeasibleInput(
                    "tight_set: constraint (" + std::to_string(i) + "," +
                    std::to_string(u) + ") violated by " +
                    std::to_string(-slack));
            if (std::abs(slack) <= tol) out.pairs.push_back({i, u});
        }
    }
    // loop order is already lexicographic
    return out;
}

bool drp_feasible(const Vec& vhat, const TightSet& tight,
                  const MdpInstance& inst, double tol) {
    if (vhat.maxCoeff() > 1.0 + tol) return false;
    for (const StateActionPair& p : tight.pairs) {
        const double rhs =
            inst.gamma * inst.trans[p.action].row(p.state).dot(vhat);
        if (vhat[p.state] > rhs + tol) return false;
    }
    return true;
}

StepResult step_size(const ValueFunction& v, const Vec& vhat,
                     const MdpInstance& inst, double tie_tol,
                     double direction_tol) {
    // Threshold on the directional slope scales with the direction so the
    // ratio test is invariant under positive rescaling of vhat.
    const double slope_floor =
        direction_tol * std::max(1.0, vhat.cwiseAbs().maxCoeff());

    struct Candidate {
        StateActionPair pair;
        double ratio;
    };
    std::vector<Candidate> candidates;
    double theta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < inst.n; ++i) {
        for (int u = 0; u < inst.m; ++u) {
            const double slope =
                vhat[i] - inst.gamma * inst.trans[u].row(i).dot(vhat);
            if (slope <= slope_floor) continue;
            const double ratio = constraint_slack(inst, v, i, u) / slope;
            candidates.push_back({{i, u}, ratio});
            theta = std::min(theta, ratio);
        }
    }
    if (candidates.empty())
        throw UnboundedStep("step_size: no constraint limits the step");

    StepResult out;
    out.theta = theta;
    const double width = tie_tol * (1.0 + std::abs(theta));
    for (const Candidate& c : candidates) {
        if (c.ratio - theta <= width) out.argmin_pairs.push_back(c.pair);
    }
    // candidates were scanned in lexicographic order
    return out;
}

} // namespace pdmdp

#include "pdmdp/pd_variants.hpp"

#include "pdmdp/dual_lp.hpp"
#include "pdmdp/mdp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdmdp {

ValueFunction gsj_component_update(const ValueFunction& v, int state,
                                   const MdpInstance& inst) {
    ValueFunction out = v;
    double best = std::numeric_limits<double>::infinity();
    for (int u = 0; u < inst.m; ++u) {
        const double self = inst.trans[u](state, state);
        const double others =
            inst.trans[u].row(state).dot(v) - self * v[state];
        const double value =
            (inst.cost[u][state] + inst.gamma * others) /
            (1.0 - inst.gamma * self);
        best = std::min(best, value);
    }
    out[state] = best;
    return out;
}

UnitStep gsj_as_pd_update(const ValueFunction& v, int state,
                          const MdpInstance& inst, double tight_tol) {
    double theta = std::numeric_limits<double>::infinity();
    for (int u = 0; u < inst.m; ++u) {
        const double slack = constraint_slack(inst, v, state, u);
        if (slack <= tight_tol)
            throw StateAlreadyTight("state " + std::to_string(state) +
                                    " has a tight constraint under action " +
                                    std::to_string(u));
        theta = std::min(
            theta, slack / (1.0 - inst.gamma * inst.trans[u](state, state)));
    }
    UnitStep step;
    step.vhat = Vec::Zero(inst.n);
    step.vhat[state] = 1.0;
    step.theta = theta;
    return step;
}

ValueFunction gs_sweep(const ValueFunction& v, const MdpInstance& inst,
                       std::span<const int> order) {
    ValueFunction out = v;
    auto update = [&](int i) {
        double best = q_value(inst, out, i, 0);
        for (int u = 1; u < inst.m; ++u)
            best = std::min(best, q_value(inst, out, i, u));
        out[i] = best;
    };
    if (order.empty()) {
        for (int i = 0; i < inst.n; ++i) update(i);
        return out;
    }
    std::vector<bool> seen(inst.n, false);
    for (int i : order) {
        if (i < 0 || i >= inst.n || seen[i])
            throw SolverError("gs_sweep: order is not a permutation");
        seen[i] = true;
    }
    for (int i : order) update(i);
    return out;
}

ViStep vi_step(const ValueFunction& v, const MdpInstance& inst,
               double tight_tol) {
    ViStep step;
    step.v_next = bellman_backup(v, inst);
    step.vhat = step.v_next - v;
    step.theta = 1.0;
    // The increment respects every tight-row inequality of the restricted
    // dual; it is not normalized to the unit box, so only those rows are
    // asserted.
    const TightSet tight = tight_set(v, inst, tight_tol);
    for (const StateActionPair& p : tight.pairs) {
        const double rhs =
            inst.gamma * inst.trans[p.action].row(p.state).dot(step.vhat);
        if (step.vhat[p.state] > rhs + tight_tol)
            throw InvariantViolation(
                "vi_step: Bellman increment violates a tight row at state " +
                std::to_string(p.state));
    }
    return step;
}

VariantResult run_variant(const MdpInstance& inst, Variant variant,
                          double tol, long max_sweeps) {
    ValueFunction v = initial_feasible_point(inst);
    long sweeps = 0;
    double residual = bellman_residual(v, inst);
    while (residual > tol) {
        if (sweeps >= max_sweeps)
            throw NotConverged("variant hit the sweep cap at residual " +
                                   std::to_string(residual),
                               v, residual);
        switch (variant) {
        case Variant::vi:
            v = bellman_backup(v, inst);
            break;
        case Variant::gs:
            v = gs_sweep(v, inst);
            break;
        case Variant::gsj:
            for (int i = 0; i < inst.n; ++i) v = gsj_component_update(v, i, inst);
            break;
        case Variant::gsj_alternating:
            v = gsj_component_update(v, static_cast<int>(sweeps % inst.n), inst);
            break;
        }
        ++sweeps;
        residual = bellman_residual(v, inst);
    }
    return {std::move(v), sweeps, residual};
}

} // namespace pdmdp

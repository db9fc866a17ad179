#include "pdmdp/mdp_core.hpp"

#include "pdmdp/numerics.hpp"

#include <cmath>
#include <limits>

namespace pdmdp {

void MdpInstance::validate(double row_tol) const {
    if (n <= 0 || m <= 0)
        throw ValidationError("instance must have positive state and action counts");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ValidationError("gamma must lie in [0, 1), got " +
                              std::to_string(gamma));
    if (static_cast<int>(cost.size()) != m || static_cast<int>(trans.size()) != m)
        throw ValidationError("expected one cost vector and one transition matrix per action");
    for (int u = 0; u < m; ++u) {
        if (cost[u].size() != n)
            throw ValidationError("cost[" + std::to_string(u) + "] has wrong length");
        if (!cost[u].allFinite())
            throw ValidationError("cost[" + std::to_string(u) + "] has non-finite entries");
        if (trans[u].rows() != n || trans[u].cols() != n)
            throw ValidationError("P[" + std::to_string(u) + "] has wrong shape");
        if (!trans[u].allFinite())
            throw ValidationError("P[" + std::to_string(u) + "] has non-finite entries");
        for (int i = 0; i < n; ++i) {
            if (trans[u].row(i).minCoeff() < 0.0)
                throw ValidationError("P[" + std::to_string(u) + "] row " +
                                      std::to_string(i) + " has a negative entry");
            const double sum = trans[u].row(i).sum();
            if (std::abs(sum - 1.0) > row_tol)
                throw ValidationError("P[" + std::to_string(u) + "] row " +
                                      std::to_string(i) + " sums to " +
                                      std::to_string(sum) + ", not 1");
        }
    }
}

double MdpInstance::min_cost() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const Vec& c : cost) lo = std::min(lo, c.minCoeff());
    return lo;
}

double q_value(const MdpInstance& inst, const ValueFunction& v, int i, int u) {
    return inst.cost[u][i] + inst.gamma * inst.trans[u].row(i).dot(v);
}

double constraint_slack(const MdpInstance& inst, const ValueFunction& v,
                        int i, int u) {
    return q_value(inst, v, i, u) - v[i];
}

ValueFunction bellman_backup(const ValueFunction& v, const MdpInstance& inst) {
    ValueFunction out(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        double best = q_value(inst, v, i, 0);
        for (int u = 1; u < inst.m; ++u)
            best = std::min(best, q_value(inst, v, i, u));
        out[i] = best;
    }
    return out;
}

Policy greedy_policy(const ValueFunction& v, const MdpInstance& inst) {
    Policy mu;
    mu.action.resize(inst.n, 0);
    for (int i = 0; i < inst.n; ++i) {
        double best = q_value(inst, v, i, 0);
        for (int u = 1; u < inst.m; ++u) {
            const double q = q_value(inst, v, i, u);
            if (q < best) {
                best = q;
                mu.action[i] = u;
            }
        }
    }
    return mu;
}

ValueFunction evaluate_policy(const Policy& mu, const MdpInstance& inst) {
    Mat A = Mat::Identity(inst.n, inst.n);
    Vec c(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        const int u = mu.action[i];
        A.row(i) -= inst.gamma * inst.trans[u].row(i);
        c[i] = inst.cost[u][i];
    }
    return numerics::solve_linear(A, c);
}

bool is_dual_feasible(const ValueFunction& v, const MdpInstance& inst,
                      double tol) {
    for (int u = 0; u < inst.m; ++u) {
        const Vec slack =
            inst.cost[u] + inst.gamma * (inst.trans[u] * v) - v;
        if (slack.minCoeff() < -tol) return false;
    }
    return true;
}

double bellman_residual(const ValueFunction& v, const MdpInstance& inst) {
    return (v - bellman_backup(v, inst)).cwiseAbs().maxCoeff();
}

ValueFunction initial_feasible_point(const MdpInstance& inst) {
    const double lo = inst.min_cost();
    if (lo >= 0.0) return Vec::Zero(inst.n);
    return Vec::Constant(inst.n, lo / (1.0 - inst.gamma));
}

} // namespace pdmdp

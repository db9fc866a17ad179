#include "pdmdp/policy_iteration.hpp"

#include "pdmdp/mdp_core.hpp"
#include "pdmdp/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace pdmdp {

PiResult sequential_pi(const MdpInstance& inst, const Policy& init,
                       PiRule rule) {
    if (init.size() != inst.n)
        throw ValidationError("sequential_pi: policy has wrong length");
    for (int a : init.action)
        if (a < 0 || a >= inst.m)
            throw ValidationError("sequential_pi: action index out of range");

    Policy mu = init;
    ValueFunction v = evaluate_policy(mu, inst);
    long iters = 0;
    for (;;) {
        const double adv_tol = 1e-9 * (1.0 + v.cwiseAbs().maxCoeff());
        int best_i = -1;
        int best_u = -1;
        double best_adv = adv_tol;
        const bool stop_at_first = rule == PiRule::first_improving;
        for (int i = 0; i < inst.n && !(stop_at_first && best_i >= 0); ++i) {
            for (int u = 0; u < inst.m; ++u) {
                if (u == mu.action[i]) continue;
                const double adv = v[i] - q_value(inst, v, i, u);
                if (adv > best_adv) {
                    best_adv = adv;
                    best_i = i;
                    best_u = u;
                    if (stop_at_first) break;
                }
            }
        }
        if (best_i < 0) break;
        mu.action[best_i] = best_u;
        ++iters;
        v = evaluate_policy(mu, inst);
    }
    return {std::move(v), std::move(mu), iters};
}

std::pair<ValueFunction, Policy>
enumerate_all_policies(const MdpInstance& inst) {
    auto for_each_policy = [&](auto&& fn) {
        Policy mu;
        mu.action.assign(inst.n, 0);
        for (;;) {
            fn(mu);
            int i = 0;
            while (i < inst.n && ++mu.action[i] == inst.m) {
                mu.action[i] = 0;
                ++i;
            }
            if (i == inst.n) break;
        }
    };

    Vec best = Vec::Constant(inst.n, std::numeric_limits<double>::infinity());
    for_each_policy([&](const Policy& mu) {
        best = best.cwiseMin(evaluate_policy(mu, inst));
    });

    // the optimal policy attains the componentwise minimum simultaneously;
    // pick the policy whose value sits closest to it
    Policy arg;
    double gap = std::numeric_limits<double>::infinity();
    for_each_policy([&](const Policy& mu) {
        const double d =
            (evaluate_policy(mu, inst) - best).cwiseAbs().maxCoeff();
        if (d < gap) {
            gap = d;
            arg = mu;
        }
    });
    return {best, arg};
}

// ---------------------------------------------------------------------------
// First-passage subproblem
// ---------------------------------------------------------------------------

FirstPassageInstance extract_first_passage(const MdpInstance& inst,
                                           const std::vector<int>& G) {
    if (G.empty()) throw InvalidStateSet("state set is empty");
    for (int s : G)
        if (s < 0 || s >= inst.n)
            throw InvalidStateSet("state " + std::to_string(s) +
                                  " out of range");
    std::vector<int> sorted = G;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw InvalidStateSet("duplicate state in set");

    const int g = static_cast<int>(sorted.size());
    FirstPassageInstance fp;
    fp.states = std::move(sorted);
    fp.gamma = inst.gamma;
    fp.trans_inside.resize(inst.m);
    fp.exit_mass.resize(inst.m);
    for (int u = 0; u < inst.m; ++u) {
        Mat inside(g, g);
        Vec exit(g);
        for (int k = 0; k < g; ++k) {
            double mass = 0.0;
            for (int l = 0; l < g; ++l) {
                inside(k, l) = inst.trans[u](fp.states[k], fp.states[l]);
                mass += inside(k, l);
            }
            exit[k] = 1.0 - mass;
        }
        fp.trans_inside[u] = std::move(inside);
        fp.exit_mass[u] = std::move(exit);
    }
    return fp;
}

Vec FirstPassageInstance::policy_value(std::span<const int> actions) const {
    const int g = size();
    Mat A = Mat::Identity(g, g);
    Vec rhs(g);
    for (int k = 0; k < g; ++k) {
        const int u = actions[k];
        A.row(k) -= gamma * trans_inside[u].row(k);
        rhs[k] = gamma * exit_mass[u][k];
    }
    return numerics::solve_linear(A, rhs);
}

double FirstPassageInstance::q_value(std::span<const int> actions,
                                     const Vec& value, int k, int u) const {
    (void)actions;
    return gamma * (trans_inside[u].row(k).dot(value) + exit_mass[u][k]);
}

bool FirstPassageInstance::has_improving(const Vec& value, double tol) const {
    for (int k = 0; k < size(); ++k) {
        for (int u = 0; u < num_actions(); ++u) {
            const double q =
                gamma * (trans_inside[u].row(k).dot(value) + exit_mass[u][k]);
            if (q < value[k] - tol) return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

double scherrer_bound(int n, int m, double gamma) {
    if (n < 1 || m < 1 || !(gamma >= 0.0 && gamma < 1.0))
        throw ValidationError("scherrer_bound: invalid parameters");
    const double nn = static_cast<double>(n) * n;
    const double log_term =
        gamma == 0.0 ? 0.0
                     : (2.0 / (1.0 - gamma)) * std::log(1.0 / (1.0 - gamma));
    return nn * (m - 1) * (1.0 + log_term);
}

double naive_cap(int n, int m) {
    double total = 0.0;
    double pow_k = 1.0;
    for (int k = 1; k <= n; ++k) {
        pow_k *= m;
        total += pow_k;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Trace decomposition
// ---------------------------------------------------------------------------

BlockDecomposition decompose_pd_trace(const MdpInstance& inst,
                                      const PdTrace& trace, double tol) {
    BlockDecomposition out;
    ActiveSet active(inst.n);
    FirstPassageInstance fp;
    std::vector<int> fp_actions; // aligned with fp.states
    long block_len = 0;

    auto rebuild_subproblem = [&]() {
        const std::vector<int> G = active.covered();
        if (G.empty()) {
            fp = FirstPassageInstance{};
            fp_actions.clear();
            return;
        }
        fp = extract_first_passage(inst, G);
        fp_actions.resize(fp.size());
        for (int k = 0; k < fp.size(); ++k) {
            for (const StateActionPair& p : active.pairs()) {
                if (p.state == fp.states[k]) fp_actions[k] = p.action;
            }
        }
    };

    for (const PdIterationEvent& ev : trace.events) {
        ++block_len;
        if (!ev.exited) {
            if (active.covers(ev.entering.state))
                throw DecompositionMismatch(
                    "event adds a state that is already covered", ev.iter);
            // close the block: flag when the subproblem still had an
            // improving pair at the moment a new state entered
            bool early = false;
            if (fp.size() > 0) {
                const Vec w = fp.policy_value(fp_actions);
                early = fp.has_improving(w, tol);
            }
            out.block_lengths.push_back(block_len);
            out.early_exit.push_back(early);
            block_len = 0;
            active.add(ev.entering);
            rebuild_subproblem();
        } else {
            if (ev.exited->state != ev.entering.state)
                throw DecompositionMismatch(
                    "exchange crosses states", ev.iter);
            if (!active.contains(*ev.exited))
                throw DecompositionMismatch(
                    "exchange removes a pair that is not active", ev.iter);
            auto it = std::find(fp.states.begin(), fp.states.end(),
                                ev.entering.state);
            if (it == fp.states.end())
                throw DecompositionMismatch(
                    "exchange at a state outside the covered set", ev.iter);
            const int k = static_cast<int>(it - fp.states.begin());

            const Vec before = fp.policy_value(fp_actions);
            fp_actions[k] = ev.entering.action;
            const Vec after = fp.policy_value(fp_actions);
            // a policy-iteration improvement lowers the exit-cost value
            // vector, strictly at the exchanged state
            for (int l = 0; l < fp.size(); ++l) {
                if (after[l] > before[l] + tol)
                    throw DecompositionMismatch(
                        "exchange increased the subproblem value at state " +
                            std::to_string(fp.states[l]),
                        ev.iter);
            }
            if (!(after[k] < before[k]))
                throw DecompositionMismatch(
                    "exchange did not strictly improve the swapped state",
                    ev.iter);
            active.exchange(ev.entering);
        }
    }

    if (block_len != 0)
        throw DecompositionMismatch("trace does not end with a covering event",
                                    trace.events.empty()
                                        ? 0
                                        : trace.events.back().iter);
    return out;
}

BoundReport bound_report(const MdpInstance& inst, const PdTrace& trace) {
    BoundReport report;
    report.n = inst.n;
    report.m = inst.m;
    report.gamma = inst.gamma;
    report.scherrer = scherrer_bound(inst.n, inst.m, inst.gamma);
    report.naive_cap = naive_cap(inst.n, inst.m);
    report.measured_pd_iters = trace.iterations();
    report.per_block_pi_iters =
        decompose_pd_trace(inst, trace).block_lengths;
    return report;
}

std::string to_json(const BoundReport& report) {
    nlohmann::ordered_json j;
    j["n"] = report.n;
    j["m"] = report.m;
    j["gamma"] = report.gamma;
    j["scherrer_bound"] = report.scherrer;
    j["naive_cap"] = report.naive_cap;
    j["measured_pd_iters"] = report.measured_pd_iters;
    j["per_block_pi_iters"] = report.per_block_pi_iters;
    return j.dump();
}

} // namespace pdmdp

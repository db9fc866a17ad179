#include "pdmdp/pd_optimal.hpp"

#include "pdmdp/mdp_core.hpp"
#include "pdmdp/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pdmdp {

// ---------------------------------------------------------------------------
// ActiveSet
// ---------------------------------------------------------------------------

std::vector<int> ActiveSet::covered() const {
    std::vector<int> out;
    out.reserve(pairs_.size());
    for (int i = 0; i < num_states(); ++i)
        if (action_of_[i] >= 0) out.push_back(i);
    return out;
}

std::vector<int> ActiveSet::uncovered() const {
    std::vector<int> out;
    for (int i = 0; i < num_states(); ++i)
        if (action_of_[i] < 0) out.push_back(i);
    return out;
}

void ActiveSet::add(const StateActionPair& p) {
    if (covers(p.state))
        throw SolverError("ActiveSet::add: state already covered");
    pairs_.push_back(p);
    action_of_[p.state] = p.action;
}

StateActionPair ActiveSet::exchange(const StateActionPair& p) {
    auto it = std::find_if(pairs_.begin(), pairs_.end(), [&](const auto& q) {
        return q.state == p.state;
    });
    if (it == pairs_.end())
        throw SolverError("ActiveSet::exchange: state not covered");
    const StateActionPair removed = *it;
    pairs_.erase(it);
    pairs_.push_back(p);
    action_of_[p.state] = p.action;
    return removed;
}

std::pair<ActiveSet, std::optional<StateActionPair>>
update_active_set(const ActiveSet& active, const StateActionPair& entering) {
    if (active.contains(entering))
        throw DuplicatePair("entering pair (" + std::to_string(entering.state) +
                            "," + std::to_string(entering.action) +
                            ") is already active");
    ActiveSet next = active;
    std::optional<StateActionPair> exited;
    if (next.covers(entering.state))
        exited = next.exchange(entering);
    else
        next.add(entering);
    return {std::move(next), exited};
}

// ---------------------------------------------------------------------------
// Optimal direction
// ---------------------------------------------------------------------------

Vec optimal_drp_direction(const ActiveSet& active, const MdpInstance& inst) {
    const int n = inst.n;
    Vec vhat = Vec::Ones(n);
    const int g = active.size();
    if (g == 0) return vhat;

    const auto& H = active.pairs();
    Mat A = Mat::Identity(g, g);
    Vec rhs(g);
    for (int k = 0; k < g; ++k) {
        const int ik = H[k].state;
        const int uk = H[k].action;
        double inside = 0.0;
        for (int l = 0; l < g; ++l) {
            const double p = inst.trans[uk](ik, H[l].state);
            A(k, l) -= inst.gamma * p;
            inside += p;
        }
        // exit mass: rows are stochastic, so 1 - inside
        rhs[k] = inst.gamma * (1.0 - inside);
    }
    const Vec x = numerics::solve_linear(A, rhs);
    for (int k = 0; k < g; ++k) vhat[H[k].state] = x[k];
    return vhat;
}

// ---------------------------------------------------------------------------
// Vertex enumeration for the restricted-dual polytope
// ---------------------------------------------------------------------------

std::vector<Vec> drp_vertices(const TightSet& tight, const MdpInstance& inst,
                              double feas_tol) {
    const int n = inst.n;
    // Constraint list: a^T vhat <= b. First the box rows e_i <= 1, then one
    // row e_i - gamma * P_i.(u) <= 0 per tight pair.
    std::vector<Vec> rows;
    std::vector<double> bounds;
    for (int i = 0; i < n; ++i) {
        Vec a = Vec::Zero(n);
        a[i] = 1.0;
        rows.push_back(a);
        bounds.push_back(1.0);
    }
    for (const StateActionPair& p : tight.pairs) {
        Vec a = Vec::Zero(n);
        a[p.state] = 1.0;
        a -= inst.gamma * inst.trans[p.action].row(p.state).transpose();
        rows.push_back(a);
        bounds.push_back(0.0);
    }

    const int total = static_cast<int>(rows.size());
    std::vector<Vec> vertices;
    std::vector<int> pick(n);
    for (int k = 0; k < n; ++k) pick[k] = k;

    auto emit = [&]() {
        Mat A(n, n);
        Vec b(n);
        for (int k = 0; k < n; ++k) {
            A.row(k) = rows[pick[k]].transpose();
            b[k] = bounds[pick[k]];
        }
        Vec x;
        try {
            x = numerics::solve_linear(A, b);
        } catch (const SingularMatrix&) {
            return;
        }
        for (int r = 0; r < total; ++r) {
            if (rows[r].dot(x) > bounds[r] + feas_tol) return;
        }
        vertices.push_back(std::move(x));
    };

    // odometer over n-subsets of the constraint indices
    for (;;) {
        emit();
        int k = n - 1;
        while (k >= 0 && pick[k] == total - n + k) --k;
        if (k < 0) break;
        ++pick[k];
        for (int l = k + 1; l < n; ++l) pick[l] = pick[l - 1] + 1;
    }
    return vertices;
}

// ---------------------------------------------------------------------------
// Lemma assertions
// ---------------------------------------------------------------------------

void assert_lemma2(const TightSet& tight, const ActiveSet& active,
                   const Vec& vhat, const MdpInstance& inst, long iter,
                   double tol) {
    std::optional<StateActionPair> extra;
    int extras = 0;
    for (const StateActionPair& p : tight.pairs) {
        if (!active.contains(p)) {
            ++extras;
            extra = p;
        }
    }
    if (extras > 1)
        throw AssertionFailure("lemma 2: tight set has " +
                                   std::to_string(extras) +
                                   " pairs outside the active set",
                               iter, extra->state, extra->action);
    if (extras == 1) {
        const double slope =
            vhat[extra->state] -
            inst.gamma * inst.trans[extra->action].row(extra->state).dot(vhat);
        if (!(slope < tol))
            throw AssertionFailure(
                "lemma 2: extra tight pair has nonnegative slope " +
                    std::to_string(slope),
                iter, extra->state, extra->action);
    }
}

void assert_lemma3_lemma4(const Vec& vhat, const TightSet& tight,
                          const MdpInstance& inst, long iter, double tol) {
    // Lemma 3: feasibility of the constructed direction.
    if (vhat.maxCoeff() > 1.0 + tol)
        throw AssertionFailure("lemma 3: direction exceeds the box", iter, -1,
                               -1);
    for (const StateActionPair& p : tight.pairs) {
        const double rhs =
            inst.gamma * inst.trans[p.action].row(p.state).dot(vhat);
        if (vhat[p.state] > rhs + tol)
            throw AssertionFailure("lemma 3: direction infeasible on tight pair",
                                   iter, p.state, p.action);
    }

    // Lemma 4: componentwise domination of every vertex, and uniqueness of
    // the maximizer.
    const double obj = vhat.sum();
    for (const Vec& w : drp_vertices(tight, inst, tol)) {
        for (int i = 0; i < inst.n; ++i) {
            if (w[i] > vhat[i] + 1e-7)
                throw AssertionFailure(
                    "lemma 4: vertex exceeds the direction at state " +
                        std::to_string(i),
                    iter, i, -1);
        }
        if (w.sum() >= obj - 1e-7 &&
            (w - vhat).cwiseAbs().maxCoeff() > 1e-6)
            throw AssertionFailure(
                "lemma 4: distinct vertex attains the optimal objective", iter,
                -1, -1);
    }
}

// ---------------------------------------------------------------------------
// Solve loop
// ---------------------------------------------------------------------------

namespace {

long default_iteration_cap(const MdpInstance& inst) {
    const double raw =
        static_cast<double>(inst.n) * std::pow(static_cast<double>(inst.m),
                                               static_cast<double>(inst.n));
    if (!(raw < 1e6)) return 1'000'000;
    return std::max<long>(static_cast<long>(std::ceil(raw)), inst.n);
}

} // namespace

PdTrace solve_pd(const MdpInstance& inst, const SolverConfig& config) {
    const int n = inst.n;
    const long cap = config.max_iter > 0 ? config.max_iter
                                         : default_iteration_cap(inst);
    const double feas_guard = std::max(1e-8, 10.0 * config.feas_tol);

    ValueFunction v = initial_feasible_point(inst);
    ActiveSet active(n);
    PdTrace trace;

    // Lemma premises: the induction behind Lemmas 2-4 needs an initially
    // empty tight set and a unique argmin in every iteration so far. A
    // shifted start (negative costs) begins with tight min-cost pairs, which
    // the zero-length opening steps absorb; assertions stay quiet there.
    bool prev_unique = true;
    bool premises_clean = true;
    if (config.assert_lemmas)
        premises_clean = tight_set(v, inst, config.feas_tol).empty();

    std::optional<StateActionPair> last_entering;

    for (long iter = 1;; ++iter) {
        if (active.size() == n) break;
        if (iter > cap)
            throw IterationCapExceeded("primal-dual solve exceeded " +
                                       std::to_string(cap) + " iterations");

        const Vec vhat = optimal_drp_direction(active, inst);

        if (config.assert_lemmas && premises_clean) {
            const TightSet J = tight_set(v, inst, config.feas_tol);
            if (prev_unique)
                assert_lemma2(J, active, vhat, inst, iter, config.feas_tol);
            assert_lemma3_lemma4(vhat, J, inst, iter, config.feas_tol);
        }

        StepResult step = step_size(v, vhat, inst, config.tie_tol,
                                    config.direction_tol);
        double theta = step.theta;
        if (theta < 0.0) {
            if (theta < -feas_guard)
                throw InvariantViolation("negative step length " +
                                         std::to_string(theta));
            theta = 0.0;
        }
        if (step.argmin_pairs.size() != 1) {
            prev_unique = false;
            premises_clean = false;
        } else {
            prev_unique = true;
        }

        const StateActionPair entering = step.argmin_pairs.front();
        if (last_entering && *last_entering == entering)
            throw StalledIteration("entering pair (" +
                                   std::to_string(entering.state) + "," +
                                   std::to_string(entering.action) +
                                   ") repeated in consecutive iterations");
        last_entering = entering;

        ValueFunction v_next = v + theta * vhat;

        if (!is_dual_feasible(v_next, inst, feas_guard))
            throw InvariantViolation("dual feasibility lost at iteration " +
                                     std::to_string(iter));
        const double obj_prev = v.sum();
        const double obj_next = v_next.sum();
        if (obj_next < obj_prev - 1e-9 * (1.0 + std::abs(obj_prev)))
            throw InvariantViolation("objective decreased at iteration " +
                                     std::to_string(iter));

        auto [next_active, exited] = update_active_set(active, entering);

        PdIterationEvent ev;
        ev.iter = iter;
        ev.theta = theta;
        ev.entering = entering;
        ev.exited = exited;
        ev.g_size = next_active.size();
        ev.objective = obj_next;
        ev.drp_value = vhat.sum();
        trace.events.push_back(ev);
        if (config.record_iterates) trace.iterates.push_back(v_next);

        v = std::move(v_next);
        active = std::move(next_active);
    }

    const double residual = bellman_residual(v, inst);
    if (residual > config.tol)
        throw InvariantViolation(
            "all states covered but Bellman residual is " +
            std::to_string(residual));

    trace.final_v = std::move(v);
    trace.final_policy = greedy_policy(trace.final_v, inst);
    return trace;
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

void write_trace_jsonl(const PdTrace& trace, std::ostream& out) {
    using json = nlohmann::ordered_json;
    for (const PdIterationEvent& ev : trace.events) {
        json line;
        line["iter"] = ev.iter;
        line["theta"] = ev.theta;
        line["entering"] = {ev.entering.state, ev.entering.action};
        if (ev.exited)
            line["exited"] = {ev.exited->state, ev.exited->action};
        else
            line["exited"] = nullptr;
        line["g_size"] = ev.g_size;
        line["objective"] = ev.objective;
        line["drp_value"] = ev.drp_value;
        out << line.dump() << '\n';
    }
    json last;
    last["final_v"] = std::vector<double>(
        trace.final_v.data(), trace.final_v.data() + trace.final_v.size());
    last["final_policy"] = trace.final_policy.action;
    last["iterations"] = trace.iterations();
    out << last.dump() << '\n';
}

} // namespace pdmdp

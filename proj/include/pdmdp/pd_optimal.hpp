#pragma once

#include "pdmdp/dual_lp.hpp"
#include "pdmdp/types.hpp"

#include <iosfwd>

namespace pdmdp {

/// Retained state-action pairs, at most one per state, in insertion order.
/// G is the set of covered states.
class ActiveSet {
public:
    ActiveSet() = default;
    explicit ActiveSet(int num_states) : action_of_(num_states, -1) {}

    const std::vector<StateActionPair>& pairs() const { return pairs_; }
    int size() const { return static_cast<int>(pairs_.size()); }
    int num_states() const { return static_cast<int>(action_of_.size()); }
    bool covers(int state) const { return action_of_[state] >= 0; }
    bool contains(const StateActionPair& p) const {
        return action_of_[p.state] == p.action;
    }
    /// Covered states in ascending order.
    std::vector<int> covered() const;
    /// Uncovered states in ascending order.
    std::vector<int> uncovered() const;

    /// Appends a pair for a previously uncovered state.
    void add(const StateActionPair& p);
    /// Replaces the pair at p.state; returns the removed pair.
    StateActionPair exchange(const StateActionPair& p);

private:
    std::vector<StateActionPair> pairs_;
    std::vector<int> action_of_; // -1 when the state is uncovered
};

/// Exchange rule: if the entering state is uncovered, append (exited empty);
/// otherwise swap out the pair currently held for that state. Throws
/// DuplicatePair when entering is already in the set.
std::pair<ActiveSet, std::optional<StateActionPair>>
update_active_set(const ActiveSet& active, const StateActionPair& entering);

/// Closed-form optimal improving direction for the current active set:
/// vhat = 1 on uncovered states and
/// vhat_G = gamma * (I - gamma * P_HG)^{-1} P_HGbar * 1 on covered ones,
/// computed by linear solve. Satisfies vhat <= 1 and makes every active-set
/// constraint row exactly tight for the direction.
Vec optimal_drp_direction(const ActiveSet& active, const MdpInstance& inst);

struct PdIterationEvent {
    long iter = 0;                          // 1-based
    double theta = 0.0;
    StateActionPair entering;
    std::optional<StateActionPair> exited;
    int g_size = 0;                         // |G| after the update
    double objective = 0.0;                 // 1^T v after the update
    double drp_value = 0.0;                 // 1^T vhat of this iteration
};

struct PdTrace {
    std::vector<PdIterationEvent> events;
    ValueFunction final_v;
    Policy final_policy;
    std::vector<Vec> iterates; // filled when SolverConfig::record_iterates

    long iterations() const { return static_cast<long>(events.size()); }
};

/// Primal-dual solve with optimal restricted-dual updates. Starts from the
/// standard feasible point with empty active set, loops direction -> ratio
/// test -> update -> exchange until every state is covered. Feasibility and
/// objective monotonicity are checked every iteration; lemma assertions run
/// when config.assert_lemmas is set.
PdTrace solve_pd(const MdpInstance& inst, const SolverConfig& config = {});

/// Basic feasible points of the restricted-dual polytope
/// { vhat <= 1, vhat_i <= gamma * P_i.(u) vhat for (i,u) in tight }:
/// solves every n-subset of constraints taken with equality and keeps the
/// feasible solutions. Exponential in n; intended for small instances.
std::vector<Vec> drp_vertices(const TightSet& tight, const MdpInstance& inst,
                              double feas_tol = 1e-9);

/// |tight \ H| <= 1, and the extra pair, when present, has strictly negative
/// directional slope under vhat. Valid when the preceding iteration had a
/// unique argmin. Throws AssertionFailure.
void assert_lemma2(const TightSet& tight, const ActiveSet& active,
                   const Vec& vhat, const MdpInstance& inst, long iter,
                   double tol);

/// vhat is feasible for the restricted dual (Lemma 3) and componentwise
/// dominates every vertex of its polytope, with a unique maximizer
/// (Lemma 4). Throws AssertionFailure with the counterexample pair/vertex.
void assert_lemma3_lemma4(const Vec& vhat, const TightSet& tight,
                          const MdpInstance& inst, long iter, double tol);

/// JSON-lines trace: one object per iteration with keys iter, theta,
/// entering, exited, g_size, objective, drp_value; final line with final_v,
/// final_policy, iterations.
void write_trace_jsonl(const PdTrace& trace, std::ostream& out);

} // namespace pdmdp

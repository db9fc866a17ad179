#pragma once

#include "pdmdp/pd_optimal.hpp"
#include "pdmdp/types.hpp"

#include <span>
#include <string>

namespace pdmdp {

enum class PiRule {
    max_advantage,  // swap the pair with maximum v_i - q_value(v, i, u)
    first_improving // swap the lexicographically first improving pair
};

struct PiResult {
    ValueFunction v;
    Policy policy;
    long iters = 0; // number of single-action swaps
};

/// Sequential-improvement policy iteration: evaluate, swap one improving
/// state-action pair, repeat until no pair improves.
PiResult sequential_pi(const MdpInstance& inst, const Policy& init,
                       PiRule rule = PiRule::max_advantage);

/// Evaluates all m^n deterministic policies and returns the componentwise
/// minimum value with a minimizing policy. Exponential; callers guard size.
std::pair<ValueFunction, Policy> enumerate_all_policies(const MdpInstance& inst);

/// Sub-MDP on a covered state set G: transitions restricted to G, cost gamma
/// collected once upon leaving G, zero cost inside. The value of an action
/// assignment solves w = gamma * P_in(a) w + gamma * exit(a), which is the
/// same linear system that defines the covered block of the improving
/// direction.
struct FirstPassageInstance {
    std::vector<int> states;       // sorted subset of the parent's states
    std::vector<Mat> trans_inside; // per action, |G| x |G| substochastic
    std::vector<Vec> exit_mass;    // per action, 1 - inside row sum
    double gamma = 0.0;

    int size() const { return static_cast<int>(states.size()); }
    int num_actions() const { return static_cast<int>(trans_inside.size()); }

    /// Value vector of the assignment actions[k] taken at states[k].
    Vec policy_value(std::span<const int> actions) const;

    /// One-step lookahead for the subproblem at local index k under action u.
    double q_value(std::span<const int> actions, const Vec& value, int k,
                   int u) const;

    /// True when some (state, action) strictly improves on `value` by more
    /// than tol.
    bool has_improving(const Vec& value, double tol) const;
};

/// Rows of every action restricted to G-columns. Throws InvalidStateSet for
/// an empty set, duplicates, or out-of-range states.
FirstPassageInstance extract_first_passage(const MdpInstance& inst,
                                           const std::vector<int>& G);

/// n^2 (m-1) (1 + 2/(1-gamma) * ln(1/(1-gamma))); the log term vanishes at
/// gamma = 0. Reported as a diagnostic, never asserted as a bound.
double scherrer_bound(int n, int m, double gamma);

/// sum_{k=1..n} m^k, accumulated in doubles.
double naive_cap(int n, int m);

struct BlockDecomposition {
    std::vector<long> block_lengths;  // one entry per state added; sums to
                                      // the total iteration count
    std::vector<bool> early_exit;     // block ended before its subproblem
                                      // was solved to optimality
};

/// Splits a primal-dual trace into blocks separated by |G| increments and
/// verifies that every exchange inside a block is an improving policy swap
/// on the first-passage subproblem over the block's covered set (value
/// vector componentwise nonincreasing, strictly smaller at the exchanged
/// state). Throws DecompositionMismatch with the offending iteration.
BlockDecomposition decompose_pd_trace(const MdpInstance& inst,
                                      const PdTrace& trace,
                                      double tol = 1e-9);

struct BoundReport {
    int n = 0;
    int m = 0;
    double gamma = 0.0;
    double scherrer = 0.0;
    double naive_cap = 0.0;
    long measured_pd_iters = 0;
    std::vector<long> per_block_pi_iters;
};

BoundReport bound_report(const MdpInstance& inst, const PdTrace& trace);

/// Flat JSON object with the report fields.
std::string to_json(const BoundReport& report);

} // namespace pdmdp

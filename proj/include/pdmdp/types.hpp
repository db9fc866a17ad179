#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdmdp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Discounted cost-to-go per state; doubles as the dual variable of the
/// LP formulation.
using ValueFunction = Vec;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An instance failed structural validation (bad shapes, non-stochastic rows,
/// discount out of range, non-finite data).
struct ValidationError : SolverError {
    using SolverError::SolverError;
};

/// Input file could not be parsed as JSON.
struct ParseError : SolverError {
    std::size_t byte_offset = 0;
    ParseError(const std::string& msg, std::size_t byte)
        : SolverError(msg), byte_offset(byte) {}
};

struct IoError : SolverError {
    using SolverError::SolverError;
};

/// A value passed where dual feasibility was required violates a constraint
/// by more than the stated tolerance.
struct InfeasibleInput : SolverError {
    using SolverError::SolverError;
};

/// Ratio test had no candidate with positive directional slope.
struct UnboundedStep : SolverError {
    using SolverError::SolverError;
};

/// Entering pair is already in the active set.
struct DuplicatePair : SolverError {
    using SolverError::SolverError;
};

/// Same entering pair selected in two consecutive iterations.
struct StalledIteration : SolverError {
    using SolverError::SolverError;
};

struct IterationCapExceeded : SolverError {
    using SolverError::SolverError;
};

/// gsj_as_pd_update called on a state that already has a tight constraint.
struct StateAlreadyTight : SolverError {
    using SolverError::SolverError;
};

struct NotConverged : SolverError {
    Vec best_v;
    double residual = 0.0;
    NotConverged(const std::string& msg, Vec v, double res)
        : SolverError(msg), best_v(std::move(v)), residual(res) {}
};

/// A runtime lemma assertion failed; carries the iteration and pair involved.
struct AssertionFailure : SolverError {
    long iteration = -1;
    int state = -1;
    int action = -1;
    AssertionFailure(const std::string& msg, long iter, int s, int a)
        : SolverError(msg), iteration(iter), state(s), action(a) {}
};

struct SingularMatrix : SolverError {
    using SolverError::SolverError;
};

struct PreconditionViolated : SolverError {
    using SolverError::SolverError;
};

struct InvalidStateSet : SolverError {
    using SolverError::SolverError;
};

struct DecompositionMismatch : SolverError {
    long iteration = -1;
    DecompositionMismatch(const std::string& msg, long iter)
        : SolverError(msg), iteration(iter) {}
};

/// An internal invariant of a solve was violated (feasibility lost, objective
/// decreased, residual not closed at termination).
struct InvariantViolation : SolverError {
    using SolverError::SolverError;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One constraint of the dual LP: state i paired with action u.
struct StateActionPair {
    int state = 0;
    int action = 0;
    auto operator<=>(const StateActionPair&) const = default;
};

/// Total map from state to action index.
struct Policy {
    std::vector<int> action;

    int size() const { return static_cast<int>(action.size()); }
    bool operator==(const Policy&) const = default;
};

/// Finite discounted-cost MDP.
///
/// cost[u][i] is the cost of taking action u in state i; trans[u] is the
/// row-stochastic transition matrix under action u (trans[u](i, j) is the
/// probability of moving from i to j). States and actions are 0-based.
struct MdpInstance {
    int n = 0;
    int m = 0;
    double gamma = 0.0;
    std::vector<Vec> cost;   // m entries, each length n
    std::vector<Mat> trans;  // m entries, each n x n

    /// Throws ValidationError on shape mismatch, gamma outside [0,1),
    /// non-finite data, negative probabilities, or row sums deviating from 1
    /// by more than row_tol. Rows are never renormalized.
    void validate(double row_tol = 1e-12) const;

    double min_cost() const;
};

struct SolverConfig {
    double tol = 1e-8;            // convergence target on the Bellman residual
    double feas_tol = 1e-9;       // feasibility / tightness slack tolerance
    double tie_tol = 1e-9;        // relative tie width in the ratio test
    double direction_tol = 1e-12; // threshold for membership in the set K
    long max_iter = 0;            // 0 = n * m^n capped at 1e6
    bool assert_lemmas = false;   // per-iteration lemma checks (exponential oracle)
    bool record_iterates = false; // keep a copy of v after each iteration
};

} // namespace pdmdp

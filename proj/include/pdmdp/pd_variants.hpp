#pragma once

#include "pdmdp/types.hpp"

#include <span>

namespace pdmdp {

/// Gauss-Seidel-Jacobi update of a single component:
/// v_i := min_u (c_i(u) + gamma * sum_{j != i} P_ij(u) v_j) / (1 - gamma * P_ii(u)).
ValueFunction gsj_component_update(const ValueFunction& v, int state,
                                   const MdpInstance& inst);

/// A unit improving direction paired with its exact step length.
struct UnitStep {
    Vec vhat;
    double theta = 0.0;
};

/// The same GSJ update expressed as a primal-dual step: vhat = e_i and
/// theta = min_u slack(i,u) / (1 - gamma * P_ii(u)). Requires that no
/// constraint at the state is tight (throws StateAlreadyTight otherwise);
/// v + theta * vhat reproduces gsj_component_update.
UnitStep gsj_as_pd_update(const ValueFunction& v, int state,
                          const MdpInstance& inst, double tight_tol = 1e-9);

/// In-place Gauss-Seidel sweep: each state in `order` (natural order when
/// empty) is replaced by its Bellman backup using already-updated values.
ValueFunction gs_sweep(const ValueFunction& v, const MdpInstance& inst,
                       std::span<const int> order = {});

struct ViStep {
    ValueFunction v_next; // = Tv
    Vec vhat;             // = Tv - v
    double theta = 1.0;
};

/// One synchronous value-iteration step viewed as a primal-dual update with
/// vhat = Tv - v and theta = 1. Asserts the restricted dual's tight-row
/// inequalities on vhat (throws InvariantViolation otherwise); the increment
/// is not normalized to the unit box.
ViStep vi_step(const ValueFunction& v, const MdpInstance& inst,
               double tight_tol = 1e-9);

enum class Variant {
    vi,              // synchronous Bellman backups
    gs,              // Gauss-Seidel sweeps in natural order
    gsj,             // Gauss-Seidel-Jacobi sweeps in natural order
    gsj_alternating, // one GSJ component per iteration, state (k-1) mod n at
                     // iteration k
};

struct VariantResult {
    ValueFunction v;
    long sweeps = 0; // component iterations in alternating mode
    double residual = 0.0;
};

/// Iterates the chosen variant from the standard feasible point until the
/// Bellman residual drops to tol. Throws NotConverged (carrying the best v
/// and its residual) when max_sweeps is exhausted first.
VariantResult run_variant(const MdpInstance& inst, Variant variant,
                          double tol, long max_sweeps);

} // namespace pdmdp

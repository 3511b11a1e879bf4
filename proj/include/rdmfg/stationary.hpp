#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rdmfg/grid.hpp"
#include "rdmfg/utility.hpp"

namespace rdmfg {

enum class SolveMode { mfg, discounted_rd };
enum class PhiInit { zeros, utility_of_mu0, constant };

/**
 * Pseudo-time iteration parameters. The error threshold must satisfy
 * eps_tol <= dt_pseudo / 100 (the scheme assumes the threshold is far below
 * the pseudo-time increment).
 */
struct SolverConfig {
    double delta = 1.0;            // discount rate, > 0
    double dt_pseudo = 0.2;        // pseudo-time increment
    double eps_tol = 1e-10;        // termination threshold
    std::size_t max_iters = 100000;
    std::optional<double> u_bar;   // strict mode: enforce the stability bound
    PhiInit phi_init = PhiInit::zeros;
    double phi_init_value = 0.0;   // used when phi_init == constant
    SolveMode mode = SolveMode::mfg;

    /// Observer called after every update with (iteration, m, phi);
    /// used by the iterate-invariant checks. Leave empty to disable.
    std::function<void(std::size_t, const GridArray&, const GridArray&)> observer;

    void validate() const;
};

enum class SolveStatus { converged, max_iters_exceeded, diverged };

struct SolveDiagnostics {
    double min_phi = 0.0;
    double max_phi = 0.0;
    double min_m = 0.0;
    double worst_row_sum_dev = 0.0;
    bool stability_bound_checked = false;
    std::optional<double> k_bound;       // K when strict mode ran
    double residual_fp_max = 0.0;        // final-iterate residual maxima
    double residual_hjb_max = 0.0;       // mfg mode only
};

struct SolveReport {
    DiscreteMeasure m;        // satisfies measure invariants when converged
    ValueField phi;           // value function (mfg) or utility (discounted_rd)
    SolveStatus status = SolveStatus::converged;
    std::size_t iterations = 0;
    double final_error = 0.0;
    std::vector<double> error_history;
    SolveDiagnostics diagnostics;

    bool converged() const { return status == SolveStatus::converged; }
};

/**
 * Fokker-Planck residual at every cell:
 * F(i,j) = delta mu0(i,j) - (delta - (phi(i,j) - sum_k phi(k,j) m(k,j))) m(i,j).
 * Row sums of F vanish whenever the m rows sum to 1, which is what conserves
 * probability along the iteration.
 */
GridArray residual_fp(const GridArray& m, const GridArray& phi, const DiscreteMeasure& mu0,
                      double delta, const GridSpec& grid);

/**
 * Hamilton-Jacobi-Bellman residual at every cell:
 * H(i,j) = -phi(i,j) + u(i,j) + (1/(2 delta)) sum_k ((phi(k,j) - phi(i,j))_+)^2 m(k,j).
 * The quadratic sum is evaluated with per-row sorted prefix sums
 * (O(n_x log n_x) per row); ties contribute zero either way.
 */
GridArray residual_hjb(const GridArray& m, const GridArray& phi, const ValueField& u_field,
                       double delta, const GridSpec& grid);

/**
 * The pseudo-time fixed-point iteration on the discretized system.
 *
 * mfg mode updates phi by delta*dt*H and m by dt*F each iteration, with the
 * utility re-evaluated at the current m. discounted_rd mode replaces phi by
 * the utility of the current m every iteration (no relaxation on phi) and
 * updates only m. The per-iteration error is max over cells of
 * max{n_x |m_next - m|, |phi_next - phi|}; iteration stops when it falls
 * below eps_tol.
 *
 * A run whose error exceeds 1e6 times the first error aborts with status
 * diverged; fields are returned for inspection in every non-converged case.
 * NaN/Inf in an iterate raises NumericError naming the first offending cell
 * and iteration.
 */
SolveReport solve(const DiscreteMeasure& mu0, const UtilitySpec& spec, const GridSpec& grid,
                  const SolverConfig& cfg);

struct StabilityConstants {
    double k_bound = 0.0;   // K = delta + sqrt(delta (delta - 2 u_bar))
    double dt_max = 0.0;    // 1 / (delta + K)
};

/// Requires delta > 2 u_bar; K is the largest root of -u + u_bar + u^2/(2 delta) = 0.
StabilityConstants stability_constants(double delta, double u_bar);

/**
 * Checks the invariants the iteration is expected to keep: m >= -1e-12,
 * row sums within 1e-10 of 1, and (when u_bar is supplied and delta > 2 u_bar)
 * 0 - 1e-10 <= phi <= K + 1e-10. Returns human-readable violations; empty
 * means all hold. Reports, never throws.
 */
std::vector<std::string> verify_iterate_invariants(const GridArray& m, const GridArray& phi,
                                                   const GridSpec& grid, double delta,
                                                   std::optional<double> u_bar = std::nullopt);

/// Convenience overload for a finished report.
std::vector<std::string> verify_iterate_invariants(const SolveReport& report,
                                                   const GridSpec& grid, double delta,
                                                   std::optional<double> u_bar = std::nullopt);

}  // namespace rdmfg

#pragma once

#include <vector>

#include "rdmfg/grid.hpp"
#include "rdmfg/utility.hpp"

namespace rdmfg {

/// Forward-Euler stepping parameters for the time-dependent dynamics.
struct EvolutionConfig {
    double dt_time = 1e-3;
    double t_end = 1.0;
    std::size_t record_every = 1;

    void validate() const {
        if (!(dt_time > 0.0)) throw std::invalid_argument("EvolutionConfig: dt_time must be > 0");
        if (!(t_end >= dt_time)) {
            throw std::invalid_argument("EvolutionConfig: t_end must be >= dt_time");
        }
        if (record_every == 0) {
            throw std::invalid_argument("EvolutionConfig: record_every must be >= 1");
        }
    }
};

/// Cumulative renormalization budget; a run exceeding it is flagged
/// non-conservative.
inline constexpr double kRenormBudget = 1e-8;

struct Trajectory {
    std::vector<double> times;
    std::vector<DiscreteMeasure> snapshots;
    double renormalized_mass = 0.0;   // total mass adjusted across the run
    bool conservative = true;         // false once renormalized_mass > kRenormBudget
};

struct RdStepOutcome {
    DiscreteMeasure m;
    double renormalized_mass = 0.0;   // 0 when no row needed rescaling
};

/**
 * One forward-Euler step of the replicator drift
 * dm(i,j)/dt = (U(i,j) - sum_k U(k,j) m(k,j)) m(i,j).
 *
 * Rows are rescaled only when the post-step sum deviates from 1 beyond the
 * row-sum tolerance; the adjusted mass is reported in the outcome. Entries in
 * [-1e-14, 0) are clipped to 0; anything more negative raises NumericError
 * naming the cell (the step size is too large for the utility spread).
 */
RdStepOutcome rd_step(const DiscreteMeasure& m, const UtilitySpec& spec, const GridSpec& grid,
                      double dt);

/// Repeated rd_step to t_end; snapshots at multiples of record_every steps
/// plus the initial and terminal states. Deterministic.
Trajectory rd_integrate(const DiscreteMeasure& m0, const UtilitySpec& spec,
                        const GridSpec& grid, const EvolutionConfig& cfg);

/// One Euler step of dx_i/dt = x_i^q - x_i sum_j x_j^q on the simplex.
std::vector<double> qvoter_ode_step(const std::vector<double>& x, double q, double dt);

enum class SimplexClass { interior, vertex, undecided };

struct QVoterLongRun {
    SimplexClass terminal_class = SimplexClass::undecided;
    std::vector<double> terminal_state;
};

/**
 * Integrates the power ODE to t_end and classifies the terminal state:
 * interior if min_i x_i > 1/(10N), vertex if max_i x_i > 1 - 1e-3,
 * undecided otherwise (e.g. started on the unstable barycenter).
 */
QVoterLongRun qvoter_long_run(const std::vector<double>& x0, double q,
                              const EvolutionConfig& cfg);

/**
 * Consistency check of the simplex ODE against the density replicator
 * dynamic with the power utility, via the cell embedding m = x on an
 * n_x = N, n_y = 1 grid. The ODE runs on the rescaled clock tau = n_x^(q-1) t
 * with the same step size, so the two first-order schemes approximate the
 * same flow with different effective steps; returns the max TV distance over
 * the recorded comparison times (expected O(dt)).
 */
double embedding_check(const std::vector<double>& x0, double q, const GridSpec& grid,
                       const EvolutionConfig& cfg);

}  // namespace rdmfg

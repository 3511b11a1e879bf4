#include "rdmfg/evolution.hpp"

#include <cmath>
#include <cstdio>

namespace rdmfg {

namespace {

constexpr double kClipFloor = -1e-14;

std::string cell_name(std::size_t i, std::size_t j) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "cell (%zu, %zu)", i + 1, j + 1);
    return buf;
}

std::size_t step_count(const EvolutionConfig& cfg) {
    return static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt_time - 1e-9));
}

}  // namespace

RdStepOutcome rd_step(const DiscreteMeasure& m, const UtilitySpec& spec, const GridSpec& grid,
                      double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rd_step: dt must be > 0");
    const ValueField u = evaluate(spec, m, grid);

    GridArray next = m.values();
    double renormalized = 0.0;
    for (std::size_t j = 0; j < grid.n_y; ++j) {
        const auto m_row = m.row(j);
        const auto u_row = u.row(j);
        double avg = 0.0;
        for (std::size_t k = 0; k < grid.n_x; ++k) avg += u_row[k] * m_row[k];

        auto out = next.row(j);
        double sum = 0.0;
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            double v = m_row[i] + dt * (u_row[i] - avg) * m_row[i];
            if (v < 0.0) {
                if (v < kClipFloor) {
                    throw NumericError("rd_step: negative mass " + std::to_string(v) + " at " +
                                       cell_name(i, j) + " (dt too large for utility spread)");
                }
                v = 0.0;
            }
            out[i] = v;
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            renormalized += std::abs(sum - 1.0);
            for (std::size_t i = 0; i < grid.n_x; ++i) out[i] /= sum;
        }
    }
    return {DiscreteMeasure::from_array(std::move(next)), renormalized};
}

Trajectory rd_integrate(const DiscreteMeasure& m0, const UtilitySpec& spec,
                        const GridSpec& grid, const EvolutionConfig& cfg) {
    cfg.validate();
    const std::size_t n_steps = step_count(cfg);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.snapshots.push_back(m0);

    DiscreteMeasure m = m0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        auto outcome = rd_step(m, spec, grid, cfg.dt_time);
        m = std::move(outcome.m);
        traj.renormalized_mass += outcome.renormalized_mass;
        if (k % cfg.record_every == 0 || k == n_steps) {
            traj.times.push_back(static_cast<double>(k) * cfg.dt_time);
            traj.snapshots.push_back(m);
        }
    }
    traj.conservative = traj.renormalized_mass <= kRenormBudget;
    return traj;
}

std::vector<double> qvoter_ode_step(const std::vector<double>& x, double q, double dt) {
    if (!(q > 0.0) || q == 1.0) {
        throw std::invalid_argument("qvoter_ode_step: q must be positive and != 1");
    }
    if (!(dt > 0.0)) throw std::invalid_argument("qvoter_ode_step: dt must be > 0");
    double sum = 0.0;
    for (double v : x) sum += v;
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw std::invalid_argument("qvoter_ode_step: state is off the simplex");
    }

    const std::size_t n = x.size();
    std::vector<double> powers(n);
    double power_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        powers[i] = std::pow(x[i], q);
        power_sum += powers[i];
    }
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i] + dt * (powers[i] - x[i] * power_sum);
        if (v < 0.0) {
            if (v < kClipFloor) {
                throw NumericError("qvoter_ode_step: component " + std::to_string(i + 1) +
                                   " went negative (" + std::to_string(v) + ")");
            }
            v = 0.0;
        }
        next[i] = v;
    }
    return next;
}

QVoterLongRun qvoter_long_run(const std::vector<double>& x0, double q,
                              const EvolutionConfig& cfg) {
    cfg.validate();
    const std::size_t n_steps = step_count(cfg);
    std::vector<double> x = x0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        x = qvoter_ode_step(x, q, cfg.dt_time);
    }

    QVoterLongRun result;
    double lo = x[0], hi = x[0];
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double interior_floor = 1.0 / (10.0 * static_cast<double>(x.size()));
    if (hi > 1.0 - 1e-3) {
        result.terminal_class = SimplexClass::vertex;
    } else if (lo > interior_floor) {
        result.terminal_class = SimplexClass::interior;
    } else {
        result.terminal_class = SimplexClass::undecided;
    }
    result.terminal_state = std::move(x);
    return result;
}

double embedding_check(const std::vector<double>& x0, double q, const GridSpec& grid,
                       const EvolutionConfig& cfg) {
    cfg.validate();
    if (grid.n_y != 1 || grid.n_x != x0.size()) {
        throw std::invalid_argument("embedding_check: grid must be n_x = N, n_y = 1");
    }

    GridArray m0_values(grid);
    for (std::size_t i = 0; i < x0.size(); ++i) m0_values.at(i, 0) = x0[i];
    const auto m0 = DiscreteMeasure::from_array(std::move(m0_values));
    UtilitySpec spec{QVoterExchangeable{q, std::nullopt}, std::nullopt};

    const Trajectory rd = rd_integrate(m0, spec, grid, cfg);

    // ODE clock runs n_x^(q-1) times faster; same step size on that clock.
    const double scale = std::pow(static_cast<double>(grid.n_x), q - 1.0);
    std::vector<double> x = x0;
    double worst = 0.0;
    std::size_t ode_step = 0;
    for (std::size_t s = 0; s < rd.times.size(); ++s) {
        const auto target =
            static_cast<std::size_t>(std::llround(scale * rd.times[s] / cfg.dt_time));
        for (; ode_step < target; ++ode_step) {
            x = qvoter_ode_step(x, q, cfg.dt_time);
        }
        double tv = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            tv += std::abs(rd.snapshots[s].at(i, 0) - x[i]);
        }
        worst = std::max(worst, tv);
    }
    return worst;
}

}  // namespace rdmfg

#include "rdmfg/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace rdmfg {

namespace {

constexpr double kDivergenceFactor = 1e6;

std::string cell_name(std::size_t i, std::size_t j) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "cell (%zu, %zu)", i + 1, j + 1);
    return buf;
}

/// Per-row workspace for the HJB quadratic sum: indices sorted by phi
/// descending and prefix sums of m, phi*m, phi^2*m in that order.
struct HjbRowWorkspace {
    std::vector<std::size_t> order;
    std::vector<double> sorted_phi;
    std::vector<double> prefix_m;
    std::vector<double> prefix_pm;
    std::vector<double> prefix_ppm;

    void resize(std::size_t n) {
        order.resize(n);
        sorted_phi.resize(n);
        prefix_m.resize(n + 1);
        prefix_pm.resize(n + 1);
        prefix_ppm.resize(n + 1);
    }
};

/// Fills out[i] = sum_k ((phi[k] - phi[i])_+)^2 m[k] for one row.
/// Expanding the square over the strictly-greater entries turns the sum into
/// three prefix sums over the phi-descending order; equal entries contribute
/// zero, so the strict cut handles ties. The cancellation error of the
/// expansion is O(eps * max(phi)^2), far below the solver tolerances.
void hjb_quadratic_sums(std::span<const double> phi, std::span<const double> m,
                        std::span<double> out, HjbRowWorkspace& ws) {
    const std::size_t n = phi.size();
    ws.resize(n);
    std::iota(ws.order.begin(), ws.order.end(), std::size_t{0});
    std::sort(ws.order.begin(), ws.order.end(), [&](std::size_t a, std::size_t b) {
        if (phi[a] != phi[b]) return phi[a] > phi[b];
        return a < b;
    });

    ws.prefix_m[0] = ws.prefix_pm[0] = ws.prefix_ppm[0] = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t k = ws.order[r];
        const double p = phi[k];
        ws.sorted_phi[r] = p;
        ws.prefix_m[r + 1] = ws.prefix_m[r] + m[k];
        ws.prefix_pm[r + 1] = ws.prefix_pm[r] + p * m[k];
        ws.prefix_ppm[r + 1] = ws.prefix_ppm[r] + p * p * m[k];
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double pi = phi[i];
        // first position in the descending order with value <= pi
        const auto it = std::lower_bound(ws.sorted_phi.begin(), ws.sorted_phi.end(), pi,
                                         [](double a, double b) { return a > b; });
        const auto r = static_cast<std::size_t>(it - ws.sorted_phi.begin());
        const double s =
            ws.prefix_ppm[r] - 2.0 * pi * ws.prefix_pm[r] + pi * pi * ws.prefix_m[r];
        out[i] = std::max(s, 0.0);
    }
}

void check_iterate_finite(const GridArray& m, const GridArray& phi, std::size_t iteration) {
    for (std::size_t j = 0; j < m.n_y(); ++j) {
        for (std::size_t i = 0; i < m.n_x(); ++i) {
            if (!std::isfinite(m.at(i, j))) {
                throw NumericError("solve: non-finite m at " + cell_name(i, j) +
                                   ", iteration " + std::to_string(iteration));
            }
            if (!std::isfinite(phi.at(i, j))) {
                throw NumericError("solve: non-finite phi at " + cell_name(i, j) +
                                   ", iteration " + std::to_string(iteration));
            }
        }
    }
}

ValueField initial_phi(const SolverConfig& cfg, const DiscreteMeasure& mu0,
                       const UtilitySpec& spec, const GridSpec& grid) {
    switch (cfg.phi_init) {
        case PhiInit::zeros:
            return ValueField(grid, 0.0);
        case PhiInit::utility_of_mu0:
            return evaluate(spec, mu0, grid);
        case PhiInit::constant:
            return ValueField(grid, cfg.phi_init_value);
    }
    throw std::invalid_argument("SolverConfig: unknown phi_init");
}

SolveDiagnostics finish_diagnostics(const GridArray& m, const GridArray& phi) {
    SolveDiagnostics d;
    d.min_m = m.data().empty() ? 0.0 : m.data()[0];
    d.min_phi = phi.data().empty() ? 0.0 : phi.data()[0];
    d.max_phi = d.min_phi;
    for (double v : m.data()) d.min_m = std::min(d.min_m, v);
    for (double v : phi.data()) {
        d.min_phi = std::min(d.min_phi, v);
        d.max_phi = std::max(d.max_phi, v);
    }
    for (std::size_t j = 0; j < m.n_y(); ++j) {
        double sum = 0.0;
        for (double v : m.row(j)) sum += v;
        d.worst_row_sum_dev = std::max(d.worst_row_sum_dev, std::abs(sum - 1.0));
    }
    return d;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("SolverConfig: delta must be > 0");
    if (!(dt_pseudo > 0.0)) throw std::invalid_argument("SolverConfig: dt_pseudo must be > 0");
    if (!(eps_tol > 0.0)) throw std::invalid_argument("SolverConfig: eps_tol must be > 0");
    if (eps_tol > dt_pseudo / 100.0) {
        throw std::invalid_argument(
            "SolverConfig: eps_tol must be <= dt_pseudo/100 (the threshold is assumed far "
            "below the pseudo-time increment)");
    }
    if (max_iters == 0) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
    if (u_bar && !(*u_bar > 0.0)) {
        throw std::invalid_argument("SolverConfig: u_bar must be > 0 when supplied");
    }
}

GridArray residual_fp(const GridArray& m, const GridArray& phi, const DiscreteMeasure& mu0,
                      double delta, const GridSpec& grid) {
    if (!m.matches(grid) || !phi.matches(grid) || !mu0.values().matches(grid)) {
        throw std::invalid_argument("residual_fp: shape mismatch");
    }
    GridArray f(grid);
    for (std::size_t j = 0; j < grid.n_y; ++j) {
        const auto m_row = m.row(j);
        const auto phi_row = phi.row(j);
        double avg = 0.0;
        for (std::size_t k = 0; k < grid.n_x; ++k) avg += phi_row[k] * m_row[k];
        auto out = f.row(j);
        const auto mu0_row = mu0.row(j);
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            out[i] = delta * mu0_row[i] - (delta - (phi_row[i] - avg)) * m_row[i];
        }
    }
    return f;
}

GridArray residual_hjb(const GridArray& m, const GridArray& phi, const ValueField& u_field,
                       double delta, const GridSpec& grid) {
    if (!m.matches(grid) || !phi.matches(grid) || !u_field.matches(grid)) {
        throw std::invalid_argument("residual_hjb: shape mismatch");
    }
    GridArray h(grid);
    HjbRowWorkspace ws;
    std::vector<double> sums(grid.n_x);
    const double half_inv_delta = 0.5 / delta;
    for (std::size_t j = 0; j < grid.n_y; ++j) {
        hjb_quadratic_sums(phi.row(j), m.row(j), sums, ws);
        const auto phi_row = phi.row(j);
        const auto u_row = u_field.row(j);
        auto out = h.row(j);
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            out[i] = -phi_row[i] + u_row[i] + half_inv_delta * sums[i];
        }
    }
    return h;
}

SolveReport solve(const DiscreteMeasure& mu0, const UtilitySpec& spec, const GridSpec& grid,
                  const SolverConfig& cfg) {
    cfg.validate();
    spec.validate();
    if (!mu0.values().matches(grid)) {
        throw std::invalid_argument("solve: mu0 shape does not match grid");
    }

    std::optional<double> k_bound;
    if (cfg.u_bar) {
        const auto stability = stability_constants(cfg.delta, *cfg.u_bar);
        k_bound = stability.k_bound;
        if (cfg.dt_pseudo >= stability.dt_max) {
            throw std::invalid_argument(
                "solve: strict mode requires dt_pseudo < 1/(delta + K) = " +
                std::to_string(stability.dt_max));
        }
    }

    const double dt = cfg.dt_pseudo;
    const double delta = cfg.delta;
    const auto n_x_scale = static_cast<double>(grid.n_x);

    GridArray m = mu0.values();
    ValueField phi = (cfg.mode == SolveMode::mfg) ? initial_phi(cfg, mu0, spec, grid)
                                                  : evaluate(spec, mu0, grid);

    SolveReport report{DiscreteMeasure::unchecked(m), phi, SolveStatus::max_iters_exceeded,
                       0,  0.0, {}, {}};
    report.error_history.reserve(std::min<std::size_t>(cfg.max_iters, 1 << 20));

    double first_error = -1.0;
    for (std::size_t n = 0; n < cfg.max_iters; ++n) {
        const GridArray f = residual_fp(m, phi, mu0, delta, grid);
        double error = 0.0;

        GridArray m_next = m;
        for (std::size_t k = 0; k < m_next.data().size(); ++k) {
            const double dm = dt * f.data()[k];
            m_next.data()[k] += dm;
            error = std::max(error, n_x_scale * std::abs(dm));
        }

        if (cfg.mode == SolveMode::mfg) {
            const ValueField u = evaluate(spec, DiscreteMeasure::unchecked(m), grid);
            const GridArray h = residual_hjb(m, phi, u, delta, grid);
            for (std::size_t k = 0; k < phi.data().size(); ++k) {
                const double dphi = delta * dt * h.data()[k];
                phi.data()[k] += dphi;
                error = std::max(error, std::abs(dphi));
            }
            m = std::move(m_next);
        } else {
            // phi stands in for the utility and is recomputed, not relaxed
            m = std::move(m_next);
            ValueField u_next = evaluate(spec, DiscreteMeasure::unchecked(m), grid);
            for (std::size_t k = 0; k < phi.data().size(); ++k) {
                error = std::max(error, std::abs(u_next.data()[k] - phi.data()[k]));
            }
            phi = std::move(u_next);
        }

        if (!std::isfinite(error)) check_iterate_finite(m, phi, n);
        report.error_history.push_back(error);
        report.final_error = error;
        report.iterations = n + 1;
        if (cfg.observer) cfg.observer(n, m, phi);

        if (error <= cfg.eps_tol) {
            report.status = SolveStatus::converged;
            break;
        }
        if (first_error < 0.0) first_error = error;
        if (error > kDivergenceFactor * first_error) {
            report.status = SolveStatus::diverged;
            break;
        }
    }

    report.diagnostics = finish_diagnostics(m, phi);
    report.diagnostics.k_bound = k_bound;
    report.diagnostics.stability_bound_checked = cfg.u_bar.has_value();
    (void)u_bar;

    const ValueField u_final = evaluate(spec, DiscreteMeasure::unchecked(m), grid);
    report.diagnostics.residual_fp_max =
        field_stats(residual_fp(m, phi, mu0, delta, grid)).max_abs;
    if (cfg.mode == SolveMode::mfg) {
        report.diagnostics.residual_hjb_max =
            field_stats(residual_hjb(m, phi, u_final, delta, grid)).max_abs;
    }

    report.m = DiscreteMeasure::unchecked(std::move(m));
    report.phi = std::move(phi);
    return report;
}

StabilityConstants stability_constants(double delta, double u_bar) {
    if (!(delta > 0.0)) throw std::invalid_argument("stability_constants: delta must be > 0");
    if (u_bar < 0.0) throw std::invalid_argument("stability_constants: u_bar must be >= 0");
    if (!(delta > 2.0 * u_bar)) {
        throw std::invalid_argument(
            "stability_constants: hypothesis delta > 2 u_bar violated; K is undefined");
    }
    StabilityConstants c;
    c.k_bound = delta + std::sqrt(delta * (delta - 2.0 * u_bar));
    c.dt_max = 1.0 / (delta + c.k_bound);
    return c;
}

std::vector<std::string> verify_iterate_invariants(const GridArray& m, const GridArray& phi,
                                                   const GridSpec& grid, double delta,
                                                   std::optional<double> u_bar) {
    std::vector<std::string> violations;
    if (!m.matches(grid) || !phi.matches(grid)) {
        violations.push_back("shape mismatch against grid");
        return violations;
    }

    for (std::size_t j = 0; j < grid.n_y; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            const double v = m.at(i, j);
            sum += v;
            if (!(v >= -1e-12)) {
                violations.push_back("m negative (" + std::to_string(v) + ") at " +
                                     cell_name(i, j));
            }
        }
        if (std::abs(sum - 1.0) > 1e-10) {
            violations.push_back("row " + std::to_string(j + 1) + " mass " +
                                 std::to_string(sum) + " deviates beyond 1e-10");
        }
    }

    if (u_bar && delta > 2.0 * (*u_bar)) {
        const double k_bound = stability_constants(delta, *u_bar).k_bound;
        for (std::size_t j = 0; j < grid.n_y; ++j) {
            for (std::size_t i = 0; i < grid.n_x; ++i) {
                const double v = phi.at(i, j);
                if (v < -1e-10 || v > k_bound + 1e-10) {
                    violations.push_back("phi " + std::to_string(v) + " outside [0, K] at " +
                                         cell_name(i, j));
                }
            }
        }
    }
    return violations;
}

std::vector<std::string> verify_iterate_invariants(const SolveReport& report,
                                                   const GridSpec& grid, double delta,
                                                   std::optional<double> u_bar) {
    return verify_iterate_invariants(report.m.values(), report.phi, grid, delta, u_bar);
}

}  // namespace rdmfg

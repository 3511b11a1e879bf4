#include "rdmfg/utility.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace rdmfg {

namespace {

std::string cell_name(std::size_t i, std::size_t j) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "cell (%zu, %zu)", i + 1, j + 1);
    return buf;
}

void check_finite(const ValueField& u, const char* what) {
    for (std::size_t j = 0; j < u.n_y(); ++j) {
        for (std::size_t i = 0; i < u.n_x(); ++i) {
            if (!std::isfinite(u.at(i, j))) {
                throw NumericError(std::string(what) + ": non-finite utility at " +
                                   cell_name(i, j));
            }
        }
    }
}

ValueField eval_tragedy(const TragedyOfCommons& t, const DiscreteMeasure& m,
                        const GridSpec& grid) {
    const double alpha = mean_action(m, grid);
    const double scarcity = t.scarcity(alpha, grid.dx());
    ValueField u(grid);
    for (std::size_t j = 0; j < grid.n_y; ++j) {
        const double margin = t.type_weight(grid.y_center(j)) * scarcity - t.unit_cost;
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            u.at(i, j) = margin * grid.x_center(i);
        }
    }
    return u;
}

ValueField eval_qvoter_exchangeable(const QVoterExchangeable& v, const DiscreteMeasure& m,
                                    const GridSpec& grid) {
    const double eps = v.eps.value_or(grid.dx());
    ValueField u = density(m, grid);
    const double exponent = v.q - 1.0;
    if (v.q > 1.0) {
        const double cap = 1.0 / eps;
        for (double& p : u.data()) p = std::pow(std::min(p, cap), exponent);
    } else {
        for (double& p : u.data()) p = std::pow(std::max(p, eps), exponent);
    }
    return u;
}

ValueField eval_qvoter_typed(const QVoterTyped& v, const DiscreteMeasure& m,
                             const GridSpec& grid) {
    const double alpha = mean_action(m, grid);
    const double g = v.coupling ? v.coupling(alpha) : alpha;
    const double damp = 1.0 / (1.0 + 10.0 * g);
    ValueField u = density(m, grid);
    for (std::size_t j = 0; j < grid.n_y; ++j) {
        const double weight = grid.y_center(j) * damp;
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            u.at(i, j) *= weight;
        }
    }
    return u;
}

}  // namespace

void UtilitySpec::validate() const {
    struct Visitor {
        void operator()(const ConstantUtility& c) const {
            if (!std::isfinite(c.value)) {
                throw std::invalid_argument("UtilitySpec: constant value must be finite");
            }
        }
        void operator()(const TragedyOfCommons& t) const {
            if (!t.type_weight || !t.scarcity) {
                throw std::invalid_argument("UtilitySpec: commons utility needs f and A");
            }
            if (t.unit_cost < 0.0) {
                throw std::invalid_argument("UtilitySpec: unit cost must be >= 0");
            }
        }
        void operator()(const PenalizedTragedy& p) const {
            (*this)(p.base);
            if (p.penalty < 0.0) {
                throw std::invalid_argument("UtilitySpec: penalty must be >= 0");
            }
            if (!(p.threshold > 0.0 && p.threshold < 1.0)) {
                throw std::invalid_argument("UtilitySpec: penalty threshold must lie in (0,1)");
            }
        }
        void operator()(const QVoterExchangeable& v) const {
            if (!(v.q > 0.0) || v.q == 1.0) {
                throw std::invalid_argument(
                    "UtilitySpec: q must be positive and != 1 (the drift vanishes at q = 1)");
            }
            if (v.eps && !(*v.eps > 0.0)) {
                throw std::invalid_argument("UtilitySpec: regularization eps must be > 0");
            }
        }
        void operator()(const QVoterTyped&) const {}
        void operator()(const TabulatedUtility& t) const {
            if (t.table.size() == 0) {
                throw std::invalid_argument("UtilitySpec: tabulated utility needs a table");
            }
        }
    };
    std::visit(Visitor{}, family);
    if (bound_hint && !(*bound_hint > 0.0)) {
        throw std::invalid_argument("UtilitySpec: bound_hint must be > 0");
    }
}

std::function<double(double)> affine_type_weight(double intercept, double slope) {
    return [intercept, slope](double y) { return intercept + slope * y; };
}

std::function<double(double, double)> inverse_square_scarcity(std::optional<double> floor) {
    return [floor](double alpha, double dx) {
        const double lo = floor.value_or(dx);
        const double a = std::max(alpha, lo);
        return 1.0 / (a * a);
    };
}

UtilitySpec tragedy_commons_case() {
    UtilitySpec spec{TragedyOfCommons{affine_type_weight(1.0, 2.0), inverse_square_scarcity(),
                                      4.0},
                     std::nullopt};
    spec.validate();
    return spec;
}

UtilitySpec penalized_commons_case(double penalty, double threshold) {
    const auto base = std::get<TragedyOfCommons>(tragedy_commons_case().family);
    UtilitySpec spec{PenalizedTragedy{base, penalty, threshold}, std::nullopt};
    spec.validate();
    return spec;
}

ValueField evaluate(const UtilitySpec& spec, const DiscreteMeasure& m, const GridSpec& grid) {
    spec.validate();
    if (!m.values().matches(grid)) {
        throw std::invalid_argument("evaluate: measure shape does not match grid");
    }

    ValueField u;
    if (const auto* c = std::get_if<ConstantUtility>(&spec.family)) {
        u = ValueField(grid, c->value);
    } else if (const auto* t = std::get_if<TragedyOfCommons>(&spec.family)) {
        u = eval_tragedy(*t, m, grid);
    } else if (const auto* p = std::get_if<PenalizedTragedy>(&spec.family)) {
        u = eval_tragedy(p->base, m, grid);
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            if (grid.x_center(i) >= p->threshold) {
                for (std::size_t j = 0; j < grid.n_y; ++j) u.at(i, j) -= p->penalty;
            }
        }
    } else if (const auto* v = std::get_if<QVoterExchangeable>(&spec.family)) {
        u = eval_qvoter_exchangeable(*v, m, grid);
    } else if (const auto* v2 = std::get_if<QVoterTyped>(&spec.family)) {
        u = eval_qvoter_typed(*v2, m, grid);
    } else {
        const auto& table = std::get<TabulatedUtility>(spec.family).table;
        if (!table.matches(grid)) {
            throw std::invalid_argument("evaluate: tabulated utility shape does not match grid");
        }
        u = table;
    }
    check_finite(u, "evaluate");
    return u;
}

DiscreteMeasure random_measure(const GridSpec& grid, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::exponential_distribution<double> draw(1.0);
    GridArray values(grid);
    for (double& v : values.data()) v = draw(eng);
    return DiscreteMeasure::renormalized(std::move(values));
}

ConditionProbe probe_conditions(const UtilitySpec& spec, const GridSpec& grid,
                                std::size_t trials, std::uint64_t rng_seed) {
    if (trials < 2) {
        throw std::invalid_argument("probe_conditions: need at least 2 trials");
    }
    ConditionProbe probe;
    bool first = true;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto m1 = random_measure(grid, rng_seed + 2 * t);
        const auto m2 = random_measure(grid, rng_seed + 2 * t + 1);
        const auto u1 = evaluate(spec, m1, grid);
        const auto u2 = evaluate(spec, m2, grid);
        for (double v : u1.data()) {
            if (first || v < probe.u_min) probe.u_min = v;
            if (first || v > probe.u_max) probe.u_max = v;
            first = false;
        }
        for (double v : u2.data()) {
            probe.u_min = std::min(probe.u_min, v);
            probe.u_max = std::max(probe.u_max, v);
        }
        const double gap = tv_row_distance(m1.values(), m2.values(), grid);
        if (gap > 0.0) {
            const double ratio = field_stats(subtract(u1, u2)).max_abs / gap;
            probe.lipschitz_estimate = std::max(probe.lipschitz_estimate, ratio);
        }
    }
    return probe;
}

}  // namespace rdmfg

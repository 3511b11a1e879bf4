#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>

#include "rdmfg/grid.hpp"

namespace rdmfg {

/// Measure-independent utility U == value everywhere.
struct ConstantUtility {
    double value = 0.0;
};

/**
 * Commons-harvesting utility U(x, y, m) = (f(y) A(alpha) - c) x evaluated at
 * cell centers, where alpha is the population mean action. f is the type
 * weight (increasing: higher types weight benefit more), A the scarcity
 * response (decreasing in alpha), c the unit harvesting cost.
 *
 * `scarcity` receives (alpha, dx) so the standard preset max(alpha, dx)^-2
 * can regularize with the grid's own cell width.
 */
struct TragedyOfCommons {
    std::function<double(double)> type_weight;          // f(y)
    std::function<double(double, double)> scarcity;     // A(alpha, dx)
    double unit_cost = 0.0;                             // c >= 0
};

/// TragedyOfCommons minus a flat penalty P on cells with x >= x_bar.
struct PenalizedTragedy {
    TragedyOfCommons base;
    double penalty = 0.0;       // P >= 0
    double threshold = 0.5;     // x_bar in (0,1)
};

/**
 * Power-of-density utility min{p, 1/eps}^(q-1) for q > 1, or
 * max{p, eps}^(q-1) for q in (0,1). eps unset defaults to 1/n_x, which
 * caps at the maximal single-cell density (provably inactive for q = 2).
 */
struct QVoterExchangeable {
    double q = 2.0;                      // q > 0, q != 1
    std::optional<double> eps;           // > 0; default 1/n_x
};

/**
 * Typed variant: U(x, y, p) = y p(x,y) / (1 + 10 g(alpha)). The coupling g
 * defaults to the identity so a larger mean action lowers every utility.
 */
struct QVoterTyped {
    std::function<double(double)> coupling;   // g(alpha); identity if empty
};

/// Fixed grid table; evaluation ignores the measure.
struct TabulatedUtility {
    ValueField table;
};

/**
 * UtilitySpec: tagged description of one utility family plus an optional
 * a-priori bound estimate used by strict stability checking.
 */
struct UtilitySpec {
    std::variant<ConstantUtility, TragedyOfCommons, PenalizedTragedy, QVoterExchangeable,
                 QVoterTyped, TabulatedUtility>
        family;
    std::optional<double> bound_hint;   // estimate of the bound constant

    /// Throws std::invalid_argument if the family's parameter invariants fail
    /// (negative cost or penalty, threshold outside (0,1), q = 1, eps <= 0).
    void validate() const;
};

/// f(y) = intercept + slope * y.
std::function<double(double)> affine_type_weight(double intercept, double slope);

/// A(alpha) = max(alpha, floor)^(-2); floor unset uses the grid's dx.
std::function<double(double, double)> inverse_square_scarcity(
    std::optional<double> floor = std::nullopt);

/// The computational commons case: f(y) = 1 + 2y, A = max(alpha, dx)^-2, c = 4.
UtilitySpec tragedy_commons_case();

/// Same with the flat penalty P on x >= x_bar (default threshold 3/4).
UtilitySpec penalized_commons_case(double penalty, double threshold = 0.75);

/// Evaluates the utility on the grid for the given measure.
/// Throws NumericError naming the first cell if any entry is non-finite.
ValueField evaluate(const UtilitySpec& spec, const DiscreteMeasure& m, const GridSpec& grid);

struct ConditionProbe {
    double u_min = 0.0;
    double u_max = 0.0;
    double lipschitz_estimate = 0.0;   // empirical lower bound on L_U
};

/**
 * Samples random measure pairs and reports the observed utility range and the
 * worst ratio max|U(m) - U(m')| / tv_row_norm(m - m'). Empirical lower bounds
 * on the boundedness and Lipschitz constants; a diagnostic, not a proof.
 */
ConditionProbe probe_conditions(const UtilitySpec& spec, const GridSpec& grid,
                                std::size_t trials, std::uint64_t rng_seed);

/// Random valid measure (rows renormalized), deterministic in the seed.
/// Shared by probe_conditions and the property tests.
DiscreteMeasure random_measure(const GridSpec& grid, std::uint64_t seed);

}  // namespace rdmfg

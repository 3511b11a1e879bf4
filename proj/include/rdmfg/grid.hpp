#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdmfg {

/// Thrown when a numerical routine leaves its admissible regime
/// (negative mass beyond tolerance, NaN/Inf in an iterate, rate overflow).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * GridSpec: cell-centered discretization of the unit square.
 *
 * Action cells i = 0..n_x-1 with centers x(i) = (i + 1/2) / n_x, type cells
 * j = 0..n_y-1 with centers y(j) = (j + 1/2) / n_y. All centers lie strictly
 * inside (0,1) and are symmetric about 1/2. There are no boundary nodes;
 * the dynamics are integral in x, so no ghost cells are needed.
 */
struct GridSpec {
    std::size_t n_x = 1;
    std::size_t n_y = 1;

    GridSpec() = default;
    GridSpec(std::size_t nx, std::size_t ny) : n_x(nx), n_y(ny) {
        if (n_x < 1 || n_y < 1) {
            throw std::invalid_argument("GridSpec: resolutions must be >= 1");
        }
    }

    double dx() const { return 1.0 / static_cast<double>(n_x); }
    double dy() const { return 1.0 / static_cast<double>(n_y); }
    double x_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }
    double y_center(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dy(); }
    std::size_t cells() const { return n_x * n_y; }

    bool operator==(const GridSpec& other) const {
        return n_x == other.n_x && n_y == other.n_y;
    }
};

/**
 * GridArray: a real-valued grid function on GridSpec cells.
 *
 * Storage is type-row contiguous: entry (i, j) lives at index j*n_x + i,
 * so row(j) is the action profile of type j. Used both for value fields
 * (utilities, value functions, densities) and for signed differences of
 * measures; DiscreteMeasure wraps it with probability invariants.
 */
class GridArray {
public:
    GridArray() = default;
    explicit GridArray(const GridSpec& grid, double fill = 0.0)
        : n_x_(grid.n_x), n_y_(grid.n_y), values_(grid.cells(), fill) {}
    GridArray(std::size_t n_x, std::size_t n_y, std::vector<double> values)
        : n_x_(n_x), n_y_(n_y), values_(std::move(values)) {
        if (values_.size() != n_x_ * n_y_) {
            throw std::invalid_argument("GridArray: value count does not match shape");
        }
    }

    std::size_t n_x() const { return n_x_; }
    std::size_t n_y() const { return n_y_; }
    std::size_t size() const { return values_.size(); }

    double& at(std::size_t i, std::size_t j) { return values_[j * n_x_ + i]; }
    double at(std::size_t i, std::size_t j) const { return values_[j * n_x_ + i]; }

    std::span<double> row(std::size_t j) { return {values_.data() + j * n_x_, n_x_}; }
    std::span<const double> row(std::size_t j) const {
        return {values_.data() + j * n_x_, n_x_};
    }

    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool same_shape(const GridArray& other) const {
        return n_x_ == other.n_x_ && n_y_ == other.n_y_;
    }
    bool matches(const GridSpec& grid) const {
        return n_x_ == grid.n_x && n_y_ == grid.n_y;
    }

private:
    std::size_t n_x_ = 0;
    std::size_t n_y_ = 0;
    std::vector<double> values_;
};

/// Grid value field (utilities, value functions, densities). Alias of
/// GridArray; validity (finiteness) is checked where contracts demand it.
using ValueField = GridArray;

/// Row-sum tolerance for the probability invariant.
inline constexpr double kRowSumTolerance = 1e-12;

/**
 * DiscreteMeasure: per-type probability masses m(i, j) >= 0 with each type
 * row summing to 1 within kRowSumTolerance.
 *
 * Construction validates; `renormalized` rescales rows on explicit request
 * (never silently); `unchecked` wraps solver iterates that are returned for
 * inspection and may not satisfy the invariants.
 */
class DiscreteMeasure {
public:
    /// Validating constructor; throws std::invalid_argument on violation.
    static DiscreteMeasure from_array(GridArray values);

    /// Explicitly rescales every type row to unit mass, then validates.
    /// Rows with non-positive total mass are rejected.
    static DiscreteMeasure renormalized(GridArray values);

    /// Wraps without validation (diagnostic payloads of non-converged solves).
    static DiscreteMeasure unchecked(GridArray values);

    /// Uniform measure: every entry 1/n_x.
    static DiscreteMeasure uniform(const GridSpec& grid);

    const GridArray& values() const { return values_; }
    std::size_t n_x() const { return values_.n_x(); }
    std::size_t n_y() const { return values_.n_y(); }
    double at(std::size_t i, std::size_t j) const { return values_.at(i, j); }
    std::span<const double> row(std::size_t j) const { return values_.row(j); }

    /// Max over rows of |row sum - 1|.
    double worst_row_sum_deviation() const;

private:
    explicit DiscreteMeasure(GridArray values) : values_(std::move(values)) {}
    GridArray values_;
};

struct FieldStats {
    double max_abs = 0.0;
    double mean_abs = 0.0;
};

/// Density recovery p(i,j) = n_x * m(i,j).
ValueField density(const DiscreteMeasure& m, const GridSpec& grid);

/// Discrete analogue of the type-wise TV norm: max over rows j of
/// sum_i |a(i,j)|. Accepts signed differences; zero iff a == 0.
double tv_row_norm(const GridArray& a, const GridSpec& grid);

/// tv_row_norm of (a - b); shapes must agree.
double tv_row_distance(const GridArray& a, const GridArray& b, const GridSpec& grid);

/// Population mean action: dy * sum_j sum_i x(i) m(i,j). The dy weight
/// makes the double sum match the continuum integral over types; it reduces
/// to the plain double sum when n_y = 1.
double mean_action(const DiscreteMeasure& m, const GridSpec& grid);

/// Max and mean of |a| over all grid points. Entries must be finite.
FieldStats field_stats(const GridArray& a);

/// Elementwise a - b; shapes must agree.
GridArray subtract(const GridArray& a, const GridArray& b);

}  // namespace rdmfg

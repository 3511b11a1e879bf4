#include "rdmfg/grid.hpp"

#include <cmath>
#include <cstdio>

namespace rdmfg {

namespace {

std::string cell_name(std::size_t i, std::size_t j) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "cell (%zu, %zu)", i + 1, j + 1);
    return buf;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::from_array(GridArray values) {
    const std::size_t n_x = values.n_x();
    const std::size_t n_y = values.n_y();
    if (n_x == 0 || n_y == 0) {
        throw std::invalid_argument("DiscreteMeasure: empty array");
    }
    for (std::size_t j = 0; j < n_y; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_x; ++i) {
            const double v = values.at(i, j);
            if (!(v >= 0.0)) {  // catches negatives and NaN
                throw std::invalid_argument("DiscreteMeasure: negative or non-finite mass at " +
                                            cell_name(i, j));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw std::invalid_argument("DiscreteMeasure: type row " + std::to_string(j + 1) +
                                        " sums to " + std::to_string(sum) + ", not 1");
        }
    }
    return DiscreteMeasure(std::move(values));
}

DiscreteMeasure DiscreteMeasure::renormalized(GridArray values) {
    const std::size_t n_x = values.n_x();
    const std::size_t n_y = values.n_y();
    for (std::size_t j = 0; j < n_y; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_x; ++i) sum += values.at(i, j);
        if (!(sum > 0.0) || !std::isfinite(sum)) {
            throw std::invalid_argument("DiscreteMeasure: type row " + std::to_string(j + 1) +
                                        " has non-positive total mass, cannot renormalize");
        }
        for (std::size_t i = 0; i < n_x; ++i) values.at(i, j) /= sum;
    }
    return from_array(std::move(values));
}

DiscreteMeasure DiscreteMeasure::unchecked(GridArray values) {
    return DiscreteMeasure(std::move(values));
}

DiscreteMeasure DiscreteMeasure::uniform(const GridSpec& grid) {
    GridArray values(grid, 1.0 / static_cast<double>(grid.n_x));
    return DiscreteMeasure(std::move(values));
}

double DiscreteMeasure::worst_row_sum_deviation() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < values_.n_y(); ++j) {
        double sum = 0.0;
        for (double v : values_.row(j)) sum += v;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

ValueField density(const DiscreteMeasure& m, const GridSpec& grid) {
    if (!m.values().matches(grid)) {
        throw std::invalid_argument("density: measure shape does not match grid");
    }
    ValueField p = m.values();
    const double scale = static_cast<double>(grid.n_x);
    for (double& v : p.data()) v *= scale;
    return p;
}

double tv_row_norm(const GridArray& a, const GridSpec& grid) {
    if (!a.matches(grid)) {
        throw std::invalid_argument("tv_row_norm: array shape does not match grid");
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < a.n_y(); ++j) {
        double sum = 0.0;
        for (double v : a.row(j)) sum += std::abs(v);
        worst = std::max(worst, sum);
    }
    return worst;
}

double tv_row_distance(const GridArray& a, const GridArray& b, const GridSpec& grid) {
    return tv_row_norm(subtract(a, b), grid);
}

double mean_action(const DiscreteMeasure& m, const GridSpec& grid) {
    if (!m.values().matches(grid)) {
        throw std::invalid_argument("mean_action: measure shape does not match grid");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < grid.n_y; ++j) {
        double row_mean = 0.0;
        const auto row = m.row(j);
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            row_mean += grid.x_center(i) * row[i];
        }
        total += row_mean;
    }
    return grid.dy() * total;
}

FieldStats field_stats(const GridArray& a) {
    FieldStats stats;
    if (a.size() == 0) return stats;
    double sum = 0.0;
    for (double v : a.data()) {
        if (!std::isfinite(v)) {
            throw NumericError("field_stats: non-finite entry");
        }
        const double av = std::abs(v);
        stats.max_abs = std::max(stats.max_abs, av);
        sum += av;
    }
    stats.mean_abs = sum / static_cast<double>(a.size());
    return stats;
}

GridArray subtract(const GridArray& a, const GridArray& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("subtract: shape mismatch");
    }
    GridArray out = a;
    for (std::size_t k = 0; k < out.data().size(); ++k) {
        out.data()[k] -= b.data()[k];
    }
    return out;
}

}  // namespace rdmfg

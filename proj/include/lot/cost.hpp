#pragma once

#include <fstream>
#include <sstream>

#include "lot/lattice.hpp"

namespace lot {

// Cost values c(x, y) sampled on the atoms of two finite spaces.
struct CostMatrix {
    SpacePtr rows, cols;
    Vec values;  // row-major n*m

    std::size_t n() const { return rows->n_points; }
    std::size_t m() const { return cols->n_points; }
    double at(std::size_t i, std::size_t j) const { return values[i * m() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * m() + j]; }

    void validate() const {
        if (!rows || !cols) throw ValidationError("CostMatrix: null space");
        if (values.size() != n() * m()) throw DimensionError("CostMatrix: value count mismatch");
        for (double v : values)
            if (!std::isfinite(v)) throw ValidationError("CostMatrix: costs must be finite");
    }
};

inline CostMatrix cost_from_values(SpacePtr rows, SpacePtr cols, Vec values) {
    CostMatrix c{std::move(rows), std::move(cols), std::move(values)};
    c.validate();
    return c;
}

inline CostMatrix constant_cost(SpacePtr rows, SpacePtr cols, double value) {
    std::size_t n = rows->n_points, m = cols->n_points;
    return cost_from_values(std::move(rows), std::move(cols), Vec(n * m, value));
}

// Named ground costs on coordinate spaces: "sqeuclidean", "euclidean",
// "lp(q)" (sum of |dx|^q), and "zero-diagonal-indicator" (0 on the diagonal,
// 1 elsewhere; spaces must have equal size).
inline CostMatrix ground_cost(const SpacePtr& rows, const SpacePtr& cols, const std::string& name,
                              double q = 2.0) {
    const std::size_t n = rows->n_points, m = cols->n_points;
    Vec vals(n * m);
    if (name == "zero-diagonal-indicator") {
        if (n != m) throw ValidationError("ground_cost: zero-diagonal-indicator needs equal sizes");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) vals[i * m + j] = i == j ? 0.0 : 1.0;
        return cost_from_values(rows, cols, std::move(vals));
    }
    if (rows->coords.empty() || cols->coords.empty())
        throw ValidationError("ground_cost: '" + name + "' needs point coordinates");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const auto& x = rows->coords[i];
            const auto& y = cols->coords[j];
            if (x.size() != y.size()) throw DimensionError("ground_cost: coordinate dim mismatch");
            double acc = 0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                double d = std::abs(x[k] - y[k]);
                if (name == "sqeuclidean" || name == "euclidean")
                    acc += d * d;
                else if (name == "lp")
                    acc += std::pow(d, q);
                else
                    throw ValidationError("ground_cost: unknown ground cost '" + name + "'");
            }
            vals[i * m + j] = name == "euclidean" ? std::sqrt(acc) : acc;
        }
    return cost_from_values(rows, cols, std::move(vals));
}

// CSV: one row per line, comma separated, no header.
inline CostMatrix cost_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cost_from_csv: cannot open " + path);
    std::vector<Vec> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Vec row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ValidationError("cost_from_csv: bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ValidationError("cost_from_csv: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("cost_from_csv: empty file");
    Vec flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return cost_from_values(make_space(rows.size()), make_space(rows.front().size()), std::move(flat));
}

}  // namespace lot

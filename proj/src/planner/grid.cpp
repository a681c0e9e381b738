#include <algorithm>
#include <cmath>

#include "smrl/errors.hpp"
#include "smrl/planner.hpp"

namespace smrl {

StateGrid::StateGrid(Box box, std::vector<int> cells_per_axis)
    : box_(std::move(box)), cells_(std::move(cells_per_axis)) {
    if (static_cast<int>(cells_.size()) != box_.dim())
        throw ShapeError("grid: one cell count per axis is required");
    long total = 1;
    for (int k = 0; k < box_.dim(); ++k) {
        if (cells_[k] < 1) throw ArgumentError("grid: need at least one cell per axis");
        width_.push_back((box_.hi(k) - box_.lo(k)) / cells_[k]);
        total *= cells_[k];
        if (total > 50'000'000) throw ArgumentError("grid: too many cells");
    }
    num_cells_ = static_cast<int>(total);
}

StateGrid StateGrid::uniform(const Box& box, int cells_per_axis) {
    return StateGrid(box, std::vector<int>(static_cast<std::size_t>(box.dim()), cells_per_axis));
}

double StateGrid::edge(int k, int j) const {
    if (j == cells_[k]) return box_.hi(k);
    return box_.lo(k) + j * width_[k];
}

int StateGrid::flat(const std::vector<int>& m) const {
    int idx = 0, stride = 1;
    for (int k = 0; k < dim(); ++k) {
        idx += m[k] * stride;
        stride *= cells_[k];
    }
    return idx;
}

std::vector<int> StateGrid::multi(int f) const {
    std::vector<int> m(static_cast<std::size_t>(dim()));
    for (int k = 0; k < dim(); ++k) {
        m[k] = f % cells_[k];
        f /= cells_[k];
    }
    return m;
}

int StateGrid::axis_cell(int k, double x) const {
    if (std::isnan(x)) throw DomainError("grid: NaN coordinate");
    const double t = std::floor((x - box_.lo(k)) / width_[k]);
    if (t < 0.0) return 0;
    if (t >= cells_[k]) return cells_[k] - 1;
    return static_cast<int>(t);
}

int StateGrid::cell_of(const Vec& s) const {
    if (s.size() != dim()) throw ShapeError("grid: state dimension mismatch");
    int idx = 0, stride = 1;
    for (int k = 0; k < dim(); ++k) {
        idx += axis_cell(k, s(k)) * stride;
        stride *= cells_[k];
    }
    return idx;
}

Vec StateGrid::center(int cell) const {
    const auto m = multi(cell);
    Vec c(dim());
    for (int k = 0; k < dim(); ++k) c(k) = 0.5 * (edge(k, m[k]) + edge(k, m[k] + 1));
    return c;
}

Box StateGrid::cell_box(int cell) const {
    const auto m = multi(cell);
    Vec lo(dim()), hi(dim());
    for (int k = 0; k < dim(); ++k) {
        lo(k) = edge(k, m[k]);
        hi(k) = edge(k, m[k] + 1);
    }
    return Box(lo, hi);
}

StateGrid StateGrid::refined() const {
    std::vector<int> c = cells_;
    for (int& n : c) n *= 2;
    return StateGrid(box_, c);
}

}  // namespace smrl

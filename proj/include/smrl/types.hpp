#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace smrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Axis-aligned box [lo, hi] in R^d.
struct Box {
    Vec lo;
    Vec hi;

    Box() = default;
    Box(Vec lo_, Vec hi_);
    static Box cube(int dim, double lo, double hi);

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& s) const;
    Vec clip(const Vec& s) const;
    double max_norm() const;  // max ||s|| over the box
};

// Column-stacking vectorization: vec(W)[i + j * rows] = W(i, j), so that
// vec(a b^T) = b (x) a.
inline Vec vec(const Mat& w) { return Eigen::Map<const Vec>(w.data(), w.size()); }

inline Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Mat>(v.data(), rows, cols);
}

bool all_finite(const Vec& v);

}  // namespace smrl

#include "smrl/kernels.hpp"

namespace smrl::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void syr_scalar(double alpha, const double* x, double* a, std::size_t n) {
    for (std::size_t r = 0; r < n; ++r) {
        const double ax = alpha * x[r];
        double* row = a + r * n;
        for (std::size_t c = 0; c < n; ++c) row[c] += ax * x[c];
    }
}

void gemv_scalar(const double* a, const double* x, double* y, std::size_t rows,
                 std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

constexpr KernelTable kScalar{"scalar", dot_scalar, axpy_scalar, syr_scalar, gemv_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace smrl::kernels

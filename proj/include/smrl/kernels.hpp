#pragma once
// Dense double-precision inner loops used by the estimator, the quadrature
// oracles and the planner backup. Each kernel has a scalar reference
// implementation and an AVX2/FMA variant; the variant is chosen once at
// startup from CPUID, overridable with SMRL_SIMD=scalar|avx2|auto.

#include <cstddef>
#include <span>

namespace smrl::kernels {

struct KernelTable {
    const char* name;
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // a += alpha * x x^T, a dense n x n (both triangles written)
    void (*syr)(double alpha, const double* x, double* a, std::size_t n);
    // y = a x, a row-major rows x cols
    void (*gemv)(const double* a, const double* x, double* y, std::size_t rows,
                 std::size_t cols);
};

const KernelTable& scalar_table();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_table();

// The table selected for this process.
const KernelTable& active();

double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void syr(double alpha, std::span<const double> x, std::span<double> a);
void gemv(std::span<const double> a, std::span<const double> x, std::span<double> y);

}  // namespace smrl::kernels

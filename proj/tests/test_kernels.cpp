#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "smrl/kernels.hpp"

using namespace smrl::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

const KernelTable* simd() { return avx2_table(); }

}  // namespace

TEST(Kernels, ScalarTableIsComplete) {
    const KernelTable& s = scalar_table();
    EXPECT_STREQ(s.name, "scalar");
    EXPECT_NE(s.dot, nullptr);
    EXPECT_NE(s.axpy, nullptr);
    EXPECT_NE(s.syr, nullptr);
    EXPECT_NE(s.gemv, nullptr);
}

TEST(Kernels, ScalarReferenceValues) {
    const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
    EXPECT_DOUBLE_EQ(scalar_table().dot(x.data(), y.data(), 3), 32.0);
    std::vector<double> z = y;
    scalar_table().axpy(2.0, x.data(), z.data(), 3);
    EXPECT_EQ(z, (std::vector<double>{6, 9, 12}));
    std::vector<double> a(9, 0.0);
    scalar_table().syr(1.0, x.data(), a.data(), 3);
    EXPECT_EQ(a, (std::vector<double>{1, 2, 3, 2, 4, 6, 3, 6, 9}));
    std::vector<double> out(3);
    scalar_table().gemv(a.data(), x.data(), out.data(), 3, 3);
    EXPECT_EQ(out, (std::vector<double>{14, 28, 42}));
}

TEST(Kernels, DotMatchesScalarForAllTailLengths) {
    if (!simd()) GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(1);
    for (std::size_t n = 0; n <= 67; ++n) {
        const auto x = random_vec(n, rng), y = random_vec(n, rng);
        EXPECT_LE(rel_err(simd()->dot(x.data(), y.data(), n), scalar_table().dot(x.data(), y.data(), n)),
                  1e-13)
            << "n = " << n;
    }
}

TEST(Kernels, AxpyMatchesScalarForAllTailLengths) {
    if (!simd()) GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(2);
    for (std::size_t n = 0; n <= 67; ++n) {
        const auto x = random_vec(n, rng);
        auto y1 = random_vec(n, rng);
        auto y2 = y1;
        simd()->axpy(0.7, x.data(), y1.data(), n);
        scalar_table().axpy(0.7, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_LE(rel_err(y1[i], y2[i]), 1e-14) << n << "/" << i;
    }
}

TEST(Kernels, SyrMatchesScalarForAllTailLengths) {
    if (!simd()) GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(3);
    for (std::size_t n = 0; n <= 67; ++n) {
        const auto x = random_vec(n, rng);
        auto a1 = random_vec(n * n, rng);
        auto a2 = a1;
        simd()->syr(-1.3, x.data(), a1.data(), n);
        scalar_table().syr(-1.3, x.data(), a2.data(), n);
        for (std::size_t i = 0; i < n * n; ++i) EXPECT_LE(rel_err(a1[i], a2[i]), 1e-14);
    }
}

TEST(Kernels, GemvMatchesScalarForAllShapes) {
    if (!simd()) GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(4);
    for (std::size_t cols = 0; cols <= 67; ++cols)
        for (std::size_t rows : {std::size_t{1}, std::size_t{3}, std::size_t{17}}) {
            const auto a = random_vec(rows * cols, rng), x = random_vec(cols, rng);
            std::vector<double> y1(rows), y2(rows);
            simd()->gemv(a.data(), x.data(), y1.data(), rows, cols);
            scalar_table().gemv(a.data(), x.data(), y2.data(), rows, cols);
            for (std::size_t r = 0; r < rows; ++r) EXPECT_LE(rel_err(y1[r], y2[r]), 1e-13);
        }
}

TEST(Kernels, SpanWrappersUseActiveTable) {
    std::vector<double> x{1, 1, 1, 1, 1, 1, 1, 1, 1}, y(9, 2.0);
    EXPECT_DOUBLE_EQ(dot(x, y), 18.0);
    axpy(1.0, x, y);
    EXPECT_DOUBLE_EQ(y[8], 3.0);
    const char* n = active().name;
    EXPECT_TRUE(std::string(n) == "scalar" || std::string(n) == "avx2");
}

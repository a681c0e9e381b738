#include <cassert>
#include <cstdlib>
#include <string_view>

#include "smrl/kernels.hpp"

namespace smrl::kernels {
namespace {

const KernelTable& select() {
    const char* env = std::getenv("SMRL_SIMD");
    const std::string_view want = env ? env : "auto";
    if (want == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    return active().dot(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

void syr(double alpha, std::span<const double> x, std::span<double> a) {
    assert(a.size() == x.size() * x.size());
    active().syr(alpha, x.data(), a.data(), x.size());
}

void gemv(std::span<const double> a, std::span<const double> x, std::span<double> y) {
    assert(a.size() == x.size() * y.size());
    active().gemv(a.data(), x.data(), y.data(), y.size(), x.size());
}

}  // namespace smrl::kernels

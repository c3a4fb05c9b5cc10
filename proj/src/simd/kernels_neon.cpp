#include "illumine/simd/kernels.hpp"

#include <arm_neon.h>

namespace illumine::simd {
namespace {

// Two 2-lane registers stand in for the reference's four lanes.
double squared_distance(const double* a, const double* b, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d01 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d23 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc01 = vaddq_f64(acc01, vmulq_f64(d01, d01));
        acc23 = vaddq_f64(acc23, vmulq_f64(d23, d23));
    }
    double total = (vgetq_lane_f64(acc01, 0) + vgetq_lane_f64(acc01, 1)) +
                   (vgetq_lane_f64(acc23, 0) + vgetq_lane_f64(acc23, 1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        total = total + d * d;
    }
    return total;
}

void squared_distances(const double* query, const double* rows, std::size_t n_rows,
                       std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = squared_distance(query, rows + r * dim, dim);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(y + i)));
    for (; i < n; ++i) y[i] = alpha * y[i];
}

}  // namespace

namespace detail {
const KernelTable neon_table{Isa::neon, &squared_distance, &squared_distances, &axpy, &scale};
}

}  // namespace illumine::simd

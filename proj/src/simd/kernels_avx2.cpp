#include "illumine/simd/kernels.hpp"

#include <immintrin.h>

namespace illumine::simd {
namespace {

double squared_distance(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
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
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] = alpha * y[i];
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2, &squared_distance, &squared_distances, &axpy, &scale};
}

}  // namespace illumine::simd

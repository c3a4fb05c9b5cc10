#include "illumine/simd/kernels.hpp"

namespace illumine::simd {
namespace {

double squared_distance(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t l = 0; l < 4; ++l) {
            const double d = a[i + l] - b[i + l];
            lane[l] = lane[l] + d * d;
        }
    }
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
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = alpha * y[i];
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar, &squared_distance, &squared_distances, &axpy, &scale};
}

}  // namespace illumine::simd

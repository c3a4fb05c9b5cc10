#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision kernels behind every inner loop that touches vector
// components. The scalar variant is the reference: it accumulates squared
// differences in four strided lanes combined as (l0 + l1) + (l2 + l3), with
// the remainder added sequentially afterwards. Vector variants reproduce that
// order exactly, so all variants are bit-identical.

namespace illumine::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    Isa isa;
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    // out[r] = squared_distance(query, rows + r * dim) for r < n_rows
    void (*squared_distances)(const double* query, const double* rows, std::size_t n_rows,
                              std::size_t dim, double* out);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y *= alpha
    void (*scale)(double alpha, double* y, std::size_t n);
};

namespace detail {
extern const KernelTable scalar_table;
#if defined(ILLUMINE_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(ILLUMINE_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

/// True when the variant was compiled in and the running CPU supports it.
bool available(Isa isa) noexcept;

/// Table for a specific variant; throws if it is not available.
const KernelTable& table(Isa isa);

/// Variant chosen at first use: the widest available, unless ILLUMINE_SIMD
/// names another one ("scalar", "avx2", "neon").
const KernelTable& active();

double squared_distance(std::span<const double> a, std::span<const double> b);
void squared_distances(std::span<const double> query, std::span<const double> rows,
                       std::size_t dim, std::span<double> out);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> y);

}  // namespace illumine::simd

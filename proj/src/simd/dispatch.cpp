#include "illumine/error.hpp"
#include "illumine/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace illumine::simd {

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool available(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(ILLUMINE_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::neon:
#if defined(ILLUMINE_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!available(isa))
        throw Error(ErrorCode::InvalidArgument,
                    "kernel variant '" + std::string(to_string(isa)) + "' not available");
    switch (isa) {
#if defined(ILLUMINE_HAVE_AVX2)
        case Isa::avx2: return detail::avx2_table;
#endif
#if defined(ILLUMINE_HAVE_NEON)
        case Isa::neon: return detail::neon_table;
#endif
        default: return detail::scalar_table;
    }
}

namespace {

const KernelTable& select() {
    if (const char* forced = std::getenv("ILLUMINE_SIMD")) {
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
            if (to_string(isa) == forced && available(isa)) return table(isa);
    }
    if (available(Isa::avx2)) return table(Isa::avx2);
    if (available(Isa::neon)) return table(Isa::neon);
    return detail::scalar_table;
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& chosen = select();
    return chosen;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    return active().squared_distance(a.data(), b.data(), a.size());
}

void squared_distances(std::span<const double> query, std::span<const double> rows,
                       std::size_t dim, std::span<double> out) {
    active().squared_distances(query.data(), rows.data(), out.size(), dim, out.data());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), y.size());
}

void scale(double alpha, std::span<double> y) { active().scale(alpha, y.data(), y.size()); }

}  // namespace illumine::simd

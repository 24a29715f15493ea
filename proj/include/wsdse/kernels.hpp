#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop arithmetic kernels. Scalar reference implementations plus SIMD
// variants (AVX2 on x86-64, NEON on aarch64) selected once at startup via
// runtime feature detection. The scalar versions are the semantic reference;
// SIMD variants may reorder accumulation and are equivalence-tested against
// the scalar path to a relative tolerance.

namespace wsdse::kernels {

using AxpyFn = void (*)(float a, const float* x, float* y, std::size_t n);
using DotFn = float (*)(const float* x, const float* y, std::size_t n);
using SumSqDiffFn = double (*)(const float* x, const float* y, std::size_t n);

// y[i] += a * x[i]
void axpy_scalar(float a, const float* x, float* y, std::size_t n);
// sum x[i] * y[i]
float dot_scalar(const float* x, const float* y, std::size_t n);
// sum (x[i] - y[i])^2, accumulated in double
double sum_sq_diff_scalar(const float* x, const float* y, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
// Only callable when the CPU reports AVX2+FMA; active() checks at startup.
void axpy_avx2(float a, const float* x, float* y, std::size_t n);
float dot_avx2(const float* x, const float* y, std::size_t n);
double sum_sq_diff_avx2(const float* x, const float* y, std::size_t n);
#endif

#if defined(__ARM_NEON)
void axpy_neon(float a, const float* x, float* y, std::size_t n);
float dot_neon(const float* x, const float* y, std::size_t n);
double sum_sq_diff_neon(const float* x, const float* y, std::size_t n);
#endif

/// Active dispatch table. Selected once, before any worker threads start;
/// stable for the lifetime of the process so repeated evaluations of the
/// same model are bit-identical.
struct Dispatch {
    AxpyFn axpy;
    DotFn dot;
    SumSqDiffFn sum_sq_diff;
    std::string_view backend; // "scalar", "avx2", "neon"
};

const Dispatch& active();

/// Force the scalar backend (diagnostics / reproducibility across ISAs).
void force_scalar();

inline void axpy(float a, const float* x, float* y, std::size_t n) {
    active().axpy(a, x, y, n);
}
inline float dot(const float* x, const float* y, std::size_t n) {
    return active().dot(x, y, n);
}
inline double sum_sq_diff(const float* x, const float* y, std::size_t n) {
    return active().sum_sq_diff(x, y, n);
}

} // namespace wsdse::kernels

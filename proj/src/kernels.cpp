#include "wsdse/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define WSDSE_X86 1
#include <immintrin.h>
#endif
#if defined(__ARM_NEON)
#include <arm_neon.h>
#endif

namespace wsdse::kernels {

void axpy_scalar(float a, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

float dot_scalar(const float* x, const float* y, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_sq_diff_scalar(const float* x, const float* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
        acc += d * d;
    }
    return acc;
}

#if defined(WSDSE_X86)

__attribute__((target("avx2,fma")))
void axpy_avx2(float a, const float* x, float* y, std::size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vy = _mm256_loadu_ps(y + i);
        vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vy);
        _mm256_storeu_ps(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma")))
float dot_avx2(const float* x, const float* y, std::size_t n) {
    __m256 acc = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
    alignas(32) float lanes[8];
    _mm256_store_ps(lanes, acc);
    float tail = 0.0f;
    for (; i < n; ++i) tail += x[i] * y[i];
    return ((lanes[0] + lanes[4]) + (lanes[1] + lanes[5])) +
           ((lanes[2] + lanes[6]) + (lanes[3] + lanes[7])) + tail;
}

__attribute__((target("avx2,fma")))
double sum_sq_diff_avx2(const float* x, const float* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
        const __m256d dy = _mm256_cvtps_pd(_mm_loadu_ps(y + i));
        const __m256d d = _mm256_sub_pd(dx, dy);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
    for (; i < n; ++i) {
        const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
        sum += d * d;
    }
    return sum;
}

#endif // WSDSE_X86

#if defined(__ARM_NEON)

void axpy_neon(float a, const float* x, float* y, std::size_t n) {
    const float32x4_t va = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t vy = vld1q_f32(y + i);
        vy = vmlaq_f32(vy, va, vld1q_f32(x + i));
        vst1q_f32(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

float dot_neon(const float* x, const float* y, std::size_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = vmlaq_f32(acc, vld1q_f32(x + i), vld1q_f32(y + i));
    float sum = vaddvq_f32(acc);
    for (; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

double sum_sq_diff_neon(const float* x, const float* y, std::size_t n) {
    return sum_sq_diff_scalar(x, y, n);
}

#endif // __ARM_NEON

namespace {

Dispatch detect() {
#if defined(__ARM_NEON)
    return {axpy_neon, dot_neon, sum_sq_diff_neon, "neon"};
#elif defined(WSDSE_X86) && defined(__GNUC__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return {axpy_avx2, dot_avx2, sum_sq_diff_avx2, "avx2"};
    return {axpy_scalar, dot_scalar, sum_sq_diff_scalar, "scalar"};
#else
    return {axpy_scalar, dot_scalar, sum_sq_diff_scalar, "scalar"};
#endif
}

Dispatch g_dispatch = detect();

} // namespace

const Dispatch& active() { return g_dispatch; }

void force_scalar() {
    g_dispatch = {axpy_scalar, dot_scalar, sum_sq_diff_scalar, "scalar"};
}

} // namespace wsdse::kernels

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string_view>

// Low-level numeric kernels behind the feature maps, filter updates and
// moment accumulators. Every operation has a scalar reference implementation
// and, on x86-64, an AVX2+FMA variant; the active backend is chosen at
// runtime (best available by default) and can be forced for testing or to
// replay a recorded experiment on the backend that produced it.
//
// Determinism contract: for a fixed backend, every kernel is a pure function
// of its arguments with a fixed operation order, so results are bitwise
// reproducible. The scalar and AVX2 backends agree bit-for-bit on the
// element-wise ops (same fused-multiply-add evaluation tree) and to ~1 ulp
// scaled by length on reductions (different summation order) and cis
// (polynomial vs libm).

namespace recf::kernels {

enum class Backend { scalar, avx2 };

struct KernelOps {
    // acc[i] += w * x[i]
    void (*axpy)(double w, const double* x, double* acc, std::size_t n);

    // out_re[i] = scale * cos(theta[i]); out_im[i] = scale * sin(theta[i])
    void (*cis_scaled)(const double* theta, std::size_t n, double scale,
                       double* out_re, double* out_im);

    // sum_i conj(a[i]) * b[i], returned through (re, im)
    void (*cdotc)(const double* are, const double* aim, const double* bre,
                  const double* bim, std::size_t n, double* re, double* im);

    // y[i] += s * x[i]
    void (*caxpy)(double sre, double sim, const double* xre, const double* xim,
                  double* yre, double* yim, std::size_t n);

    // y[i] += s * conj(x[i])
    void (*caxpy_conj)(double sre, double sim, const double* xre, const double* xim,
                       double* yre, double* yim, std::size_t n);

    // y[i] = s * x[i]
    void (*cscale)(double sre, double sim, const double* xre, const double* xim,
                   double* yre, double* yim, std::size_t n);

    // sum_i |a[i]|^2
    double (*norm2)(const double* re, const double* im, std::size_t n);

    // sum_i |a[i] - b[i]|^2
    double (*diff_norm2)(const double* are, const double* aim, const double* bre,
                         const double* bim, std::size_t n);
};

const KernelOps& scalar_ops();
// nullptr when the binary lacks the AVX2 translation unit or the CPU lacks
// AVX2/FMA.
const KernelOps* avx2_ops();

Backend best_available();
bool available(Backend b);
Backend active();
void use(Backend b);  // throws std::runtime_error if unavailable
std::string_view name(Backend b);
std::optional<Backend> parse_backend(std::string_view s);

namespace detail {
extern const KernelOps* g_active;
}

inline void axpy(double w, const double* x, double* acc, std::size_t n) {
    detail::g_active->axpy(w, x, acc, n);
}
inline void cis_scaled(const double* theta, std::size_t n, double scale,
                       double* out_re, double* out_im) {
    detail::g_active->cis_scaled(theta, n, scale, out_re, out_im);
}
inline std::complex<double> cdotc(const double* are, const double* aim,
                                  const double* bre, const double* bim,
                                  std::size_t n) {
    double re = 0.0, im = 0.0;
    detail::g_active->cdotc(are, aim, bre, bim, n, &re, &im);
    return {re, im};
}
inline void caxpy(std::complex<double> s, const double* xre, const double* xim,
                  double* yre, double* yim, std::size_t n) {
    detail::g_active->caxpy(s.real(), s.imag(), xre, xim, yre, yim, n);
}
inline void caxpy_conj(std::complex<double> s, const double* xre, const double* xim,
                       double* yre, double* yim, std::size_t n) {
    detail::g_active->caxpy_conj(s.real(), s.imag(), xre, xim, yre, yim, n);
}
inline void cscale(std::complex<double> s, const double* xre, const double* xim,
                   double* yre, double* yim, std::size_t n) {
    detail::g_active->cscale(s.real(), s.imag(), xre, xim, yre, yim, n);
}
inline double norm2(const double* re, const double* im, std::size_t n) {
    return detail::g_active->norm2(re, im, n);
}
inline double diff_norm2(const double* are, const double* aim, const double* bre,
                         const double* bim, std::size_t n) {
    return detail::g_active->diff_norm2(are, aim, bre, bim, n);
}

}  // namespace recf::kernels

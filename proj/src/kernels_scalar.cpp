#include "recf/kernels.hpp"

#include <cmath>

// Scalar reference backend. Element-wise complex ops use std::fma with the
// same evaluation tree as the AVX2 variants, so those agree bit-for-bit
// across backends; reductions accumulate strictly left-to-right.

namespace recf::kernels {
namespace {

void axpy_scalar(double w, const double* x, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = std::fma(w, x[i], acc[i]);
}

void cis_scaled_scalar(const double* theta, std::size_t n, double scale,
                       double* out_re, double* out_im) {
    for (std::size_t i = 0; i < n; ++i) {
        out_re[i] = scale * std::cos(theta[i]);
        out_im[i] = scale * std::sin(theta[i]);
    }
}

void cdotc_scalar(const double* are, const double* aim, const double* bre,
                  const double* bim, std::size_t n, double* re, double* im) {
    // conj(a)*b = (ar*br + ai*bi) + i(ar*bi - ai*br)
    double accre = 0.0, accim = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        accre = std::fma(are[i], bre[i], std::fma(aim[i], bim[i], accre));
        accim = std::fma(are[i], bim[i], std::fma(-aim[i], bre[i], accim));
    }
    *re = accre;
    *im = accim;
}

void caxpy_scalar(double sre, double sim, const double* xre, const double* xim,
                  double* yre, double* yim, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        yre[i] = std::fma(sre, xre[i], std::fma(-sim, xim[i], yre[i]));
        yim[i] = std::fma(sre, xim[i], std::fma(sim, xre[i], yim[i]));
    }
}

void caxpy_conj_scalar(double sre, double sim, const double* xre, const double* xim,
                       double* yre, double* yim, std::size_t n) {
    // s * conj(x): re += sre*xr + sim*xi, im += sim*xr - sre*xi
    for (std::size_t i = 0; i < n; ++i) {
        yre[i] = std::fma(sre, xre[i], std::fma(sim, xim[i], yre[i]));
        yim[i] = std::fma(sim, xre[i], std::fma(-sre, xim[i], yim[i]));
    }
}

void cscale_scalar(double sre, double sim, const double* xre, const double* xim,
                   double* yre, double* yim, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        yre[i] = std::fma(-sim, xim[i], sre * xre[i]);
        yim[i] = std::fma(sre, xim[i], sim * xre[i]);
    }
}

double norm2_scalar(const double* re, const double* im, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc = std::fma(re[i], re[i], std::fma(im[i], im[i], acc));
    return acc;
}

double diff_norm2_scalar(const double* are, const double* aim, const double* bre,
                         const double* bim, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dr = are[i] - bre[i];
        double di = aim[i] - bim[i];
        acc = std::fma(dr, dr, std::fma(di, di, acc));
    }
    return acc;
}

const KernelOps kScalarOps = {
    axpy_scalar,   cis_scaled_scalar, cdotc_scalar,  caxpy_scalar,
    caxpy_conj_scalar, cscale_scalar, norm2_scalar,  diff_norm2_scalar,
};

}  // namespace

const KernelOps& scalar_ops() { return kScalarOps; }

}  // namespace recf::kernels

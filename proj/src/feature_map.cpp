#include "recf/feature_map.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "recf/kernels.hpp"
#include "recf/rng.hpp"

namespace recf {

namespace {

void check_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": expected length " +
                                    std::to_string(want) + ", got " +
                                    std::to_string(got));
}

// phases[i] = sum_j spectral[j*D + i] * v[j], accumulated column by column so
// the inner loop is a contiguous axpy over all D features.
void accumulate_phases(const std::vector<double>& spectral, std::size_t d,
                       const double* v, std::size_t two_m, double* phases) {
    std::fill(phases, phases + d, 0.0);
    for (std::size_t j = 0; j < two_m; ++j)
        kernels::axpy(v[j], spectral.data() + j * d, phases, d);
}

}  // namespace

EulerFeatureMap::EulerFeatureMap(std::size_t input_dim, std::size_t n_features,
                                 double sigma2, std::uint64_t seed) {
    if (input_dim == 0) throw std::invalid_argument("feature map: input_dim must be positive");
    if (n_features == 0) throw std::invalid_argument("feature map: n_features must be positive");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("feature map: sigma2 must be positive and finite");
    m_ = input_dim;
    d_ = n_features;
    sigma2_ = sigma2;
    seed_ = seed;
    scale_ = std::sqrt(2.0 / static_cast<double>(d_));

    spectral_.resize(d_ * 2 * m_);
    Rng rng(seed);
    const double sd = std::sqrt(sigma2);
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = 0; j < 2 * m_; ++j)
            spectral_[j * d_ + i] = sd * rng.normal();
}

EulerFeatureMap EulerFeatureMap::from_spectral(std::size_t input_dim,
                                               std::size_t n_features,
                                               double sigma2,
                                               std::vector<double> spectral_colmajor) {
    if (spectral_colmajor.size() != n_features * 2 * input_dim)
        throw std::invalid_argument("feature map: spectral matrix has wrong size");
    EulerFeatureMap fm;
    fm.m_ = input_dim;
    fm.d_ = n_features;
    fm.sigma2_ = sigma2;
    fm.seed_ = 0;
    fm.scale_ = std::sqrt(2.0 / static_cast<double>(n_features));
    fm.spectral_ = std::move(spectral_colmajor);
    return fm;
}

void EulerFeatureMap::map_into(std::span<const cdouble> x, bool augmented,
                               FeatureWorkspace& ws, SplitVec& out) const {
    check_dim(x.size(), m_, "feature map input");
    ws.composite.resize(2 * m_);
    for (std::size_t j = 0; j < m_; ++j) {
        ws.composite[j] = x[j].real();
        ws.composite[m_ + j] = x[j].imag();
    }
    ws.phases.resize(d_);
    accumulate_phases(spectral_, d_, ws.composite.data(), 2 * m_, ws.phases.data());

    out.resize(augmented ? 2 * d_ : d_);
    kernels::cis_scaled(ws.phases.data(), d_, scale_, out.re.data(), out.im.data());
    if (augmented) {
        for (std::size_t k = 0; k < d_; ++k) {
            out.re[d_ + k] = out.re[k];
            out.im[d_ + k] = -out.im[k];
        }
    }
}

SplitVec EulerFeatureMap::map(std::span<const cdouble> x, bool augmented) const {
    FeatureWorkspace ws;
    SplitVec out;
    map_into(x, augmented, ws, out);
    return out;
}

cdouble EulerFeatureMap::kernel_estimate(std::span<const cdouble> a,
                                         std::span<const cdouble> b) const {
    check_dim(a.size(), m_, "kernel estimate input a");
    check_dim(b.size(), m_, "kernel estimate input b");
    std::vector<double> diff(2 * m_);
    for (std::size_t j = 0; j < m_; ++j) {
        diff[j] = a[j].real() - b[j].real();
        diff[m_ + j] = a[j].imag() - b[j].imag();
    }
    std::vector<double> phases(d_), cre(d_), cim(d_);
    accumulate_phases(spectral_, d_, diff.data(), 2 * m_, phases.data());
    kernels::cis_scaled(phases.data(), d_, 1.0, cre.data(), cim.data());
    double sre = 0.0, sim = 0.0;
    for (std::size_t k = 0; k < d_; ++k) sre += cre[k];
    for (std::size_t k = 0; k < d_; ++k) sim += cim[k];
    const double w = 2.0 / static_cast<double>(d_);
    return {w * sre, w * sim};
}

double EulerFeatureMap::kernel_target(std::span<const cdouble> a,
                                      std::span<const cdouble> b) const {
    check_dim(a.size(), m_, "kernel target input a");
    check_dim(b.size(), m_, "kernel target input b");
    return 2.0 * gaussian_kernel(a, b, sigma2_);
}

double gaussian_kernel(std::span<const cdouble> a, std::span<const cdouble> b,
                       double sigma2) {
    if (a.size() != b.size())
        throw std::invalid_argument("gaussian kernel: length mismatch");
    // ||v_a - v_b||^2 over stacked real composites = sum_i |a_i - b_i|^2
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dr = a[i].real() - b[i].real();
        const double di = a[i].imag() - b[i].imag();
        d2 += dr * dr + di * di;
    }
    return std::exp(-0.5 * sigma2 * d2);
}

}  // namespace recf

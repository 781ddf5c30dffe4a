#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "recf/split_complex.hpp"

namespace recf {

// Scratch buffers for feature evaluation. Owned by the caller (one per
// filter instance or per thread) so map evaluation allocates nothing.
struct FeatureWorkspace {
    std::vector<double> phases;
    std::vector<double> composite;  // stacked [Re(x); Im(x)]
};

// Random Fourier feature map for complex inputs: the k-th feature is
//
//   z_k(x) = sqrt(2/D) * exp(j * c_k^T v),   v = [Re(x); Im(x)] in R^{2m},
//
// with spectral vectors c_k drawn i.i.d. N(0, sigma2 * I). The Euclidean
// inner product of two mapped points estimates (an approximation of)
// 2 * exp(-sigma2 * ||v_a - v_b||^2 / 2), i.e. twice the real Gaussian
// kernel whose spectral density the c_k sample. The optional augmented
// variant stacks the conjugate features underneath:
// z_aug = [z; conj(z)] in C^{2D}.
class EulerFeatureMap {
public:
    // Draws D spectral vectors for inputs of length m. The draw order is
    // fixed (vector by vector, coordinate by coordinate), so a seed pins the
    // map exactly.
    EulerFeatureMap(std::size_t input_dim, std::size_t n_features, double sigma2,
                    std::uint64_t seed);

    // Test/inspection factory: spectral stored column-major, column j holding
    // coordinate j of all D vectors (size D * 2m).
    static EulerFeatureMap from_spectral(std::size_t input_dim,
                                         std::size_t n_features, double sigma2,
                                         std::vector<double> spectral_colmajor);

    std::size_t input_dim() const { return m_; }    // m
    std::size_t n_features() const { return d_; }   // D
    double sigma2() const { return sigma2_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<double>& spectral() const { return spectral_; }

    // out has size D (or 2D when augmented). Throws std::invalid_argument on
    // an input length mismatch.
    void map_into(std::span<const cdouble> x, bool augmented,
                  FeatureWorkspace& ws, SplitVec& out) const;
    SplitVec map(std::span<const cdouble> x, bool augmented = false) const;

    // Monte-Carlo kernel estimate (2/D) * sum_k exp(j * c_k^T (v_a - v_b)).
    // Evaluated through the phase of the *difference*, so it is exactly
    // translation invariant.
    cdouble kernel_estimate(std::span<const cdouble> a,
                            std::span<const cdouble> b) const;

    // The quantity the estimate converges to as D grows.
    double kernel_target(std::span<const cdouble> a,
                         std::span<const cdouble> b) const;

private:
    EulerFeatureMap() = default;

    std::size_t m_ = 0, d_ = 0;
    double sigma2_ = 0.0;
    std::uint64_t seed_ = 0;
    double scale_ = 0.0;            // sqrt(2/D), baked into every feature
    std::vector<double> spectral_;  // D x 2m, column-major
};

// exp(-sigma2 * ||v_a - v_b||^2 / 2) on the stacked real composites; this is
// the kernel the dictionary baseline evaluates exactly.
double gaussian_kernel(std::span<const cdouble> a, std::span<const cdouble> b,
                       double sigma2);

}  // namespace recf

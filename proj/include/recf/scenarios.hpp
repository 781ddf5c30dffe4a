#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "recf/feature_map.hpp"
#include "recf/rng.hpp"
#include "recf/split_complex.hpp"

namespace recf {

// ---------------------------------------------------------------------------
// input sources
// ---------------------------------------------------------------------------

enum class SourceKind {
    noncircular_gaussian,  // sqrt(1-rho^2)*s1 + j*rho*s2, s1,s2 ~ N(0,1)
    uniform_square,        // Re, Im independent uniform on [-1, 1)
    qpsk,                  // {1+j, 1-j, -1+j, -1-j} with given probabilities
};

std::string_view to_string(SourceKind k);
std::optional<SourceKind> parse_source_kind(std::string_view s);

struct SourceSpec {
    SourceKind kind = SourceKind::noncircular_gaussian;
    double rho = 0.5;  // noncircularity in [0, 1]; 1/sqrt(2) gives a circular source
    std::array<double, 4> qpsk_probs{0.25, 0.25, 0.25, 0.25};
};

class SignalSource {
public:
    SignalSource(const SourceSpec& spec, std::uint64_t seed);

    cdouble next();
    void fill(std::span<cdouble> out);

    static const std::array<cdouble, 4>& qpsk_symbols();

private:
    SourceSpec spec_;
    Rng rng_;
    std::array<double, 4> cdf_{};
    double re_scale_ = 0.0;  // sqrt(1 - rho^2)
};

// ---------------------------------------------------------------------------
// nonlinear plants (identification / equalization test systems)
// ---------------------------------------------------------------------------

enum class PlantKind {
    system1,     // 5-tap raised-cosine-like filter + quadratic distortion
    system2,     // 2-tap filter + quadratic and cubic distortion
    eq_channel,  // 3-tap channel + quadratic and cubic distortion
};

// Number of input taps the plant consumes.
std::size_t plant_memory(PlantKind k);

// Output for recent[0] = x_n, recent[1] = x_{n-1}, ... Throws
// std::invalid_argument when fewer than plant_memory(k) samples are given.
cdouble plant_output(PlantKind k, std::span<const cdouble> recent);

// ---------------------------------------------------------------------------
// nonstationary feature-space plant
// ---------------------------------------------------------------------------

// y_n = w_n^H z(x_n) where w performs a random walk w_n = w_{n-1} + q_n with
// q_n circular complex white noise of covariance sigma_q2 * I. The walk
// advances before each emission.
class RandomWalkPlant {
public:
    RandomWalkPlant(std::shared_ptr<const EulerFeatureMap> map, bool augmented,
                    double sigma_q2, SplitVec w0, std::uint64_t walk_seed);

    cdouble emit(std::span<const cdouble> x);

    const SplitVec& coefficients() const { return w_; }
    std::size_t dim() const { return w_.size(); }
    const EulerFeatureMap& feature_map() const { return *map_; }
    bool augmented() const { return augmented_; }

private:
    std::shared_ptr<const EulerFeatureMap> map_;
    bool augmented_;
    double sigma_q_component_;  // stddev per real component = sqrt(sigma_q2/2)
    SplitVec w_;
    Rng rng_;
    FeatureWorkspace ws_;
    SplitVec z_;
};

// Initial walk coefficients: entries i.i.d. CN(0, 1/dim) so the starting
// excess error is O(1) regardless of dimension.
SplitVec draw_walk_w0(std::size_t dim, std::uint64_t seed);

// ---------------------------------------------------------------------------
// observation noise
// ---------------------------------------------------------------------------

struct NoiseSpec {
    bool is_snr = true;   // value is an SNR in dB; otherwise a variance
    double value = 30.0;
};

// Noise power a NoiseSpec implies: for SNR mode, mean|clean|^2 * 10^(-snr/10).
double noise_variance(const NoiseSpec& spec, std::span<const cdouble> clean);

struct CalibratedNoise {
    double sigma_v2 = 0.0;
    std::vector<cdouble> noise;  // CN(0, sigma_v2) per sample
};

// Resolves the noise power against the clean signal and draws one noise
// sample per clean sample (deterministic in the seed).
CalibratedNoise calibrate_noise(const NoiseSpec& spec,
                                std::span<const cdouble> clean,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// regressors
// ---------------------------------------------------------------------------

// out[k] = stream[n - k] for k = 0..m-1 (most recent first). Throws
// std::invalid_argument when n + 1 < m or n is out of range.
void build_regressor(std::span<const cdouble> stream, std::size_t n,
                     std::size_t m, std::span<cdouble> out);

}  // namespace recf

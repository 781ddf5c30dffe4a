#include "recf/scenarios.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "recf/kernels.hpp"

namespace recf {

// ---------------------------------------------------------------------------
// sources
// ---------------------------------------------------------------------------

std::string_view to_string(SourceKind k) {
    switch (k) {
        case SourceKind::noncircular_gaussian: return "noncircular_gaussian";
        case SourceKind::uniform_square: return "uniform_square";
        case SourceKind::qpsk: return "qpsk";
    }
    return "?";
}

std::optional<SourceKind> parse_source_kind(std::string_view s) {
    if (s == "noncircular_gaussian") return SourceKind::noncircular_gaussian;
    if (s == "uniform_square") return SourceKind::uniform_square;
    if (s == "qpsk") return SourceKind::qpsk;
    return std::nullopt;
}

SignalSource::SignalSource(const SourceSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(seed) {
    switch (spec.kind) {
        case SourceKind::noncircular_gaussian: {
            if (!(spec.rho >= 0.0 && spec.rho <= 1.0))
                throw std::invalid_argument("source: rho must lie in [0, 1]");
            re_scale_ = std::sqrt(1.0 - spec.rho * spec.rho);
            break;
        }
        case SourceKind::qpsk: {
            double sum = 0.0;
            for (double p : spec.qpsk_probs) {
                if (!(p >= 0.0)) throw std::invalid_argument("source: negative symbol probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("source: symbol probabilities must sum to 1");
            double acc = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                acc += spec.qpsk_probs[i];
                cdf_[i] = acc;
            }
            cdf_[3] = 1.0;  // guard against rounding in the partial sums
            break;
        }
        case SourceKind::uniform_square:
            break;
    }
}

const std::array<cdouble, 4>& SignalSource::qpsk_symbols() {
    static const std::array<cdouble, 4> syms{cdouble{1.0, 1.0}, cdouble{1.0, -1.0},
                                             cdouble{-1.0, 1.0}, cdouble{-1.0, -1.0}};
    return syms;
}

cdouble SignalSource::next() {
    switch (spec_.kind) {
        case SourceKind::noncircular_gaussian: {
            const double s1 = rng_.normal();
            const double s2 = rng_.normal();
            return {re_scale_ * s1, spec_.rho * s2};
        }
        case SourceKind::uniform_square: {
            const double re = rng_.uniform(-1.0, 1.0);
            const double im = rng_.uniform(-1.0, 1.0);
            return {re, im};
        }
        case SourceKind::qpsk: {
            const double u = rng_.uniform();
            std::size_t i = 0;
            while (i < 3 && u >= cdf_[i]) ++i;
            return qpsk_symbols()[i];
        }
    }
    return {};
}

void SignalSource::fill(std::span<cdouble> out) {
    for (auto& v : out) v = next();
}

// ---------------------------------------------------------------------------
// plants
// ---------------------------------------------------------------------------

namespace {

// 5-tap impulse response h_k = 0.432*((1 + cos(2*pi*(k-3)/5)) -
// j*(1 + cos(2*pi*(k-3)/10))), k = 1..5.
const std::array<cdouble, 5>& system1_taps() {
    static const std::array<cdouble, 5> taps = [] {
        std::array<cdouble, 5> h{};
        constexpr double two_pi = 6.283185307179586476925286766559;
        for (int k = 1; k <= 5; ++k) {
            const double re = 1.0 + std::cos(two_pi * (k - 3) / 5.0);
            const double im = 1.0 + std::cos(two_pi * (k - 3) / 10.0);
            h[k - 1] = 0.432 * cdouble{re, -im};
        }
        return h;
    }();
    return taps;
}

}  // namespace

std::size_t plant_memory(PlantKind k) {
    switch (k) {
        case PlantKind::system1: return 5;
        case PlantKind::system2: return 2;
        case PlantKind::eq_channel: return 3;
    }
    return 0;
}

cdouble plant_output(PlantKind k, std::span<const cdouble> recent) {
    const std::size_t need = plant_memory(k);
    if (recent.size() < need)
        throw std::invalid_argument("plant: needs " + std::to_string(need) +
                                    " input samples, got " +
                                    std::to_string(recent.size()));
    switch (k) {
        case PlantKind::system1: {
            const auto& h = system1_taps();
            cdouble t = 0.0;
            for (std::size_t i = 0; i < 5; ++i) t += h[i] * recent[i];
            return t + cdouble{0.15, -0.1} * t * t;
        }
        case PlantKind::system2: {
            const cdouble t =
                cdouble{-0.9, 0.8} * recent[0] + cdouble{0.6, -0.7} * recent[1];
            return t + cdouble{0.1, 0.15} * t * t + cdouble{0.06, 0.05} * t * t * t;
        }
        case PlantKind::eq_channel: {
            const cdouble t = cdouble{0.34, -0.27} * recent[0] +
                              cdouble{0.87, 0.43} * recent[1] +
                              cdouble{0.34, -0.21} * recent[2];
            return t + 0.1 * t * t + 0.05 * t * t * t;
        }
    }
    throw std::invalid_argument("plant: unknown kind");
}

// ---------------------------------------------------------------------------
// random-walk feature plant
// ---------------------------------------------------------------------------

RandomWalkPlant::RandomWalkPlant(std::shared_ptr<const EulerFeatureMap> map,
                                 bool augmented, double sigma_q2, SplitVec w0,
                                 std::uint64_t walk_seed)
    : map_(std::move(map)),
      augmented_(augmented),
      sigma_q_component_(std::sqrt(0.5 * sigma_q2)),
      w_(std::move(w0)),
      rng_(walk_seed) {
    if (!map_) throw std::invalid_argument("random-walk plant: needs a feature map");
    if (!(sigma_q2 >= 0.0))
        throw std::invalid_argument("random-walk plant: sigma_q2 must be >= 0");
    const std::size_t dim = (augmented_ ? 2 : 1) * map_->n_features();
    if (w_.size() != dim)
        throw std::invalid_argument("random-walk plant: w0 has length " +
                                    std::to_string(w_.size()) + ", expected " +
                                    std::to_string(dim));
}

cdouble RandomWalkPlant::emit(std::span<const cdouble> x) {
    if (sigma_q_component_ > 0.0) {
        for (std::size_t i = 0; i < w_.size(); ++i) {
            w_.re[i] += sigma_q_component_ * rng_.normal();
            w_.im[i] += sigma_q_component_ * rng_.normal();
        }
    }
    map_->map_into(x, augmented_, ws_, z_);
    return kernels::cdotc(w_.re.data(), w_.im.data(), z_.re.data(), z_.im.data(),
                          w_.size());
}

SplitVec draw_walk_w0(std::size_t dim, std::uint64_t seed) {
    SplitVec w(dim);
    Rng rng(seed);
    const double s = std::sqrt(0.5 / static_cast<double>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        w.re[i] = s * rng.normal();
        w.im[i] = s * rng.normal();
    }
    return w;
}

// ---------------------------------------------------------------------------
// noise
// ---------------------------------------------------------------------------

double noise_variance(const NoiseSpec& spec, std::span<const cdouble> clean) {
    if (!spec.is_snr) {
        if (!(spec.value >= 0.0) || !std::isfinite(spec.value))
            throw std::invalid_argument("noise: variance must be >= 0 and finite");
        return spec.value;
    }
    if (clean.empty())
        throw std::invalid_argument("noise: SNR calibration needs a non-empty signal");
    double p = 0.0;
    for (const cdouble& v : clean) p += std::norm(v);
    p /= static_cast<double>(clean.size());
    return p * std::pow(10.0, -spec.value / 10.0);
}

CalibratedNoise calibrate_noise(const NoiseSpec& spec,
                                std::span<const cdouble> clean,
                                std::uint64_t seed) {
    CalibratedNoise out;
    out.sigma_v2 = noise_variance(spec, clean);
    out.noise.resize(clean.size());
    Rng rng(seed);
    const double s = std::sqrt(0.5 * out.sigma_v2);
    for (auto& v : out.noise) {
        const double re = rng.normal();
        const double im = rng.normal();
        v = {s * re, s * im};
    }
    return out;
}

// ---------------------------------------------------------------------------
// regressors
// ---------------------------------------------------------------------------

void build_regressor(std::span<const cdouble> stream, std::size_t n, std::size_t m,
                     std::span<cdouble> out) {
    if (out.size() != m)
        throw std::invalid_argument("regressor: output span has wrong length");
    if (n >= stream.size())
        throw std::invalid_argument("regressor: index " + std::to_string(n) +
                                    " is past the end of the stream");
    if (n + 1 < m)
        throw std::invalid_argument("regressor: index " + std::to_string(n) +
                                    " has fewer than " + std::to_string(m) +
                                    " past samples");
    for (std::size_t k = 0; k < m; ++k) out[k] = stream[n - k];
}

}  // namespace recf

#include "recf/filters.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "recf/errors.hpp"
#include "recf/kernels.hpp"

namespace recf {

namespace {

// Evaluation scratch. Thread-local rather than per-instance so that const
// predict() calls never mutate the filter object.
struct EvalScratch {
    FeatureWorkspace ws;
    SplitVec features;
};
thread_local EvalScratch tl_scratch;

void check_input_dim(std::size_t got, std::size_t want) {
    if (got != want)
        throw std::invalid_argument("filter input: expected length " +
                                    std::to_string(want) + ", got " +
                                    std::to_string(got));
}

[[noreturn]] void throw_diverged(FilterKind k, std::size_t iteration) {
    throw divergence_error(iteration, std::string(to_string(k)) +
                                          ": weights are no longer finite");
}

bool finite(cdouble v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

// Shared implementation for the three parametric filters; they differ only
// in how the regressor is lifted to the weight space.
class ParametricFilter : public AdaptiveFilter {
public:
    ParametricFilter(const FilterSpec& spec, std::size_t weight_dim)
        : mu_(spec.mu), m_(spec.input_dim), w_(weight_dim) {
        if (!spec.init_weights.empty()) {
            if (spec.init_weights.size() != weight_dim)
                throw std::invalid_argument(
                    "filter init weights: expected length " + std::to_string(weight_dim) +
                    ", got " + std::to_string(spec.init_weights.size()));
            w_ = SplitVec::from_interleaved(spec.init_weights);
        }
    }

    std::size_t input_dim() const final { return m_; }
    std::size_t weight_dim() const final { return w_.size(); }
    std::size_t update_count() const final { return n_updates_; }
    double mu() const final { return mu_; }

    const SplitVec& weights() const final { return w_; }

    void set_weights(std::span<const cdouble> w) final {
        if (w.size() != w_.size())
            throw std::invalid_argument("set_weights: expected length " +
                                        std::to_string(w_.size()) + ", got " +
                                        std::to_string(w.size()));
        w_ = SplitVec::from_interleaved(w);
    }

    double weight_error2(const SplitVec& w_ref) const final {
        if (w_ref.size() != w_.size())
            throw std::invalid_argument("weight_error2: expected length " +
                                        std::to_string(w_.size()) + ", got " +
                                        std::to_string(w_ref.size()));
        return kernels::diff_norm2(w_ref.re.data(), w_ref.im.data(), w_.re.data(),
                                   w_.im.data(), w_.size());
    }

    cdouble predict(std::span<const cdouble> x) const final {
        check_input_dim(x.size(), m_);
        const SplitVec& r = lift(x);
        return kernels::cdotc(w_.re.data(), w_.im.data(), r.re.data(), r.im.data(),
                              w_.size());
    }

    StepResult update(std::span<const cdouble> x, cdouble desired) final {
        check_input_dim(x.size(), m_);
        const SplitVec& r = lift(x);  // lifted once, reused for the update
        const cdouble yhat = kernels::cdotc(w_.re.data(), w_.im.data(), r.re.data(),
                                            r.im.data(), w_.size());
        const cdouble e = desired - yhat;
        if (!finite(e) || !finite(yhat)) throw_diverged(kind(), n_updates_);
        // w += mu * conj(e) * r
        kernels::caxpy(mu_ * std::conj(e), r.re.data(), r.im.data(), w_.re.data(),
                       w_.im.data(), w_.size());
        ++n_updates_;
        return {yhat, e};
    }

protected:
    // Returns the weight-space regressor for x (thread-local storage).
    virtual const SplitVec& lift(std::span<const cdouble> x) const = 0;

    double mu_;
    std::size_t m_;
    SplitVec w_;
    std::size_t n_updates_ = 0;
};

class ClmsFilter final : public ParametricFilter {
public:
    explicit ClmsFilter(const FilterSpec& spec)
        : ParametricFilter(spec, spec.input_dim) {}
    FilterKind kind() const override { return FilterKind::clms; }

private:
    const SplitVec& lift(std::span<const cdouble> x) const override {
        SplitVec& buf = tl_scratch.features;
        buf.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) buf.set(i, x[i]);
        return buf;
    }
};

class EulerFilter final : public ParametricFilter {
public:
    EulerFilter(const FilterSpec& spec, bool augmented)
        : ParametricFilter(spec, (augmented ? 2 : 1) * spec.map->n_features()),
          map_(spec.map),
          augmented_(augmented) {}

    FilterKind kind() const override {
        return augmented_ ? FilterKind::wlrecf : FilterKind::lrecf;
    }
    const EulerFeatureMap& feature_map() const { return *map_; }

private:
    const SplitVec& lift(std::span<const cdouble> x) const override {
        map_->map_into(x, augmented_, tl_scratch.ws, tl_scratch.features);
        return tl_scratch.features;
    }

    std::shared_ptr<const EulerFeatureMap> map_;
    bool augmented_;
};

class CklmsFilter final : public AdaptiveFilter {
public:
    explicit CklmsFilter(const FilterSpec& spec)
        : mu_(spec.mu),
          m_(spec.input_dim),
          sigma2_(spec.kernel_sigma2),
          cap_(spec.dictionary_cap) {}

    FilterKind kind() const override { return FilterKind::cklms; }
    std::size_t input_dim() const override { return m_; }
    std::size_t weight_dim() const override { return 0; }
    std::size_t update_count() const override { return n_updates_; }
    double mu() const override { return mu_; }
    std::size_t dictionary_size() const override { return alpha_.size(); }

    cdouble predict(std::span<const cdouble> x) const override {
        check_input_dim(x.size(), m_);
        // yhat = 2 * sum_i alpha_i * exp(-sigma2 * ||v - v_i||^2 / 2)
        double acc_re = 0.0, acc_im = 0.0;
        const std::size_t two_m = 2 * m_;
        double v[2 * 64];  // m is small (tap counts); guarded in make_filter
        for (std::size_t j = 0; j < m_; ++j) {
            v[j] = x[j].real();
            v[m_ + j] = x[j].imag();
        }
        for (std::size_t i = 0; i < alpha_.size(); ++i) {
            const double* vi = dict_.data() + i * two_m;
            double d2 = 0.0;
            for (std::size_t j = 0; j < two_m; ++j) {
                const double d = v[j] - vi[j];
                d2 += d * d;
            }
            const double k = std::exp(-0.5 * sigma2_ * d2);
            acc_re += k * alpha_[i].real();
            acc_im += k * alpha_[i].imag();
        }
        return {2.0 * acc_re, 2.0 * acc_im};
    }

    StepResult update(std::span<const cdouble> x, cdouble desired) override {
        check_input_dim(x.size(), m_);
        const cdouble yhat = predict(x);
        const cdouble e = desired - yhat;
        if (!finite(e) || !finite(yhat)) throw_diverged(kind(), n_updates_);
        if (alpha_.size() >= cap_)
            throw resource_limit_error(
                "cklms: dictionary reached its cap of " + std::to_string(cap_) +
                " entries; raise dictionary_cap or shorten the stream");
        for (std::size_t j = 0; j < m_; ++j) {
            dict_.push_back(x[j].real());
        }
        for (std::size_t j = 0; j < m_; ++j) {
            dict_.push_back(x[j].imag());
        }
        alpha_.push_back(mu_ * e);
        ++n_updates_;
        return {yhat, e};
    }

private:
    double mu_;
    std::size_t m_;
    double sigma2_;
    std::size_t cap_;
    std::vector<double> dict_;  // 2m reals per entry: [Re(x); Im(x)]
    std::vector<cdouble> alpha_;
    std::size_t n_updates_ = 0;
};

}  // namespace

std::string_view to_string(FilterKind k) {
    switch (k) {
        case FilterKind::clms: return "clms";
        case FilterKind::cklms: return "cklms";
        case FilterKind::lrecf: return "lrecf";
        case FilterKind::wlrecf: return "wlrecf";
    }
    return "?";
}

std::optional<FilterKind> parse_filter_kind(std::string_view s) {
    if (s == "clms") return FilterKind::clms;
    if (s == "cklms") return FilterKind::cklms;
    if (s == "lrecf") return FilterKind::lrecf;
    if (s == "wlrecf") return FilterKind::wlrecf;
    return std::nullopt;
}

double AdaptiveFilter::weight_error2(const SplitVec&) const {
    throw std::logic_error(std::string(to_string(kind())) +
                           ": weight error is undefined (no coefficient vector)");
}

const SplitVec& AdaptiveFilter::weights() const {
    throw std::logic_error(std::string(to_string(kind())) +
                           ": filter has no coefficient vector");
}

void AdaptiveFilter::set_weights(std::span<const cdouble>) {
    throw std::logic_error(std::string(to_string(kind())) +
                           ": filter has no coefficient vector");
}

std::unique_ptr<AdaptiveFilter> make_filter(const FilterSpec& spec) {
    if (!(spec.mu > 0.0) || !std::isfinite(spec.mu))
        throw std::invalid_argument("filter: mu must be positive and finite");
    if (spec.input_dim == 0)
        throw std::invalid_argument("filter: input_dim must be positive");
    if (spec.input_dim > 64)
        throw std::invalid_argument("filter: input_dim above the supported cap of 64");

    switch (spec.kind) {
        case FilterKind::clms:
            return std::make_unique<ClmsFilter>(spec);
        case FilterKind::lrecf:
        case FilterKind::wlrecf: {
            if (!spec.map)
                throw std::invalid_argument("filter: lrecf/wlrecf needs a feature map");
            if (spec.map->input_dim() != spec.input_dim)
                throw std::invalid_argument(
                    "filter: feature map input_dim " +
                    std::to_string(spec.map->input_dim()) +
                    " does not match filter input_dim " + std::to_string(spec.input_dim));
            return std::make_unique<EulerFilter>(spec, spec.kind == FilterKind::wlrecf);
        }
        case FilterKind::cklms: {
            if (!(spec.kernel_sigma2 > 0.0) || !std::isfinite(spec.kernel_sigma2))
                throw std::invalid_argument("filter: cklms kernel_sigma2 must be positive");
            if (spec.dictionary_cap == 0)
                throw std::invalid_argument("filter: cklms dictionary_cap must be positive");
            if (!spec.init_weights.empty())
                throw std::invalid_argument("filter: cklms takes no initial weights");
            return std::make_unique<CklmsFilter>(spec);
        }
    }
    throw std::invalid_argument("filter: unknown kind");
}

}  // namespace recf

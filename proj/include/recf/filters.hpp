#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "recf/feature_map.hpp"
#include "recf/split_complex.hpp"

namespace recf {

enum class FilterKind {
    clms,    // complex LMS on the raw regressor
    cklms,   // kernel LMS with a growing dictionary (exact Gaussian kernel)
    lrecf,   // LMS on random Euler features
    wlrecf,  // widely-linear variant on augmented features [z; conj(z)]
};

std::string_view to_string(FilterKind k);
std::optional<FilterKind> parse_filter_kind(std::string_view s);

struct StepResult {
    cdouble prediction;
    cdouble error;  // desired - prediction
};

// Common interface for the online filters. Instances are single-owner
// mutable: update() must not race with anything else on the same object,
// while predict() is const and safe to call concurrently between updates
// (evaluation scratch is thread-local, not per-instance).
class AdaptiveFilter {
public:
    virtual ~AdaptiveFilter() = default;

    virtual FilterKind kind() const = 0;
    virtual std::size_t input_dim() const = 0;   // regressor length m
    virtual std::size_t weight_dim() const = 0;  // 0 for the dictionary filter

    virtual cdouble predict(std::span<const cdouble> x) const = 0;

    // One adaptation step on (x, desired). Returns the pre-update prediction
    // and error. Throws divergence_error when the state stops being finite.
    virtual StepResult update(std::span<const cdouble> x, cdouble desired) = 0;

    virtual std::size_t update_count() const = 0;
    virtual double mu() const = 0;

    // ||w_ref - w||^2. Throws std::logic_error for the dictionary filter,
    // std::invalid_argument on dimension mismatch.
    virtual double weight_error2(const SplitVec& w_ref) const;
    virtual const SplitVec& weights() const;
    virtual void set_weights(std::span<const cdouble> w);

    // Dictionary size (cklms); 0 for the parametric filters.
    virtual std::size_t dictionary_size() const { return 0; }
};

struct FilterSpec {
    FilterKind kind = FilterKind::clms;
    double mu = 0.0;
    std::size_t input_dim = 0;  // m

    // lrecf / wlrecf
    std::shared_ptr<const EulerFeatureMap> map;

    // cklms
    double kernel_sigma2 = 0.0;
    std::size_t dictionary_cap = 200000;

    // optional initial weights (length must equal the weight dimension);
    // not applicable to cklms
    std::vector<cdouble> init_weights;
};

// Validates the description (mu > 0 and finite, consistent dimensions, map
// present where required) and builds the filter. Throws std::invalid_argument.
std::unique_ptr<AdaptiveFilter> make_filter(const FilterSpec& spec);

}  // namespace recf

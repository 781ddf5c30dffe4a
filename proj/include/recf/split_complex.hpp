#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace recf {

using cdouble = std::complex<double>;

// Complex vector in split (planar) layout: separate contiguous real and
// imaginary arrays. This is the storage every hot kernel operates on --
// split layout vectorizes cleanly, unlike interleaved std::complex arrays.
struct SplitVec {
    std::vector<double> re, im;

    SplitVec() = default;
    explicit SplitVec(std::size_t n) : re(n, 0.0), im(n, 0.0) {}

    std::size_t size() const { return re.size(); }
    void resize(std::size_t n) {
        re.resize(n, 0.0);
        im.resize(n, 0.0);
    }
    void zero() {
        std::fill(re.begin(), re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
    }

    cdouble at(std::size_t i) const { return {re[i], im[i]}; }
    void set(std::size_t i, cdouble v) {
        re[i] = v.real();
        im[i] = v.imag();
    }

    std::vector<cdouble> to_interleaved() const {
        std::vector<cdouble> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = at(i);
        return out;
    }

    static SplitVec from_interleaved(std::span<const cdouble> v) {
        SplitVec out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out.set(i, v[i]);
        return out;
    }

    bool all_finite() const {
        for (double x : re)
            if (!std::isfinite(x)) return false;
        for (double x : im)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

}  // namespace recf

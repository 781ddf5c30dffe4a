#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "recf/errors.hpp"
#include "recf/filters.hpp"
#include "recf/kernels.hpp"
#include "recf/rng.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <vector>

using namespace recf;

namespace {

std::vector<cdouble> random_signal(Rng& rng, std::size_t n) {
    std::vector<cdouble> v(n);
    for (auto& x : v) x = {rng.normal(), rng.normal()};
    return v;
}

std::shared_ptr<const EulerFeatureMap> make_map(std::size_t m, std::size_t D,
                                                double sigma2, std::uint64_t seed) {
    return std::make_shared<const EulerFeatureMap>(m, D, sigma2, seed);
}

}  // namespace

TEST_CASE("factory validation") {
    FilterSpec s;
    s.kind = FilterKind::clms;
    s.input_dim = 2;

    s.mu = 0.0;
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.mu = -0.1;
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.mu = std::nan("");
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.mu = 0.1;
    s.input_dim = 0;
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.input_dim = 2;
    CHECK(make_filter(s) != nullptr);

    // euler filters need a map with a matching input dimension
    s.kind = FilterKind::lrecf;
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.map = make_map(3, 8, 1.0, 1);
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.map = make_map(2, 8, 1.0, 1);
    CHECK(make_filter(s)->weight_dim() == 8);
    s.kind = FilterKind::wlrecf;
    CHECK(make_filter(s)->weight_dim() == 16);

    // init weights must match the weight dimension
    s.init_weights.assign(8, cdouble{0.0, 0.0});
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.init_weights.assign(16, cdouble{0.0, 0.0});
    CHECK(make_filter(s) != nullptr);
    s.init_weights.clear();

    s.kind = FilterKind::cklms;
    s.kernel_sigma2 = 0.0;
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.kernel_sigma2 = 1.0;
    s.dictionary_cap = 0;
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
    s.dictionary_cap = 10;
    CHECK(make_filter(s) != nullptr);
    s.init_weights.assign(1, cdouble{1.0, 0.0});
    CHECK_THROWS_AS(make_filter(s), std::invalid_argument);
}

TEST_CASE("clms single update by hand") {
    FilterSpec s;
    s.kind = FilterKind::clms;
    s.mu = 0.1;
    s.input_dim = 2;
    auto f = make_filter(s);

    std::vector<cdouble> x{{1.0, 1.0}, {2.0, 0.0}};
    auto r = f->update(x, {3.0, -1.0});
    CHECK(r.prediction == cdouble{0.0, 0.0});
    CHECK(r.error == cdouble{3.0, -1.0});
    CHECK(f->update_count() == 1);

    // w = 0.1 * conj(e) * x = [0.2+0.4j, 0.6+0.2j]
    CHECK(f->weights().at(0).real() == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(f->weights().at(0).imag() == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(f->weights().at(1).real() == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(f->weights().at(1).imag() == doctest::Approx(0.2).epsilon(1e-15));

    // w^H [j, 1] = 1 exactly (hand computed)
    std::vector<cdouble> x2{{0.0, 1.0}, {1.0, 0.0}};
    auto p = f->predict(x2);
    CHECK(p.real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(p.imag()) <= 1e-15);
}

TEST_CASE("clms identifies a linear system exactly in the noise-free limit") {
    const std::size_t m = 4;
    FilterSpec s;
    s.kind = FilterKind::clms;
    s.mu = 0.1;
    s.input_dim = m;
    auto f = make_filter(s);

    Rng rng(2025);
    SplitVec w_opt = SplitVec::from_interleaved(
        std::vector<cdouble>{{0.5, -0.2}, {1.0, 0.3}, {-0.7, 0.0}, {0.1, 0.9}});
    for (int n = 0; n < 4000; ++n) {
        auto x = random_signal(rng, m);
        cdouble y = 0.0;
        for (std::size_t i = 0; i < m; ++i) y += std::conj(w_opt.at(i)) * x[i];
        f->update(x, y);
    }
    CHECK(f->weight_error2(w_opt) <= 1e-12);
}

TEST_CASE("stationary noise-free optimum: zero error when started at w_opt") {
    // feature-space plant matched to the filter: all residuals are exactly 0
    auto map = make_map(2, 16, 0.5, 99);
    FilterSpec s;
    s.kind = FilterKind::wlrecf;
    s.mu = 0.05;
    s.input_dim = 2;
    s.map = map;
    auto f = make_filter(s);

    Rng rng(1);
    auto w_opt = random_signal(rng, 32);
    f->set_weights(w_opt);
    SplitVec w_split = SplitVec::from_interleaved(w_opt);
    for (int n = 0; n < 200; ++n) {
        auto x = random_signal(rng, 2);
        SplitVec z = map->map(x, true);
        cdouble y = kernels::cdotc(w_split.re.data(), w_split.im.data(), z.re.data(),
                                   z.im.data(), 32);
        auto r = f->update(x, y);
        CHECK(r.error == cdouble{0.0, 0.0});
    }
    CHECK(f->weight_error2(w_split) == 0.0);
}

TEST_CASE("euler filter predictions match the inner-product formula") {
    auto map = make_map(2, 4, 0.8, 7);
    FilterSpec s;
    s.kind = FilterKind::lrecf;
    s.mu = 0.01;
    s.input_dim = 2;
    s.map = map;
    auto f = make_filter(s);

    Rng rng(8);
    auto w = random_signal(rng, 4);
    f->set_weights(w);
    auto x = random_signal(rng, 2);
    SplitVec z = map->map(x);
    cdouble want = 0.0;
    for (std::size_t k = 0; k < 4; ++k) want += std::conj(w[k]) * z.at(k);
    auto got = f->predict(x);
    CHECK(std::abs(got - want) <= 1e-14);
}

TEST_CASE("one euler update matches the recursion formula") {
    auto map = make_map(3, 5, 0.4, 12);
    FilterSpec s;
    s.kind = FilterKind::lrecf;
    s.mu = 0.07;
    s.input_dim = 3;
    s.map = map;
    auto f = make_filter(s);

    Rng rng(13);
    auto w0 = random_signal(rng, 5);
    f->set_weights(w0);
    auto x = random_signal(rng, 3);
    const cdouble y{0.3, -1.1};

    SplitVec z = map->map(x);
    cdouble yhat = 0.0;
    for (std::size_t k = 0; k < 5; ++k) yhat += std::conj(w0[k]) * z.at(k);
    const cdouble e = y - yhat;

    auto r = f->update(x, y);
    CHECK(std::abs(r.prediction - yhat) <= 1e-14);
    CHECK(std::abs(r.error - e) <= 1e-14);
    for (std::size_t k = 0; k < 5; ++k) {
        const cdouble want = w0[k] + s.mu * std::conj(e) * z.at(k);
        CHECK(std::abs(f->weights().at(k) - want) <= 1e-14);
    }
}

TEST_CASE("wlrecf is exactly lms on the augmented feature vector") {
    // Feed a clms filter the explicitly augmented features; every prediction
    // and weight must match the wlrecf bit for bit. D is a multiple of the
    // vector width so the reductions see identical lane assignments.
    const std::size_t m = 2, D = 8;
    auto map = make_map(m, D, 0.6, 21);

    FilterSpec sw;
    sw.kind = FilterKind::wlrecf;
    sw.mu = 0.03;
    sw.input_dim = m;
    sw.map = map;
    auto wl = make_filter(sw);

    FilterSpec sl;
    sl.kind = FilterKind::clms;
    sl.mu = 0.03;
    sl.input_dim = 2 * D;
    auto lifted = make_filter(sl);

    Rng rng(31);
    for (int n = 0; n < 50; ++n) {
        auto x = random_signal(rng, m);
        const cdouble y{rng.normal(), rng.normal()};
        SplitVec z = map->map(x, true);
        auto zi = z.to_interleaved();

        auto p1 = wl->predict(x);
        auto p2 = lifted->predict(zi);
        CHECK(std::memcmp(&p1, &p2, sizeof(p1)) == 0);

        auto r1 = wl->update(x, y);
        auto r2 = lifted->update(zi, y);
        CHECK(std::memcmp(&r1, &r2, sizeof(r1)) == 0);
    }
    CHECK(wl->weights().re == lifted->weights().re);
    CHECK(wl->weights().im == lifted->weights().im);
}

TEST_CASE("cklms by hand: two updates") {
    FilterSpec s;
    s.kind = FilterKind::cklms;
    s.mu = 0.5;
    s.input_dim = 1;
    s.kernel_sigma2 = 2.0;
    auto f = make_filter(s);

    // empty dictionary predicts 0
    std::vector<cdouble> x1{{1.0, 0.0}};
    auto r1 = f->update(x1, {1.0, 0.0});
    CHECK(r1.prediction == cdouble{0.0, 0.0});
    CHECK(r1.error == cdouble{1.0, 0.0});
    CHECK(f->dictionary_size() == 1);

    // yhat = 2 * alpha_1 * exp(-sigma2 * |x2-x1|^2 / 2) = exp(-1)
    std::vector<cdouble> x2{{0.0, 0.0}};
    auto r2 = f->update(x2, {0.0, 1.0});
    const double want = std::exp(-1.0);
    CHECK(r2.prediction.real() == doctest::Approx(want).epsilon(1e-15));
    CHECK(r2.prediction.imag() == doctest::Approx(0.0));
    CHECK(f->dictionary_size() == 2);
    CHECK(f->update_count() == 2);
}

TEST_CASE("cklms prediction equals the kernel expansion") {
    FilterSpec s;
    s.kind = FilterKind::cklms;
    s.mu = 0.2;
    s.input_dim = 3;
    s.kernel_sigma2 = 0.7;
    auto f = make_filter(s);

    Rng rng(17);
    std::vector<std::vector<cdouble>> xs;
    std::vector<cdouble> errors;
    for (int n = 0; n < 25; ++n) {
        auto x = random_signal(rng, 3);
        auto r = f->update(x, {rng.normal(), rng.normal()});
        xs.push_back(x);
        errors.push_back(r.error);
    }

    auto q = random_signal(rng, 3);
    cdouble want = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        want += 2.0 * (s.mu * errors[i]) * gaussian_kernel(q, xs[i], s.kernel_sigma2);
    CHECK(std::abs(f->predict(q) - want) <= 1e-12);
}

TEST_CASE("cklms dictionary cap raises a resource error") {
    FilterSpec s;
    s.kind = FilterKind::cklms;
    s.mu = 0.1;
    s.input_dim = 1;
    s.kernel_sigma2 = 1.0;
    s.dictionary_cap = 3;
    auto f = make_filter(s);

    Rng rng(3);
    for (int n = 0; n < 3; ++n) {
        auto x = random_signal(rng, 1);
        f->update(x, {0.5, 0.5});
    }
    auto x = random_signal(rng, 1);
    CHECK_THROWS_AS(f->update(x, {0.5, 0.5}), resource_limit_error);
    CHECK(f->dictionary_size() == 3);
}

TEST_CASE("divergence raises an error naming the iteration") {
    auto map = make_map(2, 8, 1.0, 4);
    FilterSpec s;
    s.kind = FilterKind::lrecf;
    s.mu = 1e12;  // far past the stability bound
    s.input_dim = 2;
    s.map = map;
    auto f = make_filter(s);

    Rng rng(5);
    bool thrown = false;
    for (int n = 0; n < 10000 && !thrown; ++n) {
        auto x = random_signal(rng, 2);
        try {
            f->update(x, {1.0, 0.0});
        } catch (const divergence_error& e) {
            thrown = true;
            CHECK(e.iteration() == f->update_count());
            CHECK(std::string(e.what()).find("iteration") != std::string::npos);
        }
    }
    CHECK(thrown);
}

TEST_CASE("weight error accessor") {
    FilterSpec s;
    s.kind = FilterKind::clms;
    s.mu = 0.1;
    s.input_dim = 2;
    auto f = make_filter(s);
    SplitVec ref = SplitVec::from_interleaved(std::vector<cdouble>{{1.0, 0.0}, {0.0, -2.0}});
    CHECK(f->weight_error2(ref) == doctest::Approx(5.0));  // filter starts at zero
    CHECK(f->weight_error2(f->weights()) == 0.0);

    SplitVec bad(3);
    CHECK_THROWS_AS(f->weight_error2(bad), std::invalid_argument);

    FilterSpec sk;
    sk.kind = FilterKind::cklms;
    sk.mu = 0.1;
    sk.input_dim = 2;
    sk.kernel_sigma2 = 1.0;
    auto fk = make_filter(sk);
    CHECK_THROWS_AS(fk->weight_error2(ref), std::logic_error);
    CHECK_THROWS_AS(fk->weights(), std::logic_error);
}

TEST_CASE("input dimension is validated on predict and update") {
    FilterSpec s;
    s.kind = FilterKind::clms;
    s.mu = 0.1;
    s.input_dim = 3;
    auto f = make_filter(s);
    std::vector<cdouble> wrong(2, cdouble{1.0, 0.0});
    CHECK_THROWS_AS((void)f->predict(wrong), std::invalid_argument);
    CHECK_THROWS_AS(f->update(wrong, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("predict is repeatable and does not advance state") {
    auto map = make_map(2, 12, 0.5, 6);
    FilterSpec s;
    s.kind = FilterKind::wlrecf;
    s.mu = 0.02;
    s.input_dim = 2;
    s.map = map;
    auto f = make_filter(s);

    Rng rng(9);
    for (int n = 0; n < 20; ++n) f->update(random_signal(rng, 2), {0.3, 0.1});
    auto x = random_signal(rng, 2);
    auto p1 = f->predict(x);
    auto p2 = f->predict(x);
    CHECK(std::memcmp(&p1, &p2, sizeof(p1)) == 0);
    CHECK(f->update_count() == 20);
}

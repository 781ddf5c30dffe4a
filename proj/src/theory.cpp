#include "recf/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "recf/errors.hpp"
#include "recf/kernels.hpp"
#include "recf/rng.hpp"

namespace recf::theory {

namespace {

constexpr std::size_t kBlock = 4096;  // samples per seed block
constexpr std::uint64_t kMomentStream = 0x4D4F4D; // arbitrary fixed tags

double db10(double x) { return 10.0 * std::log10(x); }

// Split-layout accumulators for Rz (L x L) and B (L^2 x L^2), column-major.
struct MomentAccum {
    std::size_t L = 0;
    SplitVec rz, b, g;

    explicit MomentAccum(std::size_t dim)
        : L(dim), rz(dim * dim), b(dim * dim * dim * dim), g(dim * dim) {}

    void add(const SplitVec& z) {
        // Rz col c += z * conj(z_c)
        for (std::size_t c = 0; c < L; ++c) {
            const cdouble s = std::conj(z.at(c));
            kernels::caxpy(s, z.re.data(), z.im.data(), rz.re.data() + c * L,
                           rz.im.data() + c * L, L);
        }
        // g = conj(z) (x) z, i.e. g[j*L + i] = conj(z_j) * z_i
        for (std::size_t j = 0; j < L; ++j) {
            const cdouble s = std::conj(z.at(j));
            kernels::cscale(s, z.re.data(), z.im.data(), g.re.data() + j * L,
                            g.im.data() + j * L, L);
        }
        // B col c += g * conj(g_c)
        const std::size_t L2 = L * L;
        for (std::size_t c = 0; c < L2; ++c) {
            const cdouble s = std::conj(g.at(c));
            kernels::caxpy(s, g.re.data(), g.im.data(), b.re.data() + c * L2,
                           b.im.data() + c * L2, L2);
        }
    }

    void merge(const MomentAccum& other) {
        for (std::size_t i = 0; i < rz.size(); ++i) {
            rz.re[i] += other.rz.re[i];
            rz.im[i] += other.rz.im[i];
        }
        for (std::size_t i = 0; i < b.size(); ++i) {
            b.re[i] += other.b.re[i];
            b.im[i] += other.b.im[i];
        }
    }
};

Eigen::MatrixXcd to_matrix(const SplitVec& colmajor, std::size_t rows,
                           std::size_t cols, double scale) {
    Eigen::MatrixXcd out(rows, cols);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r)
            out(r, c) = scale * colmajor.at(c * rows + r);
    return out;
}

Eigen::MatrixXcd assemble_A(const Eigen::MatrixXcd& Rz) {
    const Eigen::Index L = Rz.rows();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(L * L, L * L);
    for (Eigen::Index j = 0; j < L; ++j) A.block(j * L, j * L, L, L) = Rz;
    for (Eigen::Index j = 0; j < L; ++j)
        for (Eigen::Index l = 0; l < L; ++l) {
            const cdouble v = std::conj(Rz(j, l));
            for (Eigen::Index i = 0; i < L; ++i) A(j * L + i, l * L + i) += v;
        }
    return A;
}

Moments finalize(SplitVec rz_acc, SplitVec b_acc, std::size_t L,
                 std::size_t n_samples) {
    const double inv = 1.0 / static_cast<double>(n_samples);
    Moments m;
    m.n_samples = n_samples;
    m.Rz = to_matrix(rz_acc, L, L, inv);
    m.B = to_matrix(b_acc, L * L, L * L, inv);
    // estimators are Hermitian in expectation; enforce it exactly
    m.Rz = 0.5 * (m.Rz + m.Rz.adjoint()).eval();
    m.B = 0.5 * (m.B + m.B.adjoint()).eval();
    m.A = assemble_A(m.Rz);
    return m;
}

Eigen::VectorXcd vec_of(const Eigen::MatrixXcd& M) {
    return Eigen::Map<const Eigen::VectorXcd>(M.data(), M.size());
}

void check_transient(const Moments& m, const TransientConfig& cfg) {
    const Eigen::Index L = m.Rz.rows();
    if (cfg.C0.rows() != L || cfg.C0.cols() != L)
        throw std::invalid_argument("transient: C0 must be " + std::to_string(L) +
                                    "x" + std::to_string(L));
    if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu))
        throw std::invalid_argument("transient: mu must be positive");
    if (!(cfg.sigma_v2 >= 0.0) || !(cfg.sigma_q2 >= 0.0))
        throw std::invalid_argument("transient: noise variances must be >= 0");
}

}  // namespace

Eigen::VectorXcd to_eigen(const SplitVec& v) {
    Eigen::VectorXcd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out(i) = v.at(i);
    return out;
}

Eigen::MatrixXcd outer(const SplitVec& v) {
    const Eigen::VectorXcd w = to_eigen(v);
    return w * w.adjoint();
}

Moments moments_from_samples(std::span<const SplitVec> zs) {
    if (zs.empty()) throw std::invalid_argument("moments: no samples");
    const std::size_t L = zs.front().size();
    MomentAccum acc(L);
    for (const SplitVec& z : zs) {
        if (z.size() != L) throw std::invalid_argument("moments: inconsistent sample length");
        acc.add(z);
    }
    return finalize(std::move(acc.rz), std::move(acc.b), L, zs.size());
}

Moments estimate_moments(const MomentConfig& cfg) {
    if (!cfg.map) throw std::invalid_argument("moments: needs a feature map");
    if (cfg.n_samples == 0) throw std::invalid_argument("moments: n_samples must be positive");
    const std::size_t L = (cfg.augmented ? 2 : 1) * cfg.map->n_features();
    if (L > cfg.dimension_cap) {
        const double gib = static_cast<double>(L) * L * L * L * 16.0 / (1024.0 * 1024.0 * 1024.0);
        throw resource_limit_error(
            "moments: feature dimension L = " + std::to_string(L) +
            " exceeds the cap of " + std::to_string(cfg.dimension_cap) +
            " (the fourth-moment matrix alone would need ~" + std::to_string(gib) +
            " GiB per accumulator)");
    }

    const std::size_t m = cfg.map->input_dim();
    const std::size_t n_blocks = (cfg.n_samples + kBlock - 1) / kBlock;
    int threads = cfg.threads > 0 ? cfg.threads : 1;
    if (static_cast<std::size_t>(threads) > n_blocks)
        threads = static_cast<int>(n_blocks);

    std::vector<MomentAccum> partials;
    partials.reserve(threads);
    for (int t = 0; t < threads; ++t) partials.emplace_back(L);

    auto worker = [&](int t) {
        const std::size_t b0 = n_blocks * t / threads;
        const std::size_t b1 = n_blocks * (t + 1) / threads;
        MomentAccum& acc = partials[t];
        std::vector<cdouble> x(m);
        FeatureWorkspace ws;
        SplitVec z;
        for (std::size_t b = b0; b < b1; ++b) {
            SignalSource src(cfg.source, derive_seed(cfg.seed, kMomentStream, b));
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(lo + kBlock, cfg.n_samples);
            for (std::size_t s = lo; s < hi; ++s) {
                src.fill(x);
                cfg.map->map_into(x, cfg.augmented, ws, z);
                acc.add(z);
            }
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    // merge partials in thread order (fixed reduction order per thread count)
    for (int t = 1; t < threads; ++t) partials[0].merge(partials[t]);
    return finalize(std::move(partials[0].rz), std::move(partials[0].b), L,
                    cfg.n_samples);
}

double mean_step_bound(const Moments& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.Rz,
                                                       Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0.0))
        throw std::runtime_error("mean_step_bound: Rz has no positive eigenvalue");
    return 2.0 / lmax;
}

TransientPrediction transient_predict(const Moments& m, const TransientConfig& cfg) {
    check_transient(m, cfg);
    const Eigen::Index L = m.Rz.rows();
    const Eigen::Index L2 = L * L;
    const double mu = cfg.mu;

    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(L2, L2) - mu * m.A +
                         (mu * mu) * m.B;
    const Eigen::VectorXcd vrz = vec_of(m.Rz);
    const Eigen::VectorXcd vid = vec_of(Eigen::MatrixXcd::Identity(L, L).eval());
    const Eigen::VectorXcd bvec = (mu * mu * cfg.sigma_v2) * vrz + cfg.sigma_q2 * vid;

    TransientPrediction out;
    out.mse.reserve(cfg.steps);
    out.msd.reserve(cfg.steps);
    Eigen::VectorXcd c = vec_of(cfg.C0);
    for (std::size_t n = 0; n < cfg.steps; ++n) {
        out.mse.push_back(cfg.sigma_v2 + vrz.dot(c).real());
        c = (M * c + bvec).eval();
        out.msd.push_back(vid.dot(c).real());
    }
    out.mse_db.resize(out.mse.size());
    out.msd_db.resize(out.msd.size());
    for (std::size_t i = 0; i < out.mse.size(); ++i) out.mse_db[i] = db10(out.mse[i]);
    for (std::size_t i = 0; i < out.msd.size(); ++i) out.msd_db[i] = db10(out.msd[i]);
    return out;
}

SteadyState steady_state(const Moments& m, double mu, double sigma_v2,
                         double sigma_q2) {
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("steady_state: mu must be positive");
    const Eigen::Index L = m.Rz.rows();
    const Eigen::Index L2 = L * L;
    const Eigen::VectorXcd vrz = vec_of(m.Rz);
    const Eigen::VectorXcd vid = vec_of(Eigen::MatrixXcd::Identity(L, L).eval());

    SteadyState out;

    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.Rz, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        const double lmax = es.eigenvalues().maxCoeff();
        out.cond_A = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    }
    {
        const Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(L2, L2) - mu * m.A +
                                   (mu * mu) * m.B;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
        out.spectral_radius = std::max(std::abs(es.eigenvalues().minCoeff()),
                                       std::abs(es.eigenvalues().maxCoeff()));
        out.stable = out.spectral_radius < 1.0;
    }

    const Eigen::MatrixXcd S = m.A - mu * m.B;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(S);
    const Eigen::VectorXcd x_rz = lu.solve(vrz);
    const Eigen::VectorXcd x_id = lu.solve(vid);
    out.residual = (S * x_rz - vrz).norm() / vrz.norm();

    const Eigen::VectorXcd c_inf = (mu * sigma_v2) * x_rz + (sigma_q2 / mu) * x_id;
    out.emse = vrz.dot(c_inf).real();
    out.mse = sigma_v2 + out.emse;
    out.msd = vid.dot(c_inf).real();
    return out;
}

OptimalStep optimal_step_size(const Moments& m, double sigma_v2, double sigma_q2) {
    if (!(sigma_v2 > 0.0) || !(sigma_q2 > 0.0))
        throw std::invalid_argument(
            "optimal_step_size: needs sigma_v2 > 0 and sigma_q2 > 0 (the trade-off "
            "is degenerate otherwise)");
    const Eigen::Index L = m.Rz.rows();
    const Eigen::VectorXcd vrz = vec_of(m.Rz);
    const Eigen::VectorXcd vid = vec_of(Eigen::MatrixXcd::Identity(L, L).eval());

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m.A);
    OptimalStep out;
    out.phi_mse = vrz.dot(lu.solve(vrz)).real();
    out.phi_msd = vrz.dot(lu.solve(vid)).real();
    out.mu_opt = std::sqrt(sigma_q2 / sigma_v2) * std::sqrt(out.phi_msd / out.phi_mse);
    out.mse_min = sigma_v2 + 2.0 * std::sqrt(sigma_v2 * sigma_q2) *
                                 std::sqrt(out.phi_mse * out.phi_msd);
    return out;
}

RecursionTail recursion_tail(const Moments& m, const TransientConfig& cfg,
                             double rel_tol, int max_doublings) {
    check_transient(m, cfg);
    const Eigen::Index L = m.Rz.rows();
    const Eigen::Index L2 = L * L;
    const double mu = cfg.mu;

    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(L2, L2) - mu * m.A +
                         (mu * mu) * m.B;
    const Eigen::VectorXcd vrz = vec_of(m.Rz);
    const Eigen::VectorXcd vid = vec_of(Eigen::MatrixXcd::Identity(L, L).eval());
    Eigen::VectorXcd b = (mu * mu * cfg.sigma_v2) * vrz + cfg.sigma_q2 * vid;
    Eigen::VectorXcd c = vec_of(cfg.C0);

    RecursionTail out;
    auto eval = [&](const Eigen::VectorXcd& v, double& mse, double& msd) {
        mse = cfg.sigma_v2 + vrz.dot(v).real();
        msd = vid.dot(v).real();
    };
    eval(c, out.mse, out.msd);

    int settled = 0;
    for (int k = 0; k < max_doublings; ++k) {
        // state after 2^(k+1) steps: c <- M c + b with (M, b) doubled
        c = (M * c + b).eval();
        b += (M * b).eval();
        M = (M * M).eval();
        double mse = 0.0, msd = 0.0;
        eval(c, mse, msd);
        if (!std::isfinite(mse) || !std::isfinite(msd)) {
            out.converged = false;
            return out;
        }
        const double dm = std::abs(mse - out.mse) / std::max(std::abs(mse), 1e-300);
        const double dd = std::abs(msd - out.msd) / std::max(std::abs(msd), 1e-300);
        out.mse = mse;
        out.msd = msd;
        out.doublings = k + 1;
        settled = (dm <= rel_tol && dd <= rel_tol) ? settled + 1 : 0;
        if (settled >= 2) {
            out.converged = true;
            return out;
        }
    }
    out.converged = false;
    return out;
}

}  // namespace recf::theory

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "recf/feature_map.hpp"
#include "recf/scenarios.hpp"
#include "recf/split_complex.hpp"

// Mean-square convergence analysis of LMS in the (augmented) feature space.
// With z_n the feature regressor, w_opt,n the random-walk optimum
// (increment covariance sigma_q2 * I), observation noise variance sigma_v2
// and weight-error covariance C_n = E{w~ w~^H}, the model is
//
//   vec(C_n) = (I - mu*A + mu^2*B) vec(C_{n-1})
//              + mu^2*sigma_v2*vec(Rz) + sigma_q2*vec(I)
//
//   Rz = E{z z^H},  A = I (x) Rz + conj(Rz) (x) I,
//   B = E{ (conj(z) z^T) (x) (z z^H) }   ((x) = Kronecker, vec column-major)
//
//   MSE_n = sigma_v2 + tr(Rz C_{n-1}),   MSD_n = tr(C_n).
//
// Steady state solves mu*(A - mu*B) vec(C_inf) = mu^2*sigma_v2*vec(Rz)
// + sigma_q2*vec(I); for small mu the excess MSE is approximately
// mu*sigma_v2*phi_mse + (sigma_q2/mu)*phi_msd with
// phi_mse = vec(Rz)^H A^-1 vec(Rz) and phi_msd = vec(Rz)^H A^-1 vec(I),
// minimized at mu_opt = (sigma_q/sigma_v) * sqrt(phi_msd / phi_mse).

namespace recf::theory {

struct Moments {
    Eigen::MatrixXcd Rz;  // L x L
    Eigen::MatrixXcd A;   // L^2 x L^2
    Eigen::MatrixXcd B;   // L^2 x L^2
    std::size_t n_samples = 0;

    std::size_t dim() const { return static_cast<std::size_t>(Rz.rows()); }
};

struct MomentConfig {
    std::shared_ptr<const EulerFeatureMap> map;
    bool augmented = true;
    SourceSpec source;                // regressor entries drawn i.i.d.
    std::size_t n_samples = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
    std::size_t dimension_cap = 32;   // refuse L above this
};

// Monte-Carlo estimate of Rz, A, B over fresh i.i.d. regressors of length
// map->input_dim(). Deterministic given (seed, threads). Throws
// resource_limit_error when L = (1 or 2) * D exceeds dimension_cap.
Moments estimate_moments(const MomentConfig& cfg);

// Exact moments of a finite sample of feature vectors (test oracle and
// building block of estimate_moments).
Moments moments_from_samples(std::span<const SplitVec> zs);

// Largest step size for convergence in the mean: 2 / lambda_max(Rz).
double mean_step_bound(const Moments& m);

struct TransientConfig {
    double mu = 0.0;
    double sigma_v2 = 0.0;
    double sigma_q2 = 0.0;
    Eigen::MatrixXcd C0;   // initial weight-error covariance, L x L
    std::size_t steps = 0;
};

struct TransientPrediction {
    std::vector<double> mse, msd;        // linear
    std::vector<double> mse_db, msd_db;  // 10*log10
};

// Iterates the covariance recursion for cfg.steps steps. mse[i] is evaluated
// before step i (so mse[0] depends on C0 only), msd[i] after it; this aligns
// with a simulation that records the error before the weight update and the
// weight deviation after it.
TransientPrediction transient_predict(const Moments& m, const TransientConfig& cfg);

struct SteadyState {
    double mse = 0.0, emse = 0.0, msd = 0.0;
    double spectral_radius = 0.0;  // of I - mu*A + mu^2*B
    bool stable = false;
    double cond_A = 0.0;           // lambda_max/lambda_min of Rz (= cond of A)
    double residual = 0.0;         // relative residual of the linear solve
};

SteadyState steady_state(const Moments& m, double mu, double sigma_v2,
                         double sigma_q2);

struct OptimalStep {
    double mu_opt = 0.0;
    double mse_min = 0.0;
    double phi_mse = 0.0;  // vec(Rz)^H A^-1 vec(Rz)  (= tr(Rz)/2 exactly)
    double phi_msd = 0.0;  // vec(Rz)^H A^-1 vec(I)   (= L/2 exactly)
};

// Requires sigma_q2 > 0 (the tracking/noise trade-off is otherwise
// degenerate: smaller mu is always better).
OptimalStep optimal_step_size(const Moments& m, double sigma_v2, double sigma_q2);

struct RecursionTail {
    double mse = 0.0, msd = 0.0;
    int doublings = 0;     // tail evaluated after 2^doublings steps
    bool converged = false;
};

// Runs the covariance recursion to its fixed point by repeated doubling of
// the affine map (an independent numerical path from the steady_state linear
// solve). Stops when both metrics change by less than rel_tol per doubling.
RecursionTail recursion_tail(const Moments& m, const TransientConfig& cfg,
                             double rel_tol = 1e-12, int max_doublings = 60);

// Helpers shared with the harness/CLI side.
Eigen::VectorXcd to_eigen(const SplitVec& v);
Eigen::MatrixXcd outer(const SplitVec& v);  // v v^H

}  // namespace recf::theory

//---------------------------------------------------------------------------//
//! \file spectral.hpp
//! QR-based spectral estimates: discrete QR iteration, power-iteration growth
//! rates, Steklov averages, Lyapunov and Sacker-Sell endpoint estimators,
//! stiffness indicators and integral separation diagnostics.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qrstab/linalg.hpp"
#include "qrstab/problems.hpp"
#include "qrstab/stepper.hpp"
#include "qrstab/tableaux.hpp"

namespace qrstab
{
//---------------------------------------------------------------------------//
// PROPAGATORS
//---------------------------------------------------------------------------//

//! I + (h/2)(a0 + a1 + h a1 a0): Heun's method on x' = A x with A frozen at
//! the two step endpoints
Mat heun_propagator(const Mat& a0, const Mat& a1, double h);

//! Heun propagator of the adjoint x' = -A^T x
Mat heun_adjoint_propagator(const Mat& a0, const Mat& a1, double h);

/*!
 * Heun transition matrix of the variational equation along a computed step.
 *
 * A(t) and A(t + h) are Jacobians at the supplied states x and x_next.
 */
Mat variational_propagator(const OdeSystem& sys,
                           double t,
                           const Vec& x,
                           const Vec& x_next,
                           double h);

/*!
 * Exact one-step transition matrix of a Runge-Kutta method applied to a
 * linear system x' = A(t) x.
 *
 * Stage matrices G_i = (I - h a_ii A_i)^{-1} (I + h sum_{j<i} a_ij A_j G_j)
 * with A_i = A(t + c_i h); the result is I + h sum_i b_i A_i G_i.
 */
Mat method_propagator(const ButcherTableau& tab,
                      const OdeSystem& sys,
                      double t,
                      double h);

//---------------------------------------------------------------------------//
// POWER ITERATION
//---------------------------------------------------------------------------//

struct PowerStep
{
    Vec q_next;
    double growth = 0;
};

//! One normalized power-iteration step; throws ZeroVectorError on collapse
PowerStep power_step(const Mat& phi, const Vec& q);

/*!
 * Per-step growth-rate estimates along a trajectory.
 *
 * sigma1 is the forward power-iteration rate, sigmad the negated rate of the
 * adjoint iteration. Entry n belongs to the step [times[n], times[n] + steps[n]].
 */
struct SpectralTrace
{
    std::vector<double> times;
    std::vector<double> steps;
    std::vector<double> sigma1;
    std::vector<double> sigmad;
    Vec q_fwd;
    Vec q_adj;

    std::size_t size() const { return sigma1.size(); }

    //! Normalized all-ones start vectors, or seeded Gaussian ones
    static SpectralTrace start(std::size_t dim,
                               std::optional<std::uint64_t> seed = {});
};

struct SigmaPair
{
    double sigma1 = 0;
    double sigmad = 0;
};

//! Advance both power iterations over one step and append the estimates
SigmaPair sigma_pair_from(const Mat& a0, const Mat& a1, double t, double h,
                          SpectralTrace& trace);

/*!
 * Evaluate the Jacobians at both ends of the step (two units of jaceval) and
 * record sigma_1 and sigma_d for it.
 */
SigmaPair sigma_pair(const OdeSystem& sys,
                     JacobianKind mode,
                     double t,
                     const Vec& x,
                     const Vec& x_next,
                     double h,
                     SpectralTrace& trace,
                     Stats& stats);

//---------------------------------------------------------------------------//
// STIFFNESS INDICATORS
//---------------------------------------------------------------------------//

/*!
 * Step-weighted window mean of sigma1 - sigmad over steps n-w .. n+w.
 *
 * Throws OutOfWindowError if the window leaves the recorded range.
 */
double stiffness_SI(const SpectralTrace& trace, std::size_t n, std::size_t w);

//! SI for every step; windows are truncated at the ends of the run
std::vector<double> stiffness_SI_series(const SpectralTrace& trace, std::size_t w);

//! lambda_max - lambda_min of the symmetric part of a
double sigma_lognorm(const Mat& a);

//---------------------------------------------------------------------------//
// DISCRETE QR
//---------------------------------------------------------------------------//

/*!
 * Logarithms of the R diagonals of a discrete QR run.
 *
 * times has one more entry than log_r; log_r[n] belongs to the step from
 * times[n] to times[n+1].
 */
struct QrDiagonalLog
{
    std::vector<double> times;
    std::vector<Vec> log_r;
    Mat q;  //!< latest orthogonal factor

    std::size_t num_steps() const { return log_r.size(); }
    std::size_t dim() const { return q.rows(); }
};

//! Incremental discrete QR iteration Phi_n Q_n = Q_{n+1} R_n
class DiscreteQr
{
  public:
    DiscreteQr(const Mat& q0, double t0);

    //! Consume one transition matrix for a step of length h
    void push(const Mat& phi, double h);

    const QrDiagonalLog& log() const { return log_; }
    QrDiagonalLog release() { return std::move(log_); }

  private:
    QrDiagonalLog log_;
};

QrDiagonalLog discrete_qr_run(const std::vector<Mat>& phis,
                              const std::vector<double>& steps,
                              const Mat& q0,
                              double t0 = 0);

//! Discrete QR of a linear system under fixed steps of tab
QrDiagonalLog linear_qr_run(const ButcherTableau& tab,
                            const OdeSystem& sys,
                            double t0,
                            double t_end,
                            double h);

//---------------------------------------------------------------------------//
// ESTIMATORS
//---------------------------------------------------------------------------//

struct LyapunovEstimates
{
    //! series[n][i] = sum_{k<=n} ln R_ii(k) / (t_{n+1} - t_0)
    std::vector<Vec> series;
    Vec final;
    Vec tail_min;  //!< liminf proxy: min over the second half of the run
    Vec tail_max;  //!< limsup proxy
};

LyapunovEstimates lyapunov_estimates(const QrDiagonalLog& log);

struct SackerSellEstimates
{
    Vec alpha;
    Vec beta;
};

/*!
 * Extreme windowed growth rates.
 *
 * Every window starts at a step boundary and ends at the first boundary at
 * least H later. Requires a run of length at least 3H.
 */
SackerSellEstimates sackersell_estimates(const QrDiagonalLog& log, double window);

struct IntegralSeparation
{
    bool separated = false;
    double a = 0;
    double b = 0;
};

/*!
 * Lower envelope a (t_n - t_m) + b of the cumulative difference of ln R_ii
 * and ln R_jj.
 *
 * a is the smallest mean slope over pairs at least a quarter of the run
 * apart; b is the worst offset over all pairs given a. Long runs are
 * subsampled to about 2000 points.
 */
IntegralSeparation integral_separation_diag(const QrDiagonalLog& log,
                                            std::size_t i,
                                            std::size_t j);

//---------------------------------------------------------------------------//
// CONTINUOUS QR ORACLE
//---------------------------------------------------------------------------//

/*!
 * Continuous QR flow Q' = Q S(Q, A(t)) for a linear system.
 *
 * Integrated with classical RK4; the diagonal of Q^T A Q is accumulated with
 * the trapezoid rule on the same grid.
 */
class QrFlow
{
  public:
    QrFlow(const OdeSystem& sys, double t0, Mat q0, bool reorthonormalize = true);

    //! Advance by dt using substeps RK4 steps; returns s_i = (1/dt) int B_ii
    Vec advance(double dt, std::size_t substeps);

    double time() const { return t_; }
    const Mat& q() const { return q_; }

  private:
    const OdeSystem* sys_;
    double t_;
    Mat q_;
    bool reortho_;
};

//! Steklov averages (1/dt) int_t^{t+dt} B_ii starting from Q(t) = q
Vec steklov_oracle(const OdeSystem& sys,
                   double t,
                   double dt,
                   std::size_t substeps,
                   const Mat& q);

//! Same with Q(t) = I
Vec steklov_oracle(const OdeSystem& sys, double t, double dt, std::size_t substeps);

//---------------------------------------------------------------------------//
} // namespace qrstab

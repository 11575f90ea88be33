//---------------------------------------------------------------------------//
//! \file stepper.hpp
//! One-step integration: explicit and DIRK Runge-Kutta steps with embedded
//! error estimates, Newton stage solves and a step-size controller.
//---------------------------------------------------------------------------//
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "qrstab/linalg.hpp"
#include "qrstab/problems.hpp"
#include "qrstab/tableaux.hpp"

namespace qrstab
{
//---------------------------------------------------------------------------//
struct StepperConfig
{
    double atol = 1e-6;
    double rtol = 1e-6;
    double h0 = 1e-2;
    double h_max = 1.0;
    double reduce_factor = 0.75;
    double newton_tol = 1e-12;
    std::size_t newton_max_iter = 25;
    JacobianKind jac_mode = JacobianKind::analytic;
    std::optional<double> fixed_step;

    //! Throws ConfigError if any field is out of range
    void validate() const;
};

struct Stats
{
    std::size_t nexp = 0;
    std::size_t nimp = 0;
    std::size_t feval = 0;
    std::size_t jaceval = 0;
    std::size_t lsol = 0;
    std::size_t nsteps_accepted = 0;
    std::size_t nsteps_rejected = 0;
    double h_mean = 0;
};

//! Which member of a scheme pair took a step
enum class SchemeTag : char
{
    explicit_step = 'E',
    implicit_step = 'I',
};

struct Trajectory
{
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<double> step_sizes;
    std::vector<SchemeTag> method_used;

    std::size_t num_steps() const { return step_sizes.size(); }
};

struct StepResult
{
    Vec x_next;
    Vec x_embedded;
};

//---------------------------------------------------------------------------//
// SINGLE STEPS
//---------------------------------------------------------------------------//

//! Explicit RK step; throws NonFiniteStageError on blow-up
StepResult rk_step_explicit(const OdeSystem& sys,
                            const ButcherTableau& tab,
                            double t,
                            const Vec& x,
                            double h,
                            Stats& stats);

/*!
 * DIRK step with plain (chord) Newton on each stage.
 *
 * The stage equation is g_i = x + h sum_{j<=i} a_ij f(t + c_j h, g_j); the
 * Newton iteration starts from x and stops once
 * ||r||_inf <= newton_tol * (||g|| + ||base|| + h a_ii ||f(g)||), the sizes of
 * the residual's terms in the inf-norm. The Jacobian is evaluated at
 * (t, x) once per step, or at (t + c_i h, x) for every implicit stage when
 * the system Jacobian is time dependent.
 */
StepResult rk_step_dirk(const OdeSystem& sys,
                        const ButcherTableau& tab,
                        double t,
                        const Vec& x,
                        double h,
                        const StepperConfig& cfg,
                        Stats& stats);

//! Dispatch on the tableau class
StepResult rk_step(const OdeSystem& sys,
                   const ButcherTableau& tab,
                   double t,
                   const Vec& x,
                   double h,
                   const StepperConfig& cfg,
                   Stats& stats);

//! Jacobian per cfg.jac_mode, counted once in stats.jaceval
Mat evaluate_jacobian(const OdeSystem& sys,
                      JacobianKind mode,
                      double t,
                      const Vec& x,
                      Stats& stats);

//---------------------------------------------------------------------------//
// STEP CONTROL
//---------------------------------------------------------------------------//

//! max_i |x_next - x_emb| / (atol + rtol max(|x_prev|, |x_next|))
double error_norm(const Vec& x_next,
                  const Vec& x_embedded,
                  const Vec& x_prev,
                  double atol,
                  double rtol);

//! min(h_max, h min(2, 0.9 (1/err)^{1/(p_hat+1)}))
double propose_step(double h, double err, int embedded_order, double h_max);

//! Result of one attempted step: ok == false for a non-finite stage or a
//! failed Newton solve
struct Attempt
{
    bool ok = false;
    Vec x_next;
    double err = 0;
};

using AttemptFn = std::function<Attempt(double t, const Vec& x, double h)>;

struct Advance
{
    double t = 0;       //!< start time of the accepted step
    double h = 0;       //!< accepted step size
    Vec x_next;
    double err = 0;
    double h_next = 0;  //!< controller proposal for the following step
};

/*!
 * Retry loop around an attempt function.
 *
 * Rejected attempts (err > 1 or !ok) shrink h by cfg.reduce_factor and count
 * in stats.nsteps_rejected. Throws MinimumStepError once
 * h < 1e-12 (1 + |t|).
 */
Advance advance_with(const AttemptFn& attempt,
                     const StepperConfig& cfg,
                     int embedded_order,
                     double t,
                     const Vec& x,
                     double h_try,
                     Stats& stats);

/*!
 * Take one accepted step of tab starting from (t, x).
 *
 * With cfg.fixed_step the attempt is taken once at h_try and any failure
 * propagates.
 */
Advance advance(const OdeSystem& sys,
                const ButcherTableau& tab,
                const StepperConfig& cfg,
                double t,
                const Vec& x,
                double h_try,
                Stats& stats);

//! Clamp a proposed step so that the step never passes t_end
double clamp_to_end(double t, double h, double t_end);

//---------------------------------------------------------------------------//
struct Solution
{
    Trajectory traj;
    Stats stats;
};

//! Integrate from t0 to t_end with a single method
Solution integrate(const OdeSystem& sys,
                   const ButcherTableau& tab,
                   const StepperConfig& cfg,
                   double t0,
                   const Vec& x0,
                   double t_end);

//---------------------------------------------------------------------------//
} // namespace qrstab

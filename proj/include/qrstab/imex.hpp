//---------------------------------------------------------------------------//
//! \file imex.hpp
//! Explicit/implicit Runge-Kutta switching driven by per-step growth-rate
//! estimates.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <optional>

#include "qrstab/spectral.hpp"
#include "qrstab/stepper.hpp"
#include "qrstab/tableaux.hpp"

namespace qrstab
{
//---------------------------------------------------------------------------//
//! How H0 enters the switching thresholds
enum class ThresholdMode
{
    divide,   //!< rates compared with d1/H0 and d2/H0
    multiply, //!< rates compared with d1*H0 and d2*H0
};

enum class Scheme
{
    explicit_scheme,
    implicit_scheme,
};

struct Calibration
{
    double interval_start = 0;
    double interval_end = 0;
    double alpha = 0;
};

struct ImexConfig
{
    ButcherTableau explicit_tab;
    ButcherTableau implicit_tab;
    double d1 = -2;
    double d2 = 2;
    std::optional<double> H0;
    std::optional<Calibration> calibration;
    std::size_t w = 0;
    StepperConfig stepper;
    ThresholdMode threshold_mode = ThresholdMode::divide;
    std::optional<std::uint64_t> seed;

    //! Throws ConfigError on inconsistent settings
    void validate() const;
};

//! Explicit iff sigmad >= d1/H0 and sigma1 <= d2/H0 (or d*H0 when multiplying)
Scheme choose_scheme(double sigma1,
                     double sigmad,
                     double d1,
                     double d2,
                     double H0,
                     ThresholdMode mode = ThresholdMode::divide);

/*!
 * alpha times the mean accepted step of the explicit method over the
 * calibration interval.
 *
 * The explicit method runs adaptively from t0 (so the interval starts from
 * the computed state); steps starting inside [interval_start, interval_end)
 * are averaged.
 */
double calibrate_H0(const OdeSystem& sys,
                    const ImexConfig& cfg,
                    double t0,
                    const Vec& x0);

struct ImexResult
{
    Trajectory traj;
    Stats stats;
    SpectralTrace trace;
    double H0 = 0;
};

/*!
 * Integrate with a step-by-step choice between the two tableaux.
 *
 * After every accepted step sigma_1 and sigma_d of that step are estimated
 * from Heun propagators of the Jacobians at its endpoints, and they choose
 * the scheme of the next step. The first step is explicit.
 */
ImexResult imex_integrate(const OdeSystem& sys,
                          const ImexConfig& cfg,
                          double t0,
                          const Vec& x0,
                          double t_end);

//---------------------------------------------------------------------------//
} // namespace qrstab

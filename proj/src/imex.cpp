//---------------------------------------------------------------------------//
//! \file imex.cpp
//---------------------------------------------------------------------------//
#include "qrstab/imex.hpp"

#include <algorithm>
#include <cmath>

namespace qrstab
{
//---------------------------------------------------------------------------//
void ImexConfig::validate() const
{
    stepper.validate();
    if (!(d1 < 0 && d2 > 0))
        throw ConfigError("IMEX thresholds require d1 < 0 < d2");
    if (H0.has_value() == calibration.has_value())
        throw ConfigError("IMEX needs exactly one of H0 or a calibration interval");
    if (H0 && !(*H0 > 0))
        throw ConfigError("H0 must be positive");
    if (calibration)
    {
        if (!(calibration->alpha > 0))
            throw ConfigError("calibration alpha must be positive");
        if (!(calibration->interval_end > calibration->interval_start))
            throw ConfigError("calibration interval is empty");
    }
    if (!explicit_tab.is_explicit())
        throw ConfigError(explicit_tab.name + " is not explicit");
    if (implicit_tab.is_explicit())
        throw ConfigError(implicit_tab.name + " is not implicit");
    if (explicit_tab.order != implicit_tab.order)
    {
        throw ConfigError("IMEX pair must share the local order: "
                          + explicit_tab.name + " vs " + implicit_tab.name);
    }
}

Scheme choose_scheme(double sigma1,
                     double sigmad,
                     double d1,
                     double d2,
                     double H0,
                     ThresholdMode mode)
{
    if (!(H0 > 0))
        throw ConfigError("choose_scheme: H0 must be positive");
    double lower = mode == ThresholdMode::divide ? d1 / H0 : d1 * H0;
    double upper = mode == ThresholdMode::divide ? d2 / H0 : d2 * H0;
    if (sigmad >= lower && sigma1 <= upper)
        return Scheme::explicit_scheme;
    return Scheme::implicit_scheme;
}

//---------------------------------------------------------------------------//
double calibrate_H0(const OdeSystem& sys,
                    const ImexConfig& cfg,
                    double t0,
                    const Vec& x0)
{
    if (!cfg.calibration)
        throw ConfigError("no calibration interval configured");
    const Calibration& cal = *cfg.calibration;
    if (cal.interval_start < t0 || !(cal.interval_end > cal.interval_start))
        throw ConfigError("calibration interval must lie after t0");
    if (!(cal.alpha > 0))
        throw ConfigError("calibration alpha must be positive");

    Solution sol = integrate(
        sys, cfg.explicit_tab, cfg.stepper, t0, x0, cal.interval_end);
    double sum = 0;
    std::size_t count = 0;
    const auto& traj = sol.traj;
    for (std::size_t n = 0; n < traj.num_steps(); ++n)
    {
        if (traj.times[n] >= cal.interval_start)
        {
            sum += traj.step_sizes[n];
            ++count;
        }
    }
    if (count == 0)
        throw NumericalError("no explicit steps inside the calibration interval");
    return cal.alpha * sum / static_cast<double>(count);
}

//---------------------------------------------------------------------------//
ImexResult imex_integrate(const OdeSystem& sys,
                          const ImexConfig& cfg,
                          double t0,
                          const Vec& x0,
                          double t_end)
{
    cfg.validate();
    if (!(t_end > t0))
        throw ConfigError("t_end must exceed t0");
    if (x0.size() != sys.dim)
        throw ConfigError("initial state has wrong dimension");
    if (cfg.calibration && cfg.calibration->interval_end > t_end)
        throw ConfigError("calibration interval must lie inside the run");

    ImexResult result;
    result.H0 = cfg.H0 ? *cfg.H0 : calibrate_H0(sys, cfg, t0, x0);
    result.trace = SpectralTrace::start(sys.dim, cfg.seed);

    const StepperConfig& sc = cfg.stepper;
    Trajectory& traj = result.traj;
    Stats& stats = result.stats;
    traj.times.push_back(t0);
    traj.states.push_back(x0);

    double t = t0;
    Vec x = x0;
    double h = sc.fixed_step ? *sc.fixed_step : sc.h0;
    Scheme scheme = Scheme::explicit_scheme;
    while (t < t_end)
    {
        const bool expl = scheme == Scheme::explicit_scheme;
        const ButcherTableau& tab = expl ? cfg.explicit_tab : cfg.implicit_tab;
        double h_try
            = clamp_to_end(t, sc.fixed_step ? h : std::min(h, sc.h_max), t_end);
        Advance adv = advance(sys, tab, sc, t, x, h_try, stats);
        double t_next = adv.h == t_end - t ? t_end : t + adv.h;
        double h_step = t_next - t;

        traj.times.push_back(t_next);
        traj.step_sizes.push_back(h_step);
        traj.method_used.push_back(expl ? SchemeTag::explicit_step
                                        : SchemeTag::implicit_step);
        traj.states.push_back(adv.x_next);
        if (expl)
            ++stats.nexp;
        else
            ++stats.nimp;

        SigmaPair sig = sigma_pair(
            sys, sc.jac_mode, t, x, adv.x_next, h_step, result.trace, stats);
        scheme = choose_scheme(
            sig.sigma1, sig.sigmad, cfg.d1, cfg.d2, result.H0, cfg.threshold_mode);

        t = t_next;
        x = std::move(adv.x_next);
        h = adv.h_next;
    }
    stats.h_mean = (t_end - t0) / static_cast<double>(stats.nsteps_accepted);
    return result;
}

} // namespace qrstab

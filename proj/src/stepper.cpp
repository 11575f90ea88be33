//---------------------------------------------------------------------------//
//! \file stepper.cpp
//---------------------------------------------------------------------------//
#include "qrstab/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace qrstab
{
//---------------------------------------------------------------------------//
void StepperConfig::validate() const
{
    if (!(reduce_factor > 0 && reduce_factor < 1))
        throw ConfigError("reduce_factor must lie in (0, 1)");
    if (!(atol > 0 && rtol > 0))
        throw ConfigError("atol and rtol must be positive");
    if (!(h0 > 0 && h_max > 0))
        throw ConfigError("h0 and h_max must be positive");
    if (h0 > h_max)
        throw ConfigError("h0 must not exceed h_max");
    if (!(newton_tol > 0) || newton_max_iter == 0)
        throw ConfigError("newton_tol and newton_max_iter must be positive");
    if (fixed_step && !(*fixed_step > 0))
        throw ConfigError("fixed_step must be positive");
}

//---------------------------------------------------------------------------//
Mat evaluate_jacobian(const OdeSystem& sys,
                      JacobianKind mode,
                      double t,
                      const Vec& x,
                      Stats& stats)
{
    ++stats.jaceval;
    if (mode == JacobianKind::finite_difference
        || sys.jac_kind == JacobianKind::finite_difference || !sys.jac)
    {
        return fd_jacobian(sys, t, x);
    }
    return sys.jacobian(t, x);
}

namespace
{
Vec combine(const Vec& x, double h, const Mat& a, std::size_t row,
            const std::vector<Vec>& k, std::size_t upto)
{
    Vec result = x;
    for (std::size_t j = 0; j < upto; ++j)
    {
        double coeff = a(row, j);
        if (coeff != 0)
            axpy(h * coeff, k[j], result);
    }
    return result;
}

StepResult finish(const ButcherTableau& tab, const Vec& x, double h,
                  const std::vector<Vec>& k)
{
    StepResult result{x, x};
    for (std::size_t i = 0; i < tab.stages; ++i)
    {
        if (tab.b[i] != 0)
            axpy(h * tab.b[i], k[i], result.x_next);
        if (tab.b_hat[i] != 0)
            axpy(h * tab.b_hat[i], k[i], result.x_embedded);
    }
    if (!all_finite(result.x_next) || !all_finite(result.x_embedded))
        throw NonFiniteStageError("non-finite step result");
    return result;
}

Vec checked_rhs(const OdeSystem& sys, double t, const Vec& g, Stats& stats)
{
    ++stats.feval;
    Vec k = sys.f(t, g);
    if (!all_finite(k))
        throw NonFiniteStageError("non-finite stage derivative at t = "
                                  + std::to_string(t));
    return k;
}
} // namespace

//---------------------------------------------------------------------------//
StepResult rk_step_explicit(const OdeSystem& sys,
                            const ButcherTableau& tab,
                            double t,
                            const Vec& x,
                            double h,
                            Stats& stats)
{
    if (!tab.is_explicit())
        throw ConfigError(tab.name + " is not an explicit method");
    std::vector<Vec> k(tab.stages);
    for (std::size_t i = 0; i < tab.stages; ++i)
    {
        Vec g = combine(x, h, tab.a, i, k, i);
        k[i] = checked_rhs(sys, t + tab.c[i] * h, g, stats);
    }
    return finish(tab, x, h, k);
}

//---------------------------------------------------------------------------//
StepResult rk_step_dirk(const OdeSystem& sys,
                        const ButcherTableau& tab,
                        double t,
                        const Vec& x,
                        double h,
                        const StepperConfig& cfg,
                        Stats& stats)
{
    const std::size_t n = x.size();
    std::vector<Vec> k(tab.stages);

    std::optional<Mat> jac;
    std::unique_ptr<LuFactor> lu;
    double lu_diag = 0;

    for (std::size_t i = 0; i < tab.stages; ++i)
    {
        const double ti = t + tab.c[i] * h;
        const double aii = tab.a(i, i);
        const Vec base = combine(x, h, tab.a, i, k, i);
        if (aii == 0)
        {
            k[i] = checked_rhs(sys, ti, base, stats);
            continue;
        }

        if (sys.time_dependent_jacobian)
        {
            jac = evaluate_jacobian(sys, cfg.jac_mode, ti, x, stats);
            lu.reset();
        }
        else if (!jac)
        {
            jac = evaluate_jacobian(sys, cfg.jac_mode, t, x, stats);
        }
        if (!lu || lu_diag != aii)
        {
            Mat m = Mat::identity(n) - (h * aii) * (*jac);
            try
            {
                lu = std::make_unique<LuFactor>(m);
            }
            catch (const SingularMatrixError&)
            {
                throw NewtonDivergenceError("singular Newton matrix");
            }
            lu_diag = aii;
        }

        Vec g = x;
        bool converged = false;
        for (std::size_t iter = 0; iter <= cfg.newton_max_iter; ++iter)
        {
            Vec fg = checked_rhs(sys, ti, g, stats);
            Vec r = g - base;
            axpy(-h * aii, fg, r);
            // relative to the size of the terms, so tiny states still iterate
            double scale = norm_inf(g) + norm_inf(base) + std::fabs(h * aii) * norm_inf(fg);
            if (norm_inf(r) <= cfg.newton_tol * scale)
            {
                k[i] = std::move(fg);
                converged = true;
                break;
            }
            if (iter == cfg.newton_max_iter)
                break;
            Vec delta = lu->solve(r, &stats.lsol);
            axpy(-1.0, delta, g);
            if (!all_finite(g))
                break;
        }
        if (!converged)
        {
            throw NewtonDivergenceError("Newton failed on stage "
                                        + std::to_string(i + 1) + " at t = "
                                        + std::to_string(t));
        }
    }
    return finish(tab, x, h, k);
}

StepResult rk_step(const OdeSystem& sys,
                   const ButcherTableau& tab,
                   double t,
                   const Vec& x,
                   double h,
                   const StepperConfig& cfg,
                   Stats& stats)
{
    if (tab.is_explicit())
        return rk_step_explicit(sys, tab, t, x, h, stats);
    return rk_step_dirk(sys, tab, t, x, h, cfg, stats);
}

//---------------------------------------------------------------------------//
double error_norm(const Vec& x_next,
                  const Vec& x_embedded,
                  const Vec& x_prev,
                  double atol,
                  double rtol)
{
    if (x_next.size() != x_embedded.size() || x_next.size() != x_prev.size())
        throw ConfigError("error_norm: dimension mismatch");
    double result = 0;
    for (std::size_t i = 0; i < x_next.size(); ++i)
    {
        double scale
            = atol + rtol * std::max(std::fabs(x_prev[i]), std::fabs(x_next[i]));
        result = std::max(result, std::fabs(x_next[i] - x_embedded[i]) / scale);
    }
    return result;
}

double propose_step(double h, double err, int embedded_order, double h_max)
{
    double factor = 2;
    if (err > 0)
    {
        factor = std::min(
            2.0, 0.9 * std::pow(1 / err, 1.0 / (embedded_order + 1)));
    }
    return std::min(h_max, h * factor);
}

Advance advance_with(const AttemptFn& attempt,
                     const StepperConfig& cfg,
                     int embedded_order,
                     double t,
                     const Vec& x,
                     double h_try,
                     Stats& stats)
{
    double h = h_try;
    while (true)
    {
        if (!(h >= 1e-12 * (1 + std::fabs(t))))
        {
            throw MinimumStepError("step size " + std::to_string(h)
                                   + " below minimum at t = "
                                   + std::to_string(t));
        }
        Attempt result = attempt(t, x, h);
        if (result.ok && result.err <= 1)
        {
            ++stats.nsteps_accepted;
            Advance adv;
            adv.t = t;
            adv.h = h;
            adv.x_next = std::move(result.x_next);
            adv.err = result.err;
            adv.h_next = propose_step(h, result.err, embedded_order, cfg.h_max);
            return adv;
        }
        ++stats.nsteps_rejected;
        h *= cfg.reduce_factor;
    }
}

Advance advance(const OdeSystem& sys,
                const ButcherTableau& tab,
                const StepperConfig& cfg,
                double t,
                const Vec& x,
                double h_try,
                Stats& stats)
{
    if (cfg.fixed_step)
    {
        StepResult step = rk_step(sys, tab, t, x, h_try, cfg, stats);
        ++stats.nsteps_accepted;
        Advance adv;
        adv.t = t;
        adv.h = h_try;
        adv.err = tab.has_embedding()
                      ? error_norm(step.x_next, step.x_embedded, x, cfg.atol, cfg.rtol)
                      : 0.0;
        adv.x_next = std::move(step.x_next);
        adv.h_next = *cfg.fixed_step;
        return adv;
    }
    if (!tab.has_embedding())
        throw ConfigError(tab.name + " has no embedded estimate; use a fixed step");

    auto attempt = [&](double ta, const Vec& xa, double h) {
        Attempt result;
        try
        {
            StepResult step = rk_step(sys, tab, ta, xa, h, cfg, stats);
            result.err = error_norm(
                step.x_next, step.x_embedded, xa, cfg.atol, cfg.rtol);
            result.ok = std::isfinite(result.err);
            result.x_next = std::move(step.x_next);
        }
        catch (const NonFiniteStageError&)
        {
            result.ok = false;
        }
        catch (const NewtonDivergenceError&)
        {
            result.ok = false;
        }
        return result;
    };
    return advance_with(attempt, cfg, tab.embedded_order, t, x, h_try, stats);
}

double clamp_to_end(double t, double h, double t_end)
{
    if (t + h >= t_end - 1e-6 * h)
        return t_end - t;
    return h;
}

//---------------------------------------------------------------------------//
Solution integrate(const OdeSystem& sys,
                   const ButcherTableau& tab,
                   const StepperConfig& cfg,
                   double t0,
                   const Vec& x0,
                   double t_end)
{
    cfg.validate();
    if (!(t_end > t0))
        throw ConfigError("t_end must exceed t0");
    if (x0.size() != sys.dim)
        throw ConfigError("initial state has wrong dimension");
    if (!cfg.fixed_step && !tab.has_embedding())
        throw ConfigError(tab.name + " has no embedded estimate; use a fixed step");

    const SchemeTag tag = tab.is_explicit() ? SchemeTag::explicit_step
                                            : SchemeTag::implicit_step;
    Solution sol;
    Trajectory& traj = sol.traj;
    traj.times.push_back(t0);
    traj.states.push_back(x0);

    double t = t0;
    Vec x = x0;
    double h = cfg.fixed_step ? *cfg.fixed_step : cfg.h0;
    while (t < t_end)
    {
        double h_try = clamp_to_end(t, cfg.fixed_step ? h : std::min(h, cfg.h_max), t_end);
        Advance adv = advance(sys, tab, cfg, t, x, h_try, sol.stats);
        double t_next = adv.h == t_end - t ? t_end : t + adv.h;
        traj.times.push_back(t_next);
        traj.step_sizes.push_back(t_next - t);
        traj.method_used.push_back(tag);
        traj.states.push_back(adv.x_next);
        if (tab.is_explicit())
            ++sol.stats.nexp;
        else
            ++sol.stats.nimp;
        t = t_next;
        x = std::move(adv.x_next);
        h = adv.h_next;
    }
    sol.stats.h_mean = (t_end - t0) / static_cast<double>(sol.stats.nsteps_accepted);
    return sol;
}

} // namespace qrstab

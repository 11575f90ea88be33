#include "qrstab/stepper.hpp"

#include <cmath>
#include <memory>

#include "doctest.h"
#include "qrstab/tableaux.hpp"

using namespace qrstab;

namespace
{
OdeSystem constant_scalar(double lam)
{
    return make_scalar_test(ScalarKind::constant, {.lam = lam});
}

// Wraps a system so that every rhs call is counted independently of Stats
struct Counted
{
    OdeSystem sys;
    std::shared_ptr<std::size_t> calls = std::make_shared<std::size_t>(0);
};

Counted counted(OdeSystem base)
{
    Counted c{base};
    auto rhs = base.rhs;
    auto calls = c.calls;
    c.sys.rhs = [rhs, calls](double t, const Vec& x) {
        ++*calls;
        return rhs(t, x);
    };
    return c;
}

double smooth_exact(double t)
{
    // x' = (-1 + sin t) x, x(0) = 1
    return std::exp(-t - std::cos(t) + 1);
}

std::vector<ButcherTableau> all_tableaux()
{
    std::vector<ButcherTableau> result;
    for (const auto& name : builtin_names())
        result.push_back(builtin(name));
    return result;
}
} // namespace

//---------------------------------------------------------------------------//
TEST_CASE("config validation")
{
    StepperConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.reduce_factor = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.h0 = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.atol = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("explicit step examples")
{
    Stats stats;
    OdeSystem zero = constant_scalar(0);
    for (const char* name : {"HEU-2-2-1", "DP-7-5-4", "BS-4-2-3"})
    {
        auto step = rk_step_explicit(zero, builtin(name), 0, Vec{3.5}, 0.1, stats);
        CHECK(step.x_next == Vec{3.5});
    }
    stats = {};
    const double h = 0.3;
    auto step = rk_step_explicit(constant_scalar(1), builtin("HEU-2-2-1"), 0, Vec{2}, h, stats);
    CHECK(step.x_next[0] == doctest::Approx(2 * (1 + h + h * h / 2)).epsilon(1e-15));
    CHECK(step.x_embedded[0] == doctest::Approx(2 * (1 + h)).epsilon(1e-15));
    CHECK(stats.feval == 2);
    CHECK_THROWS_AS(
        rk_step_explicit(zero, builtin("SDIRK-2-2-1"), 0, Vec{1}, 0.1, stats), ConfigError);
}

TEST_CASE("explicit step reports non-finite stages")
{
    Stats stats;
    OdeSystem blow = constant_scalar(1);
    blow.rhs = [](double, const Vec& x) { return Vec{x[0] * 1e308 * 1e308}; };
    CHECK_THROWS_AS(rk_step_explicit(blow, builtin("HEU-2-2-1"), 0, Vec{1}, 0.1, stats),
                    NonFiniteStageError);
}

TEST_CASE("dirk step examples")
{
    StepperConfig cfg;
    Stats stats;
    auto step = rk_step_dirk(constant_scalar(0), builtin("SDIRK-2-2-1"), 0, Vec{1.25}, 0.1, cfg, stats);
    CHECK(step.x_next == Vec{1.25});
    CHECK(stats.lsol == 0);

    stats = {};
    step = rk_step_dirk(constant_scalar(-1), builtin("SDIRK-2-2-1"), 0, Vec{1}, 0.1, cfg, stats);
    const double z = -0.1;
    CHECK(step.x_next[0]
          == doctest::Approx((2 - 2 * z - z * z) / (2 * (1 - z) * (1 - z))).epsilon(1e-13));

    step = rk_step_dirk(constant_scalar(-1e4), builtin("SDIRK-4-2-3"), 0, Vec{1}, 0.1, cfg, stats);
    CHECK(std::abs(step.x_next[0]) < 1);
}

TEST_CASE("dirk counters on an autonomous nonlinear system")
{
    StepperConfig cfg;
    for (const char* name : {"SDIRK-2-2-1", "SDIRK-3-2-3", "ESDIRK-4-2-3"})
    {
        CAPTURE(name);
        auto c = counted(make_vdp(5));
        Stats stats;
        rk_step_dirk(c.sys, builtin(name), 0, Vec{0.5, 1}, 0.01, cfg, stats);
        CHECK(stats.jaceval == 1);
        CHECK(stats.feval == *c.calls);
        CHECK(stats.lsol > 0);
        // each implicit stage: one more residual evaluation than solves
        std::size_t implicit_stages = 0;
        auto tab = builtin(name);
        for (std::size_t i = 0; i < tab.stages; ++i)
            implicit_stages += tab.a(i, i) != 0;
        CHECK(stats.feval == stats.lsol + tab.stages);
        CHECK(implicit_stages >= 2);

        // finite-difference Jacobian rhs calls are charged to jaceval only
        auto c2 = counted(make_vdp(5));
        StepperConfig fd = cfg;
        fd.jac_mode = JacobianKind::finite_difference;
        Stats fd_stats;
        rk_step_dirk(c2.sys, builtin(name), 0, Vec{0.5, 1}, 0.01, fd, fd_stats);
        CHECK(fd_stats.jaceval == 1);
        CHECK(*c2.calls == fd_stats.feval + 3);
    }
}

TEST_CASE("newton failure raises divergence")
{
    StepperConfig cfg;
    cfg.newton_max_iter = 1;
    Stats stats;
    CHECK_THROWS_AS(
        rk_step_dirk(make_vdp(100), builtin("SDIRK-2-2-1"), 0, Vec{1.9, 1.5}, 0.5, cfg, stats),
        NewtonDivergenceError);
}

TEST_CASE("error norm examples")
{
    CHECK(error_norm(Vec{1, 2}, Vec{1, 2}, Vec{0, 0}, 1e-6, 1e-6) == 0.0);
    CHECK(error_norm(Vec{1}, Vec{1 - 1e-4}, Vec{1}, 1e-4, 1e-4) == doctest::Approx(0.5));
    // component 1 weight 1e-3 + 1e-3 * 10, component 0 weight 2e-3
    double e = error_norm(Vec{1, 10}, Vec{1.001, 10.033}, Vec{0, 0}, 1e-3, 1e-3);
    CHECK(e == doctest::Approx(3.0));
    CHECK_THROWS_AS(error_norm(Vec{1}, Vec{1, 2}, Vec{1}, 1, 1), ConfigError);
}

TEST_CASE("step proposal examples")
{
    CHECK(propose_step(0.1, 0.0, 1, 1.0) == doctest::Approx(0.2));
    CHECK(propose_step(0.1, 0.0, 1, 0.15) == doctest::Approx(0.15));
    CHECK(propose_step(0.1, 1.0, 2, 1.0) == doctest::Approx(0.09));
    CHECK(propose_step(0.1, 1.0 / 8, 2, 1.0) == doctest::Approx(0.18));
}

TEST_CASE("synthetic advance sequence")
{
    StepperConfig cfg;
    cfg.h_max = 1;
    std::vector<double> errs{4, 0.5};
    std::vector<double> tried;
    AttemptFn attempt = [&](double, const Vec& x, double h) {
        tried.push_back(h);
        return Attempt{true, x, errs[tried.size() - 1]};
    };
    Stats stats;
    Advance adv = advance_with(attempt, cfg, 1, 0, Vec{1}, 0.2, stats);
    REQUIRE(tried.size() == 2);
    CHECK(tried[1] == doctest::Approx(0.75 * 0.2));
    CHECK(adv.h == doctest::Approx(0.15));
    CHECK(stats.nsteps_rejected == 1);
    CHECK(stats.nsteps_accepted == 1);
    CHECK(adv.h_next == doctest::Approx(0.15 * std::min(2.0, 0.9 * std::sqrt(2.0))));
}

TEST_CASE("failed attempts count as rejections")
{
    StepperConfig cfg;
    int calls = 0;
    AttemptFn attempt = [&](double, const Vec& x, double) {
        ++calls;
        return Attempt{calls > 2, x, 0.0};
    };
    Stats stats;
    advance_with(attempt, cfg, 1, 0, Vec{1}, 0.1, stats);
    CHECK(stats.nsteps_rejected == 2);

    AttemptFn never = [](double, const Vec& x, double) { return Attempt{false, x, 0.0}; };
    CHECK_THROWS_AS(advance_with(never, cfg, 1, 0, Vec{1}, 0.1, stats), MinimumStepError);
}

TEST_CASE("clamping to the end time")
{
    CHECK(clamp_to_end(0, 0.3, 1) == 0.3);
    CHECK(clamp_to_end(0.9, 0.3, 1) == doctest::Approx(0.1));
    CHECK(clamp_to_end(0.7, 0.3 * (1 - 1e-7), 1) == doctest::Approx(0.3));
}

TEST_CASE("integrate reaches exp(-1)")
{
    StepperConfig cfg;
    cfg.atol = cfg.rtol = 1e-8;
    cfg.h0 = 1e-3;
    for (const char* name : {"DP-7-5-4", "BS-4-2-3", "SDIRK-3-2-3", "ESDIRK-4-2-3"})
    {
        CAPTURE(name);
        auto sol = integrate(constant_scalar(-1), builtin(name), cfg, 0, Vec{1}, 1);
        CHECK(sol.traj.times.back() == 1.0);
        CHECK(std::abs(sol.traj.states.back()[0] - std::exp(-1.0)) <= 10 * cfg.atol);
    }
}

TEST_CASE("trajectory and stats are consistent")
{
    StepperConfig cfg;
    cfg.atol = cfg.rtol = 1e-5;
    cfg.h_max = 0.5;
    for (const auto& tab : all_tableaux())
    {
        CAPTURE(tab.name);
        auto c = counted(make_vdp(10));
        auto sol = integrate(c.sys, tab, cfg, 0, c.sys.x0, 3);
        const auto& tr = sol.traj;
        REQUIRE(tr.times.size() == tr.num_steps() + 1);
        REQUIRE(tr.states.size() == tr.times.size());
        CHECK(tr.times.back() == 3.0);
        for (std::size_t n = 0; n < tr.num_steps(); ++n)
        {
            CHECK(tr.times[n + 1] > tr.times[n]);
            CHECK(std::abs(tr.step_sizes[n] - (tr.times[n + 1] - tr.times[n])) <= 1e-14);
        }
        CHECK(sol.stats.nsteps_accepted == tr.num_steps());
        CHECK(sol.stats.h_mean == doctest::Approx(3.0 / tr.num_steps()));
        CHECK(sol.stats.feval == *c.calls);
        if (tab.is_explicit())
        {
            CHECK(sol.stats.nexp == tr.num_steps());
            CHECK(sol.stats.feval
                  == tab.stages * (sol.stats.nsteps_accepted + sol.stats.nsteps_rejected));
            CHECK(sol.stats.jaceval == 0);
            CHECK(sol.stats.lsol == 0);
        }
        else
        {
            CHECK(sol.stats.nimp == tr.num_steps());
            CHECK(sol.stats.jaceval
                  == sol.stats.nsteps_accepted + sol.stats.nsteps_rejected);
        }
    }
}

TEST_CASE("explicit counters on three configurations")
{
    struct Case
    {
        OdeSystem sys;
        const char* tab;
        double tol;
        double t_end;
    };
    std::vector<Case> cases{{make_compost_bomb(), "HEU-2-2-1", 1e-4, 5},
                            {make_fhn(), "BS-4-2-3", 1e-6, 2},
                            {make_2dlin(), "DP-7-5-4", 1e-6, 1}};
    for (auto& c : cases)
    {
        CAPTURE(c.tab);
        auto cs = counted(c.sys);
        StepperConfig cfg;
        cfg.atol = cfg.rtol = c.tol;
        auto tab = builtin(c.tab);
        auto sol = integrate(cs.sys, tab, cfg, 0, c.sys.x0, c.t_end);
        std::size_t attempts = sol.stats.nsteps_accepted + sol.stats.nsteps_rejected;
        CHECK(*cs.calls == tab.stages * attempts);
        CHECK(sol.stats.feval == *cs.calls);
    }
}

TEST_CASE("runs are deterministic")
{
    StepperConfig cfg;
    cfg.atol = cfg.rtol = 1e-5;
    auto sys = make_compost_bomb();
    auto a = integrate(sys, builtin("SDIRK-2-2-1"), cfg, 0, sys.x0, 20);
    auto b = integrate(sys, builtin("SDIRK-2-2-1"), cfg, 0, sys.x0, 20);
    CHECK(a.traj.times == b.traj.times);
    CHECK(a.traj.states == b.traj.states);
    CHECK(a.stats.feval == b.stats.feval);
    CHECK(a.stats.lsol == b.stats.lsol);
    CHECK(a.stats.nsteps_rejected == b.stats.nsteps_rejected);
}

TEST_CASE("per-step ratio equals the stability function")
{
    StepperConfig cfg;
    const double h = 0.05;
    cfg.fixed_step = h;
    auto tabs = all_tableaux();
    tabs.push_back(implicit_euler());
    for (double lam : {-1.0, -30.0, 2.0})
    {
        for (const auto& tab : tabs)
        {
            CAPTURE(tab.name);
            CAPTURE(lam);
            auto sol = integrate(constant_scalar(lam), tab, cfg, 0, Vec{1}, 1);
            double psi = stability_function(tab, {h * lam, 0}).re;
            for (std::size_t n = 0; n < sol.traj.num_steps(); ++n)
            {
                double ratio = sol.traj.states[n + 1][0] / sol.traj.states[n][0];
                CHECK(std::abs(ratio - psi) <= 1e-12 * std::max(1.0, std::abs(psi)));
            }
        }
    }
}

TEST_CASE("asymptotic convergence orders")
{
    // one halving finer than the acceptance set, past the preasymptotic range
    auto sys = make_scalar_test(ScalarKind::smooth_decay);
    auto tabs = all_tableaux();
    tabs.push_back(implicit_euler());
    for (const auto& tab : tabs)
    {
        CAPTURE(tab.name);
        std::vector<double> errors;
        for (double h : {0.1, 0.05, 0.025, 0.0125})
        {
            StepperConfig cfg;
            cfg.fixed_step = h;
            auto sol = integrate(sys, tab, cfg, 0, Vec{1}, 2);
            errors.push_back(std::abs(sol.traj.states.back()[0] - smooth_exact(2)));
        }
        for (std::size_t k = 1; k < errors.size(); ++k)
        {
            double order = std::log2(errors[k - 1] / errors[k]);
            CAPTURE(order);
            CHECK(order >= tab.order - 0.3);
            CHECK(order <= tab.order + 0.5);
        }
    }
}

TEST_CASE("fixed-step mode without an embedding")
{
    StepperConfig cfg;
    CHECK_THROWS_AS(integrate(constant_scalar(-1), implicit_euler(), cfg, 0, Vec{1}, 1),
                    ConfigError);
    cfg.fixed_step = 0.3;
    auto sol = integrate(constant_scalar(-1), implicit_euler(), cfg, 0, Vec{1}, 1);
    CHECK(sol.traj.num_steps() == 4);
    CHECK(sol.traj.times.back() == 1.0);
    CHECK(sol.traj.step_sizes.back() == doctest::Approx(0.1));
}

TEST_CASE("2dlin implicit Euler: growth at h = 1, decay at h = 0.01")
{
    TwoDimLinearParams p;
    auto sys = make_2dlin(p);
    StepperConfig cfg;
    cfg.fixed_step = 1;
    auto sol = integrate(sys, implicit_euler(), cfg, 0, sys.x0, 100);

    // direct iteration of (I - A(t_{n+1})) x_{n+1} = x_n, 2x2 Cramer solve
    Vec x = sys.x0;
    for (std::size_t n = 0; n < 100; ++n)
    {
        Mat a = sys.coefficient(n + 1.0);
        double m00 = 1 - a(0, 0), m01 = -a(0, 1), m10 = -a(1, 0), m11 = 1 - a(1, 1);
        double det = m00 * m11 - m01 * m10;
        x = Vec{(m11 * x[0] - m01 * x[1]) / det, (m00 * x[1] - m10 * x[0]) / det};
        const Vec& got = sol.traj.states[n + 1];
        CHECK(norm_inf(got - x) <= 1e-10 * norm_inf(x));
    }
    const auto& s = sol.traj.states;
    CHECK(norm2(s[100]) / norm2(s[99]) == doctest::Approx(1 / 0.9).epsilon(1e-6));

    cfg.fixed_step = 0.01;
    auto fine = integrate(sys, implicit_euler(), cfg, 0, sys.x0, 50);
    CHECK(norm2(fine.traj.states.back()) < norm2(sys.x0));
}

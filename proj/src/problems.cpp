//---------------------------------------------------------------------------//
//! \file problems.cpp
//---------------------------------------------------------------------------//
#include "qrstab/problems.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qrstab
{
namespace
{
Mat two_dim_coefficient(const TwoDimLinearParams& p, double t)
{
    const double omega = p.a2 * t;
    const double cw = std::cos(omega);
    const double sw = std::sin(omega);
    const double beta
        = p.beta0 * (1 + std::cos(p.a1 * t) / (1 + p.beta1 * t * t));
    Mat rot{{cw, -sw}, {sw, cw}};
    Mat core{{p.lam1, beta}, {0, p.lam2}};
    return rot * core * rot.transpose();
}

double take(ParamMap& params, const std::string& key, double fallback)
{
    auto it = params.find(key);
    if (it == params.end())
        return fallback;
    double value = it->second;
    params.erase(it);
    return value;
}

void reject_leftovers(const std::string& id, const ParamMap& leftover)
{
    if (!leftover.empty())
    {
        throw ConfigError("unknown parameter '" + leftover.begin()->first
                          + "' for problem '" + id + "'");
    }
}
} // namespace

//---------------------------------------------------------------------------//

OdeSystem make_2dlin(const TwoDimLinearParams& p)
{
    OdeSystem sys;
    sys.name = "2dlin";
    sys.dim = 2;
    sys.linear = true;
    sys.time_dependent_jacobian = true;
    sys.rhs = [p](double t, const Vec& x) { return two_dim_coefficient(p, t) * x; };
    sys.jac = [p](double t, const Vec&) { return two_dim_coefficient(p, t); };
    sys.params = {{"lam1", p.lam1},
                  {"lam2", p.lam2},
                  {"beta0", p.beta0},
                  {"beta1", p.beta1},
                  {"a1", p.a1},
                  {"a2", p.a2}};
    sys.x0 = Vec{1.0, -1.0};
    return sys;
}

double discriminant_2dlin(const TwoDimLinearParams& p)
{
    double trace = p.lam1 + p.lam2;
    return trace * trace - 4 * (p.a1 * (p.beta0 + p.a1) + p.lam1 * p.lam2);
}

//---------------------------------------------------------------------------//

double ScalarCoefficient::operator()(double t) const
{
    double result = lam;
    if (D != 0)
        result += D * std::cos(2 * std::numbers::pi * (t - t0) / period);
    if (sin_amp != 0)
        result += sin_amp * std::sin(t);
    return result;
}

OdeSystem make_scalar(const ScalarCoefficient& coeff)
{
    if (!(coeff.period > 0))
        throw ConfigError("scalar: period must be positive");
    OdeSystem sys;
    sys.name = "scalar";
    sys.dim = 1;
    sys.linear = true;
    sys.time_dependent_jacobian = true;
    sys.rhs = [coeff](double t, const Vec& x) { return Vec{coeff(t) * x[0]}; };
    sys.jac = [coeff](double t, const Vec&) { return Mat{{coeff(t)}}; };
    sys.params = {{"lam", coeff.lam},
                  {"D", coeff.D},
                  {"period", coeff.period},
                  {"t0", coeff.t0},
                  {"sin_amp", coeff.sin_amp}};
    sys.x0 = Vec{1.0};
    return sys;
}

OdeSystem make_scalar_test(ScalarKind kind, const ScalarTestParams& p)
{
    ScalarCoefficient coeff;
    switch (kind)
    {
        case ScalarKind::constant:
            coeff.lam = p.lam;
            break;
        case ScalarKind::cosine_counterexample:
            if (!(p.D > p.alpha && p.alpha > 0 && p.h0 > 0))
                throw ConfigError("cosine counterexample requires D > alpha > 0, h0 > 0");
            coeff.lam = -p.alpha;
            coeff.D = p.D;
            coeff.period = p.h0;
            coeff.t0 = p.t0;
            break;
        case ScalarKind::smooth_decay:
            coeff.lam = -1;
            coeff.sin_amp = 1;
            break;
    }
    return make_scalar(coeff);
}

//---------------------------------------------------------------------------//

double exp_taylor(double y, int degree)
{
    // Horner form of sum_k y^k / k!
    double result = 1;
    for (int k = degree; k >= 1; --k)
        result = 1 + result * y / k;
    return result;
}

OdeSystem make_compost_bomb(const CompostParams& p)
{
    if (!(p.nu > 0))
        throw ConfigError("compost bomb: nu must be positive");
    if (!(p.eps > 0))
        throw ConfigError("compost bomb: eps must be positive");
    OdeSystem sys;
    sys.name = "compost";
    sys.dim = 3;
    const double k_loss = p.lambda / p.area;
    sys.rhs = [p, k_loss](double, const Vec& x) {
        const double heat = x[1] * p.r * exp_taylor(p.alpha * x[0], 6);
        return Vec{(heat - k_loss * (x[0] - x[2])) / p.eps, p.pi_in - heat, p.nu};
    };
    sys.jac = [p, k_loss](double, const Vec& x) {
        const double e6 = exp_taylor(p.alpha * x[0], 6);
        // d/dT of the degree-6 polynomial is alpha times the degree-5 one
        const double de6 = p.alpha * exp_taylor(p.alpha * x[0], 5);
        return Mat{{(x[1] * p.r * de6 - k_loss) / p.eps,
                    p.r * e6 / p.eps,
                    k_loss / p.eps},
                   {-x[1] * p.r * de6, -p.r * e6, 0},
                   {0, 0, 0}};
    };
    sys.params = {{"nu", p.nu},
                  {"r", p.r},
                  {"alpha", p.alpha},
                  {"lambda", p.lambda},
                  {"A", p.area},
                  {"Pi", p.pi_in},
                  {"eps", p.eps}};
    sys.x0 = Vec{8.15, 50.0, 0.0};
    return sys;
}

//---------------------------------------------------------------------------//

OdeSystem make_vdp(double mu, double amp, double omega)
{
    if (!(mu > 0))
        throw ConfigError("Van der Pol: mu must be positive");
    OdeSystem sys;
    sys.name = "vdp";
    sys.dim = 2;
    sys.rhs = [=](double t, const Vec& x) {
        return Vec{mu * (1 - x[0] * x[0]) * x[1] + x[0] - amp * std::sin(omega * t),
                   x[0]};
    };
    sys.jac = [=](double, const Vec& x) {
        return Mat{{-2 * mu * x[0] * x[1] + 1, mu * (1 - x[0] * x[0])}, {1, 0}};
    };
    sys.params = {{"mu", mu}, {"amp", amp}, {"omega", omega}};
    sys.x0 = Vec{0.0, 2.0};
    return sys;
}

//---------------------------------------------------------------------------//

OdeSystem make_fhn(const FhnParams& p)
{
    if (p.J < 2)
        throw ConfigError("Fitzhugh-Nagumo: J must be at least 2");
    const std::size_t J = static_cast<std::size_t>(p.J);
    const std::size_t n = J + 1;
    const double dx = 1.0 / p.J;
    const double diff = p.alpha / (dx * dx);

    OdeSystem sys;
    sys.name = "fhn";
    sys.dim = 2 * n;
    sys.rhs = [=](double, const Vec& x) {
        Vec dx_dt(2 * n);
        for (std::size_t j = 0; j < n; ++j)
        {
            const double u = x[j];
            const double v = x[n + j];
            double lap;
            if (j == 0)
                lap = x[1] - x[0];
            else if (j == J)
                lap = x[J - 1] - x[J];
            else
                lap = x[j + 1] + x[j - 1] - 2 * u;
            dx_dt[j] = -2 * u * u * u + 6 * u - v + diff * lap;
            dx_dt[n + j] = p.eps * (u - p.delta * v);
        }
        return dx_dt;
    };
    sys.jac = [=](double, const Vec& x) {
        Mat m(2 * n, 2 * n);
        for (std::size_t j = 0; j < n; ++j)
        {
            const double u = x[j];
            double dphi = -6 * u * u + 6;
            if (j == 0)
            {
                m(0, 0) = dphi - diff;
                m(0, 1) = diff;
            }
            else if (j == J)
            {
                m(J, J) = dphi - diff;
                m(J, J - 1) = diff;
            }
            else
            {
                m(j, j) = dphi - 2 * diff;
                m(j, j - 1) = diff;
                m(j, j + 1) = diff;
            }
            m(j, n + j) = -1;
            m(n + j, j) = p.eps;
            m(n + j, n + j) = -p.eps * p.delta;
        }
        return m;
    };
    sys.params = {{"J", static_cast<double>(p.J)},
                  {"eps", p.eps},
                  {"alpha", p.alpha},
                  {"delta", p.delta}};
    sys.x0 = Vec(2 * n);
    for (std::size_t j = 0; j < n; ++j)
    {
        const double xj = static_cast<double>(j) * dx;
        sys.x0[j] = std::sin(0.5 * std::numbers::pi * xj);
        sys.x0[n + j] = std::cos(0.5 * std::numbers::pi * xj);
    }
    return sys;
}

//---------------------------------------------------------------------------//

OdeSystem make_diag2(double d0, double d1)
{
    OdeSystem sys;
    sys.name = "diag2";
    sys.dim = 2;
    sys.linear = true;
    sys.rhs = [=](double, const Vec& x) { return Vec{d0 * x[0], d1 * x[1]}; };
    sys.jac = [=](double, const Vec&) { return Mat{{d0, 0}, {0, d1}}; };
    sys.params = {{"d0", d0}, {"d1", d1}};
    sys.x0 = Vec{1.0, 1.0};
    return sys;
}

//---------------------------------------------------------------------------//

Mat fd_jacobian(const OdeSystem& sys, double t, const Vec& x)
{
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    const std::size_t n = x.size();
    const Vec f0 = sys.f(t, x);
    Mat result(f0.size(), n);
    Vec xp = x;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double eta = sqrt_eps * std::max(std::fabs(x[i]), 1.0);
        xp[i] = x[i] + eta;
        const double step = xp[i] - x[i];
        const Vec f1 = sys.f(t, xp);
        for (std::size_t r = 0; r < f0.size(); ++r)
            result(r, i) = (f1[r] - f0[r]) / step;
        xp[i] = x[i];
    }
    return result;
}

OdeSystem with_fd_jacobian(OdeSystem sys)
{
    OdeSystem::Rhs rhs = sys.rhs;
    std::size_t dim = sys.dim;
    sys.jac = [rhs, dim](double t, const Vec& x) {
        OdeSystem plain;
        plain.dim = dim;
        plain.rhs = rhs;
        return fd_jacobian(plain, t, x);
    };
    sys.jac_kind = JacobianKind::finite_difference;
    return sys;
}

//---------------------------------------------------------------------------//

const std::vector<std::string>& problem_ids()
{
    static const std::vector<std::string> ids{
        "2dlin", "scalar", "compost", "vdp", "fhn", "diag2"};
    return ids;
}

OdeSystem make_problem(const std::string& id, const ParamMap& overrides)
{
    ParamMap params = overrides;
    OdeSystem sys;
    if (id == "2dlin")
    {
        TwoDimLinearParams p;
        p.lam1 = take(params, "lam1", p.lam1);
        p.lam2 = take(params, "lam2", p.lam2);
        p.beta0 = take(params, "beta0", p.beta0);
        p.beta1 = take(params, "beta1", p.beta1);
        p.a1 = take(params, "a1", p.a1);
        p.a2 = take(params, "a2", p.a2);
        reject_leftovers(id, params);
        sys = make_2dlin(p);
    }
    else if (id == "scalar")
    {
        ScalarCoefficient c;
        c.lam = take(params, "lam", c.lam);
        c.D = take(params, "D", c.D);
        c.period = take(params, "period", c.period);
        c.t0 = take(params, "t0", c.t0);
        c.sin_amp = take(params, "sin_amp", c.sin_amp);
        reject_leftovers(id, params);
        sys = make_scalar(c);
    }
    else if (id == "compost")
    {
        CompostParams p;
        p.nu = take(params, "nu", p.nu);
        p.r = take(params, "r", p.r);
        p.alpha = take(params, "alpha", p.alpha);
        p.lambda = take(params, "lambda", p.lambda);
        p.area = take(params, "A", p.area);
        p.pi_in = take(params, "Pi", p.pi_in);
        p.eps = take(params, "eps", p.eps);
        reject_leftovers(id, params);
        sys = make_compost_bomb(p);
    }
    else if (id == "vdp")
    {
        double mu = take(params, "mu", 100.0);
        double amp = take(params, "amp", 1.0);
        double omega = take(params, "omega", 1.0);
        reject_leftovers(id, params);
        sys = make_vdp(mu, amp, omega);
    }
    else if (id == "fhn")
    {
        FhnParams p;
        double J = take(params, "J", p.J);
        if (J != std::floor(J))
            throw ConfigError("fhn: J must be an integer");
        p.J = static_cast<int>(J);
        p.eps = take(params, "eps", p.eps);
        p.alpha = take(params, "alpha", p.alpha);
        p.delta = take(params, "delta", p.delta);
        reject_leftovers(id, params);
        sys = make_fhn(p);
    }
    else if (id == "diag2")
    {
        double d0 = take(params, "d0", -1000.0);
        double d1 = take(params, "d1", -1.0);
        reject_leftovers(id, params);
        sys = make_diag2(d0, d1);
    }
    else
    {
        throw ConfigError("unknown problem '" + id + "'");
    }
    return sys;
}

} // namespace qrstab

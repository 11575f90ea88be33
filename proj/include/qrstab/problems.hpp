//---------------------------------------------------------------------------//
//! \file problems.hpp
//! Test ODEs: the rotating 2D linear system, scalar test equations, the
//! compost bomb, forced Van der Pol, and the discretized Fitzhugh-Nagumo PDE.
//---------------------------------------------------------------------------//
#pragma once

#include <functional>
#include <map>
#include <string>

#include "qrstab/linalg.hpp"

namespace qrstab
{
//---------------------------------------------------------------------------//
enum class JacobianKind
{
    analytic,
    finite_difference,
};

using ParamMap = std::map<std::string, double>;

/*!
 * Right-hand side f(t, x) with its Jacobian Df(x, t).
 *
 * For linear systems (`linear == true`) the Jacobian is the coefficient
 * matrix A(t) and does not depend on x.
 */
struct OdeSystem
{
    using Rhs = std::function<Vec(double, const Vec&)>;
    using Jac = std::function<Mat(double, const Vec&)>;

    std::string name;
    std::size_t dim = 0;
    Rhs rhs;
    Jac jac;
    JacobianKind jac_kind = JacobianKind::analytic;
    bool linear = false;
    //! Jacobian depends explicitly on t (stage-time refresh in DIRK steps)
    bool time_dependent_jacobian = false;
    ParamMap params;
    Vec x0;

    Vec f(double t, const Vec& x) const { return rhs(t, x); }
    Mat jacobian(double t, const Vec& x) const { return jac(t, x); }
    //! A(t) of a linear system
    Mat coefficient(double t) const { return jac(t, Vec(dim)); }
};

//---------------------------------------------------------------------------//
struct TwoDimLinearParams
{
    double lam1 = 0.1;
    double lam2 = -0.2;
    double beta0 = 1000.0;
    double beta1 = 0.001;
    double a1 = 6.283185307179586;
    double a2 = 6.283185307179586;
};

//! x' = L(t) C(t) L(t)^T x with a rotation L and triangular C
OdeSystem make_2dlin(const TwoDimLinearParams& p = {});

//! (lam1 + lam2)^2 - 4 (a1 (beta0 + a1) + lam1 lam2)
double discriminant_2dlin(const TwoDimLinearParams& p);

//---------------------------------------------------------------------------//
/*!
 * Scalar coefficient
 * lambda(t) = lam + D cos(2 pi (t - t0) / period) + sin_amp sin(t).
 */
struct ScalarCoefficient
{
    double lam = -1.0;
    double D = 0.0;
    double period = 1.0;
    double t0 = 0.0;
    double sin_amp = 0.0;

    double operator()(double t) const;
};

enum class ScalarKind
{
    constant,
    cosine_counterexample,
    smooth_decay,
};

struct ScalarTestParams
{
    double lam = -1.0;  //!< constant kind only
    double D = 0.6;
    double alpha = 0.1;
    double h0 = 1.0;
    double t0 = 0.0;
};

OdeSystem make_scalar(const ScalarCoefficient& coeff);

/*!
 * Scalar test equations x' = lambda(t) x.
 *
 * - constant: lambda = lam
 * - cosine_counterexample: lambda = D cos(2 pi (t - t0) / h0) - alpha,
 *   requires D > alpha > 0
 * - smooth_decay: lambda = -1 + sin t
 */
OdeSystem make_scalar_test(ScalarKind kind, const ScalarTestParams& p = {});

//---------------------------------------------------------------------------//
struct CompostParams
{
    double nu = 0.09;
    double r = 0.01;
    double alpha = 0.0916290731874155; // ln(2.5)/10
    double lambda = 5.049e6;
    double area = 3.9e7;
    double pi_in = 1.055;
    //! time-scale factor of the temperature equation; 1 drops it
    double eps = 0.064;
};

/*!
 * Compost bomb with exp(alpha T) replaced by its degree-6 Taylor polynomial:
 * eps T' = C r P6(alpha T) - (lambda / A)(T - T_a), C' = Pi - C r P6(alpha T),
 * T_a' = nu.
 */
OdeSystem make_compost_bomb(const CompostParams& p = {});

//! sum_{k=0}^{degree} y^k / k!
double exp_taylor(double y, int degree);

//---------------------------------------------------------------------------//
OdeSystem make_vdp(double mu = 100.0, double amp = 1.0, double omega = 1.0);

//---------------------------------------------------------------------------//
struct FhnParams
{
    int J = 14;
    double eps = 0.1;
    double alpha = 0.3;
    double delta = 0.01;
};

/*!
 * Method-of-lines Fitzhugh-Nagumo system of dimension 2J + 2.
 *
 * State ordering is (u_0 .. u_J, v_0 .. v_J).
 */
OdeSystem make_fhn(const FhnParams& p = {});

//---------------------------------------------------------------------------//
//! x' = diag(d0, d1) x
OdeSystem make_diag2(double d0, double d1);

//---------------------------------------------------------------------------//
/*!
 * Forward-difference Jacobian.
 *
 * Column i uses the step sqrt(eps) * max(|x_i|, 1).
 */
Mat fd_jacobian(const OdeSystem& sys, double t, const Vec& x);

//! Copy of sys whose jac is the finite-difference approximation
OdeSystem with_fd_jacobian(OdeSystem sys);

//---------------------------------------------------------------------------//
//! Problem ids accepted by make_problem
const std::vector<std::string>& problem_ids();

//! Build a problem by id with named parameter overrides (unknown keys throw)
OdeSystem make_problem(const std::string& id, const ParamMap& overrides = {});

//---------------------------------------------------------------------------//
} // namespace qrstab

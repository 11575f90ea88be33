#include "qrstab/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

using namespace qrstab;

namespace
{
// Central differences with a fixed relative step, independent of fd_jacobian
Mat central_jacobian(const OdeSystem& sys, double t, const Vec& x)
{
    Mat m(sys.dim, sys.dim);
    for (std::size_t i = 0; i < sys.dim; ++i)
    {
        double eta = 1e-6 * std::max(1.0, std::abs(x[i]));
        Vec xp = x;
        Vec xm = x;
        xp[i] += eta;
        xm[i] -= eta;
        Vec df = sys.f(t, xp) - sys.f(t, xm);
        for (std::size_t r = 0; r < sys.dim; ++r)
            m(r, i) = df[r] / (xp[i] - xm[i]);
    }
    return m;
}

double rel_diff(const Mat& a, const Mat& b)
{
    return max_abs(a - b) / std::max(1.0, max_abs(b));
}

Vec random_state(std::mt19937_64& rng, const std::vector<std::pair<double, double>>& box)
{
    Vec x(box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
        x[i] = std::uniform_real_distribution<double>(box[i].first, box[i].second)(rng);
    return x;
}

std::vector<std::pair<double, double>> uniform_box(std::size_t n, double lo, double hi)
{
    return std::vector<std::pair<double, double>>(n, {lo, hi});
}
} // namespace

//---------------------------------------------------------------------------//
TEST_CASE("2dlin coefficient at t = 0")
{
    TwoDimLinearParams p;
    p.beta1 = 0.37;
    auto sys = make_2dlin(p);
    Mat a0 = sys.coefficient(0);
    Mat c0{{p.lam1, 2 * p.beta0}, {0, p.lam2}};
    CHECK(max_abs(a0 - c0) < 1e-12);
    CHECK(sys.x0 == Vec{1, -1});
    CHECK(sys.linear);
}

TEST_CASE("2dlin rhs is A(t) x and the norm is bounded")
{
    auto sys = make_2dlin();
    const double bound = 0.1 + 0.2 + 2 * 1000;
    Vec x{0.3, -2};
    for (int k = 0; k <= 1000; ++k)
    {
        double t = 0.1 * k;
        Mat a = sys.coefficient(t);
        CHECK(norm2(a) <= bound * (1 + 1e-12));
        CHECK(norm_inf(sys.f(t, x) - a * x) < 1e-9);
    }
}

TEST_CASE("2dlin Hermitian part has a positive eigenvalue at t = 0")
{
    auto a0 = make_2dlin().coefficient(0);
    CHECK(sym_eig_extremes(0.5 * (a0 + a0.transpose())).lam_max > 0);
}

TEST_CASE("2dlin discriminant")
{
    TwoDimLinearParams p;
    CHECK(discriminant_2dlin(p) < 0);
    p.a1 = p.a2 = 0.01;
    p.beta0 = 2.09;
    CHECK(discriminant_2dlin(p) > 0);
}

TEST_CASE("cosine counterexample coefficient")
{
    ScalarTestParams p;
    p.t0 = 0.25;
    auto sys = make_scalar_test(ScalarKind::cosine_counterexample, p);
    for (int n = 0; n < 20; ++n)
    {
        double t = p.t0 + n;
        CHECK(sys.coefficient(t)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    }
    p.alpha = 0.7;
    CHECK_THROWS_AS(make_scalar_test(ScalarKind::cosine_counterexample, p), ConfigError);
}

TEST_CASE("smooth decay averages to -1 over a period")
{
    auto sys = make_scalar_test(ScalarKind::smooth_decay);
    // composite Simpson
    const int n = 2000;
    const double L = 2 * std::numbers::pi;
    double acc = 0;
    for (int k = 0; k <= n; ++k)
    {
        double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
        acc += w * sys.coefficient(L * k / n)(0, 0);
    }
    CHECK(acc * (L / n) / 3 / L == doctest::Approx(-1).epsilon(1e-12));
}

TEST_CASE("compost initial state and rhs")
{
    CompostParams p;
    auto sys = make_compost_bomb(p);
    CHECK(sys.x0 == Vec{8.15, 50.0, 0.0});

    double y = p.alpha * 8.15;
    double poly = 0;
    double term = 1;
    for (int k = 0; k <= 6; ++k)
    {
        poly += term;
        term *= y / (k + 1);
    }
    CHECK(exp_taylor(y, 6) == doctest::Approx(poly).epsilon(1e-15));

    Vec f = sys.f(0, sys.x0);
    double heat = 50.0 * p.r * poly;
    CHECK(f[1] == doctest::Approx(p.pi_in - heat).epsilon(1e-13));
    double tdot = (heat - p.lambda / p.area * (8.15 - 0.0)) / p.eps;
    CHECK(f[0] == doctest::Approx(tdot).scale(1.0).epsilon(1e-12));
    CHECK(f[2] == p.nu);

    Mat jac = sys.jacobian(0, sys.x0);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(jac(2, j) == 0.0);

    CHECK_THROWS_AS(make_compost_bomb({.nu = 0}), ConfigError);
}

TEST_CASE("vdp rhs and jacobian")
{
    auto sys = make_vdp(100, 1, 1);
    CHECK(sys.x0 == Vec{0, 2});
    Vec f = sys.f(0, sys.x0);
    CHECK(f[0] == doctest::Approx(200));
    CHECK(f[1] == 0.0);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k)
    {
        Vec x = random_state(rng, uniform_box(2, -3, 3));
        CHECK(rel_diff(fd_jacobian(sys, 0.3 * k, x), sys.jacobian(0.3 * k, x)) < 1e-6);
    }
}

TEST_CASE("fhn annihilates constants")
{
    FhnParams p;
    auto sys = make_fhn(p);
    REQUIRE(sys.dim == 30);
    for (double c : {-1.3, 0.0, 0.4, 2.0})
    {
        Vec x(30);
        for (std::size_t j = 0; j < 15; ++j)
            x[j] = c;
        Vec f = sys.f(0, x);
        double phi = -2 * c * c * c + 6 * c;
        for (std::size_t j = 0; j < 15; ++j)
            CHECK(f[j] == doctest::Approx(phi).epsilon(1e-12).scale(1));
    }
}

TEST_CASE("fhn initial condition and interior jacobian row")
{
    FhnParams p;
    auto sys = make_fhn(p);
    const double dx = 1.0 / p.J;
    for (int j = 0; j <= p.J; ++j)
    {
        CHECK(sys.x0[j] == doctest::Approx(std::sin(0.5 * std::numbers::pi * j * dx)));
        CHECK(sys.x0[15 + j] == doctest::Approx(std::cos(0.5 * std::numbers::pi * j * dx)));
    }
    Mat jac = sys.jacobian(0, sys.x0);
    const double diff = p.alpha / (dx * dx);
    for (std::size_t j = 1; j < 14; ++j)
    {
        double u = sys.x0[j];
        CHECK(jac(j, j - 1) == doctest::Approx(diff));
        CHECK(jac(j, j + 1) == doctest::Approx(diff));
        CHECK(jac(j, j) == doctest::Approx(-6 * u * u + 6 - 2 * diff));
        CHECK(jac(j, 15 + j) == -1.0);
    }
    CHECK_THROWS_AS(make_fhn({.J = 1}), ConfigError);
}

TEST_CASE("analytic and difference jacobians agree at random states")
{
    std::mt19937_64 rng(2024);
    struct Case
    {
        OdeSystem sys;
        std::vector<std::pair<double, double>> box;
    };
    std::vector<Case> cases{
        {make_2dlin(), uniform_box(2, -5, 5)},
        {make_scalar_test(ScalarKind::smooth_decay), uniform_box(1, -2, 2)},
        {make_compost_bomb(), {{0, 30}, {0, 100}, {0, 10}}},
        {make_compost_bomb({.nu = 0.3}), {{0, 30}, {0, 100}, {0, 10}}},
        {make_vdp(), uniform_box(2, -3, 3)},
        {make_fhn(), uniform_box(30, -2, 2)},
    };
    for (auto& c : cases)
    {
        CAPTURE(c.sys.name);
        for (int k = 0; k < 20; ++k)
        {
            Vec x = random_state(rng, c.box);
            double t = 0.37 * k;
            Mat analytic = c.sys.jacobian(t, x);
            CHECK(rel_diff(central_jacobian(c.sys, t, x), analytic) < 1e-5);
            CHECK(rel_diff(fd_jacobian(c.sys, t, x), analytic) < 1e-5);
        }
    }
}

TEST_CASE("fd jacobian examples")
{
    OdeSystem lin;
    lin.dim = 3;
    Mat m{{1, -2, 0.5}, {3, 4, -1}, {0, 0.25, 7}};
    lin.rhs = [m](double, const Vec& x) { return m * x; };
    CHECK(rel_diff(fd_jacobian(lin, 0, Vec{1, 2, 3}), m) < 1e-7);

    OdeSystem zero;
    zero.dim = 2;
    zero.rhs = [](double, const Vec&) { return Vec(2); };
    CHECK(max_abs(fd_jacobian(zero, 0, Vec{1, 1})) == 0.0);

    auto compost = make_compost_bomb();
    Mat analytic = compost.jacobian(0, compost.x0);
    CHECK(rel_diff(fd_jacobian(compost, 0, compost.x0), analytic) < 1e-5);

    auto fd = with_fd_jacobian(compost);
    CHECK(fd.jac_kind == JacobianKind::finite_difference);
    CHECK(rel_diff(fd.jacobian(0, compost.x0), analytic) < 1e-5);
}

TEST_CASE("make_problem by id")
{
    for (const auto& id : problem_ids())
    {
        auto sys = make_problem(id);
        CHECK(sys.name == id);
        CHECK(sys.x0.size() == sys.dim);
        CHECK(sys.f(0, sys.x0).size() == sys.dim);
    }
    auto c = make_problem("compost", {{"nu", 0.3}});
    CHECK(c.params.at("nu") == 0.3);
    CHECK(make_problem("fhn", {{"J", 6}}).dim == 14);
    CHECK_THROWS_AS(make_problem("compost", {{"mu", 1}}), ConfigError);
    CHECK_THROWS_AS(make_problem("lorenz"), ConfigError);
}

TEST_CASE("constructors are deterministic")
{
    auto a = make_problem("fhn");
    auto b = make_problem("fhn");
    CHECK(a.x0 == b.x0);
    CHECK(a.f(1.5, a.x0) == b.f(1.5, b.x0));
}

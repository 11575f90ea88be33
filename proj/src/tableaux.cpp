//---------------------------------------------------------------------------//
//! \file tableaux.cpp
//---------------------------------------------------------------------------//
#include "qrstab/tableaux.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

namespace qrstab
{
namespace
{
constexpr double q(double num, double den)
{
    return num / den;
}

ButcherTableau make(std::string name,
                    Mat a,
                    Vec b,
                    Vec b_hat,
                    Vec c,
                    int order,
                    int embedded_order,
                    SchemeClass cls)
{
    ButcherTableau tab;
    tab.name = std::move(name);
    tab.stages = b.size();
    tab.a = std::move(a);
    tab.b = std::move(b);
    tab.b_hat = std::move(b_hat);
    tab.c = std::move(c);
    tab.order = order;
    tab.embedded_order = embedded_order;
    tab.scheme_class = cls;
    return tab;
}

ButcherTableau heun_euler()
{
    return make("HEU-2-2-1",
                {{0, 0}, {1, 0}},
                {0.5, 0.5},
                {1, 0},
                {0, 1},
                2,
                1,
                SchemeClass::explicit_rk);
}

ButcherTableau sdirk221()
{
    return make("SDIRK-2-2-1",
                {{1, 0}, {-1, 1}},
                {0.5, 0.5},
                {1, 0},
                {1, 0},
                2,
                1,
                SchemeClass::dirk);
}

ButcherTableau dormand_prince()
{
    Mat a(7, 7);
    a(1, 0) = q(1, 5);
    a(2, 0) = q(3, 40);
    a(2, 1) = q(9, 40);
    a(3, 0) = q(44, 45);
    a(3, 1) = q(-56, 15);
    a(3, 2) = q(32, 9);
    a(4, 0) = q(19372, 6561);
    a(4, 1) = q(-25360, 2187);
    a(4, 2) = q(64448, 6561);
    a(4, 3) = q(-212, 729);
    a(5, 0) = q(9017, 3168);
    a(5, 1) = q(-355, 33);
    a(5, 2) = q(46732, 5247);
    a(5, 3) = q(49, 176);
    a(5, 4) = q(-5103, 18656);
    a(6, 0) = q(35, 384);
    a(6, 1) = 0;
    a(6, 2) = q(500, 1113);
    a(6, 3) = q(125, 192);
    a(6, 4) = q(-2187, 6784);
    a(6, 5) = q(11, 84);
    Vec b{q(35, 384), 0, q(500, 1113), q(125, 192), q(-2187, 6784), q(11, 84), 0};
    Vec b_hat{q(5179, 57600),
              0,
              q(7571, 16695),
              q(393, 640),
              q(-92097, 339200),
              q(187, 2100),
              q(1, 40)};
    Vec c{0, q(1, 5), q(3, 10), q(4, 5), q(8, 9), 1, 1};
    return make("DP-7-5-4", a, b, b_hat, c, 5, 4, SchemeClass::explicit_rk);
}

ButcherTableau bogacki_shampine()
{
    return make("BS-4-2-3",
                {{0, 0, 0, 0},
                 {q(1, 2), 0, 0, 0},
                 {0, q(3, 4), 0, 0},
                 {q(2, 9), q(1, 3), q(4, 9), 0}},
                {q(2, 9), q(1, 3), q(4, 9), 0},
                {q(7, 24), q(1, 4), q(1, 3), q(1, 8)},
                {0, q(1, 2), q(3, 4), 1},
                3,
                2,
                SchemeClass::explicit_rk);
}

// a31 = -23/183 (not -23/108) and b/b_hat ordered so that the row-sum and
// order-3 conditions hold exactly.
ButcherTableau sdirk323()
{
    const double g = q(5, 6);
    return make("SDIRK-3-2-3",
                {{g, 0, 0}, {q(-61, 108), g, 0}, {q(-23, 183), q(-33, 61), g}},
                {q(26, 61), q(324, 671), q(1, 11)},
                {q(25, 61), q(36, 61), 0},
                {g, q(29, 108), q(1, 6)},
                3,
                2,
                SchemeClass::dirk);
}

ButcherTableau sdirk423()
{
    return make("SDIRK-4-2-3",
                {{q(1, 4), 0, 0, 0},
                 {q(1, 7), q(1, 4), 0, 0},
                 {q(61, 144), q(-49, 144), q(1, 4), 0},
                 {0, 0, q(3, 4), q(1, 4)}},
                {0, 0, q(3, 4), q(1, 4)},
                {q(-61, 600), q(49, 600), q(79, 100), q(23, 100)},
                {q(1, 4), q(11, 28), q(1, 3), 1},
                3,
                2,
                SchemeClass::dirk);
}

ButcherTableau esdirk423()
{
    const double g = q(1767732205903.0, 4055673282236.0);
    const double a31 = q(2746238789719.0, 10658868560708.0);
    const double a32 = q(-640167445237.0, 6845629431997.0);
    const double b1 = q(1471266399579.0, 7840856788654.0);
    const double b2 = q(-4482444167858.0, 7529755066697.0);
    const double b3 = q(11266239266428.0, 11593286722821.0);
    return make("ESDIRK-4-2-3",
                {{0, 0, 0, 0}, {g, g, 0, 0}, {a31, a32, g, 0}, {b1, b2, b3, g}},
                {b1, b2, b3, g},
                {q(2756255671327.0, 12835298489170.0),
                 q(-10771552573575.0, 22201958757719.0),
                 q(9247589265047.0, 10645013368117.0),
                 q(2193209047091.0, 5459859503100.0)},
                {0, q(1767732205903.0, 2027836641118.0), q(3, 5), 1},
                3,
                2,
                SchemeClass::dirk);
}

} // namespace

const std::vector<std::string>& builtin_names()
{
    static const std::vector<std::string> names{"HEU-2-2-1",
                                                "SDIRK-2-2-1",
                                                "DP-7-5-4",
                                                "BS-4-2-3",
                                                "SDIRK-3-2-3",
                                                "SDIRK-4-2-3",
                                                "ESDIRK-4-2-3"};
    return names;
}

ButcherTableau builtin(std::string_view name)
{
    if (name == "HEU-2-2-1")
        return heun_euler();
    if (name == "SDIRK-2-2-1")
        return sdirk221();
    if (name == "DP-7-5-4")
        return dormand_prince();
    if (name == "BS-4-2-3")
        return bogacki_shampine();
    if (name == "SDIRK-3-2-3")
        return sdirk323();
    if (name == "SDIRK-4-2-3")
        return sdirk423();
    if (name == "ESDIRK-4-2-3")
        return esdirk423();
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

ButcherTableau implicit_euler()
{
    return make("IE-1-1-0", Mat::identity(1), Vec{1.0}, Vec{1.0}, Vec{1.0}, 1, 0, SchemeClass::dirk);
}

ButcherTableau find_tableau(std::string_view name)
{
    if (name == "IE-1-1-0")
        return implicit_euler();
    return builtin(name);
}

std::uint64_t tableau_digest(const ButcherTableau& tab)
{
    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&hash](double x) {
        auto bits = std::bit_cast<std::uint64_t>(x == 0 ? 0.0 : x);
        for (int k = 0; k < 8; ++k)
        {
            hash ^= (bits >> (8 * k)) & 0xffu;
            hash *= 1099511628211ull;
        }
    };
    for (double x : tab.a.span())
        mix(x);
    for (double x : tab.b)
        mix(x);
    for (double x : tab.b_hat)
        mix(x);
    for (double x : tab.c)
        mix(x);
    return hash;
}

//---------------------------------------------------------------------------//

double abs(ComplexScalar z)
{
    return std::hypot(z.re, z.im);
}

ComplexScalar stability_function(const ButcherTableau& tab,
                                  ComplexScalar z,
                                  WeightRow row)
{
    const std::size_t s = tab.stages;
    const Vec& w = row == WeightRow::primary ? tab.b : tab.b_hat;

    // (I - zA) k = 1 with k = kr + i ki:
    //   [I - xA   yA ] [kr]   [1]
    //   [ -yA   I - xA] [ki] = [0]
    Mat m(2 * s, 2 * s);
    for (std::size_t i = 0; i < s; ++i)
    {
        for (std::size_t j = 0; j < s; ++j)
        {
            double delta = i == j ? 1.0 : 0.0;
            double aij = tab.a(i, j);
            m(i, j) = delta - z.re * aij;
            m(i, j + s) = z.im * aij;
            m(i + s, j) = -z.im * aij;
            m(i + s, j + s) = delta - z.re * aij;
        }
    }
    Vec rhs(2 * s);
    for (std::size_t i = 0; i < s; ++i)
        rhs[i] = 1;

    Vec k;
    try
    {
        k = solve(m, rhs);
    }
    catch (const SingularMatrixError&)
    {
        throw PoleError("stability function of " + tab.name
                        + " has a pole at the requested z");
    }

    double sr = 0;
    double si = 0;
    for (std::size_t i = 0; i < s; ++i)
    {
        sr += w[i] * k[i];
        si += w[i] * k[i + s];
    }
    // 1 + z * (sr + i si)
    return {1 + z.re * sr - z.im * si, z.re * si + z.im * sr};
}

bool in_restricted_region(const ButcherTableau& tab, ComplexScalar z, double eps)
{
    if (!(eps > 0 && eps < 1))
        throw ConfigError("in_restricted_region: eps must lie in (0, 1)");
    return abs(stability_function(tab, z)) <= 1 - eps;
}

} // namespace qrstab

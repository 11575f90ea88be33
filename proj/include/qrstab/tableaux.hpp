//---------------------------------------------------------------------------//
//! \file tableaux.hpp
//! Butcher tableaux, stability functions, restricted stability regions.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qrstab/linalg.hpp"

namespace qrstab
{
//---------------------------------------------------------------------------//
enum class SchemeClass
{
    explicit_rk,
    dirk,
};

/*!
 * Runge-Kutta coefficients with an embedded weight row.
 *
 * The row `b` advances the solution (order p); `b_hat` is only used for the
 * local error estimate (order p_hat). Tableaux without an embedding carry
 * b_hat == b and p_hat == 0 and are usable only with fixed steps.
 */
struct ButcherTableau
{
    std::string name;
    std::size_t stages = 0;
    Mat a;
    Vec b;
    Vec b_hat;
    Vec c;
    int order = 0;
    int embedded_order = 0;
    SchemeClass scheme_class = SchemeClass::explicit_rk;

    bool is_explicit() const { return scheme_class == SchemeClass::explicit_rk; }
    bool has_embedding() const { return embedded_order > 0; }
};

//! Names accepted by builtin()
const std::vector<std::string>& builtin_names();

//! One of the seven builtin methods; throws ConfigError for unknown names
ButcherTableau builtin(std::string_view name);

//! Backward Euler, "IE-1-1-0": no embedded estimate
ButcherTableau implicit_euler();

//! builtin() plus implicit_euler() under its name
ButcherTableau find_tableau(std::string_view name);

//! FNV-1a digest over the coefficient bit patterns (guards transcription)
std::uint64_t tableau_digest(const ButcherTableau& tab);

//---------------------------------------------------------------------------//
//! Complex number as an explicit real pair
struct ComplexScalar
{
    double re = 0;
    double im = 0;
};

double abs(ComplexScalar z);

enum class WeightRow
{
    primary,
    embedded,
};

/*!
 * Linear stability function Psi(z) = 1 + z b^T (I - zA)^{-1} 1.
 *
 * The complex solve is carried out as a real 2v x 2v system. Throws
 * PoleError when I - zA is singular.
 */
ComplexScalar stability_function(const ButcherTableau& tab,
                                  ComplexScalar z,
                                  WeightRow row = WeightRow::primary);

//! True iff |Psi(z)| <= 1 - eps
bool in_restricted_region(const ButcherTableau& tab, ComplexScalar z, double eps);

//---------------------------------------------------------------------------//
} // namespace qrstab

//---------------------------------------------------------------------------//
//! \file cli.hpp
//! Command-line front end: run specifications, subcommands, CSV output.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qrstab/imex.hpp"
#include "qrstab/problems.hpp"

namespace qrstab
{
//---------------------------------------------------------------------------//
/*!
 * Everything a subcommand needs. Unset optionals fall back to per-command
 * defaults.
 */
struct RunSpec
{
    std::string problem = "scalar";
    ParamMap params;
    std::optional<std::string> tab;
    std::optional<std::string> explicit_tab;
    std::optional<std::string> implicit_tab;

    std::optional<double> atol;
    std::optional<double> rtol;
    std::optional<double> t0;
    std::optional<double> t_end;
    std::optional<double> h0;
    std::optional<double> h_max;
    std::optional<double> fixed_h;
    std::optional<JacobianKind> jac;

    std::optional<std::size_t> w;
    std::optional<double> window;
    std::optional<std::uint64_t> seed;

    std::optional<double> d1;
    std::optional<double> d2;
    std::optional<double> H0;
    std::optional<Calibration> calibration;
    std::optional<ThresholdMode> threshold_mode;

    std::string out;
    std::string plot;
    bool quick = false;

    std::string table;
    std::vector<double> tols;
};

//! Parse a JSON document; unknown keys throw ConfigError
RunSpec runspec_from_json(const std::string& text);

//! Parse "key=value" with a numeric value
std::pair<std::string, double> parse_param(const std::string& text);

//! printf("%.12e")
std::string format_real(double value);

//---------------------------------------------------------------------------//
// SUBCOMMANDS (return the process exit status)
//---------------------------------------------------------------------------//

int cmd_solve(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_stiffness(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_imex_bench(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_spectra(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_tableaux_dump(const RunSpec& spec, std::ostream& out, std::ostream& err);

//! Parse argv and dispatch; 0 ok, 1 usage, 2 numerical failure
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

//---------------------------------------------------------------------------//
// BENCH
//---------------------------------------------------------------------------//

struct BenchRow
{
    std::string method;
    double tol = 0;
    double H0 = 0;
    Stats stats;
};

//! Header line of the bench CSV
std::string bench_header();
std::string bench_row(const BenchRow& row);

/*!
 * Run the compost (Mcpb1-3) or fhn (Mfhn1-4) protocol for each tolerance.
 *
 * Cells run on up to `threads` workers; rows come back in (tol, method)
 * order. Rows finished before a failure are returned through `partial` when
 * an exception propagates.
 */
std::vector<BenchRow> run_bench(const RunSpec& spec,
                                std::size_t threads,
                                std::vector<BenchRow>* partial = nullptr);

//---------------------------------------------------------------------------//
} // namespace qrstab

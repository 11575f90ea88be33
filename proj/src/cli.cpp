//---------------------------------------------------------------------------//
//! \file cli.cpp
//---------------------------------------------------------------------------//
#include "qrstab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrstab/spectral.hpp"

namespace qrstab
{
namespace
{
using json = nlohmann::json;

JacobianKind parse_jac(const std::string& s)
{
    if (s == "analytic")
        return JacobianKind::analytic;
    if (s == "fd")
        return JacobianKind::finite_difference;
    throw ConfigError("jac must be 'analytic' or 'fd', not '" + s + "'");
}

ThresholdMode parse_threshold_mode(const std::string& s)
{
    if (s == "divide")
        return ThresholdMode::divide;
    if (s == "multiply")
        return ThresholdMode::multiply;
    throw ConfigError("threshold mode must be 'divide' or 'multiply'");
}

template<class T>
T get_as(const json& j, const char* key)
{
    try
    {
        return j.get<T>();
    }
    catch (const json::exception&)
    {
        throw ConfigError(std::string("bad value for '") + key + "'");
    }
}

//---------------------------------------------------------------------------//
// Output helpers
//---------------------------------------------------------------------------//

class OutputTarget
{
  public:
    OutputTarget(const std::string& path, std::ostream& fallback)
    {
        if (path.empty() || path == "-")
        {
            stream_ = &fallback;
        }
        else
        {
            file_.open(path);
            if (!file_)
                throw ConfigError("cannot open '" + path + "' for writing");
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

  private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

double resolve_t_end(const RunSpec& spec, double fallback)
{
    double t0 = spec.t0.value_or(0.0);
    double t_end = spec.t_end.value_or(fallback);
    if (spec.quick)
        t_end = t0 + (t_end - t0) / 10;
    return t_end;
}

StepperConfig stepper_from(const RunSpec& spec, double h0, double h_max)
{
    StepperConfig cfg;
    cfg.atol = spec.atol.value_or(1e-6);
    cfg.rtol = spec.rtol.value_or(cfg.atol);
    cfg.h0 = spec.h0.value_or(h0);
    cfg.h_max = spec.h_max.value_or(h_max);
    cfg.jac_mode = spec.jac.value_or(JacobianKind::analytic);
    cfg.fixed_step = spec.fixed_h;
    if (cfg.fixed_step)
        cfg.h_max = std::max(cfg.h_max, *cfg.fixed_step);
    cfg.h0 = std::min(cfg.h0, cfg.h_max);
    return cfg;
}

OdeSystem system_from(const RunSpec& spec)
{
    OdeSystem sys = make_problem(spec.problem, spec.params);
    if (spec.jac == JacobianKind::finite_difference)
        sys = with_fd_jacobian(std::move(sys));
    return sys;
}

bool is_pair(const RunSpec& spec)
{
    if (spec.tab && (spec.explicit_tab || spec.implicit_tab))
        throw ConfigError("give either --tab or --explicit/--implicit, not both");
    if (spec.explicit_tab.has_value() != spec.implicit_tab.has_value())
        throw ConfigError("--explicit and --implicit must be given together");
    if (!spec.tab && !spec.explicit_tab)
        throw ConfigError("no method given (use --tab or --explicit/--implicit)");
    return spec.explicit_tab.has_value();
}

ImexConfig imex_from(const RunSpec& spec, const StepperConfig& sc, double t0)
{
    ImexConfig cfg;
    cfg.explicit_tab = builtin(*spec.explicit_tab);
    cfg.implicit_tab = builtin(*spec.implicit_tab);
    cfg.d1 = spec.d1.value_or(-2.0);
    cfg.d2 = spec.d2.value_or(2.0);
    cfg.H0 = spec.H0;
    cfg.calibration = spec.calibration;
    if (!cfg.H0 && !cfg.calibration)
        throw ConfigError("IMEX runs need --H0 or a calibration interval");
    if (cfg.H0)
        cfg.calibration.reset();
    if (cfg.calibration && spec.quick)
    {
        cfg.calibration->interval_start = t0 + (cfg.calibration->interval_start - t0) / 10;
        cfg.calibration->interval_end = t0 + (cfg.calibration->interval_end - t0) / 10;
    }
    cfg.w = spec.w.value_or(1);
    cfg.stepper = sc;
    cfg.threshold_mode = spec.threshold_mode.value_or(ThresholdMode::divide);
    cfg.seed = spec.seed;
    return cfg;
}

struct Run
{
    Trajectory traj;
    Stats stats;
    std::optional<SpectralTrace> trace;
    double H0 = 0;
};

Run run_spec(const RunSpec& spec, const OdeSystem& sys, double t0, double t_end)
{
    StepperConfig sc = stepper_from(spec, 1e-2, 1.0);
    Run run;
    if (is_pair(spec))
    {
        ImexResult r = imex_integrate(sys, imex_from(spec, sc, t0), t0, sys.x0, t_end);
        run.traj = std::move(r.traj);
        run.stats = r.stats;
        run.trace = std::move(r.trace);
        run.H0 = r.H0;
    }
    else
    {
        Solution s = integrate(sys, find_tableau(*spec.tab), sc, t0, sys.x0, t_end);
        run.traj = std::move(s.traj);
        run.stats = s.stats;
    }
    return run;
}

void print_stats(std::ostream& err, const Stats& s)
{
    err << "accepted " << s.nsteps_accepted << " rejected " << s.nsteps_rejected
        << " nexp " << s.nexp << " nimp " << s.nimp << " feval " << s.feval
        << " jaceval " << s.jaceval << " lsol " << s.lsol << " h_mean "
        << format_real(s.h_mean) << '\n';
}

char scheme_letter(SchemeTag tag)
{
    return static_cast<char>(tag);
}

} // namespace

//---------------------------------------------------------------------------//
std::string format_real(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12e", value);
    return buf;
}

std::pair<std::string, double> parse_param(const std::string& text)
{
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("parameter '" + text + "' is not of the form key=value");
    std::string key = text.substr(0, eq);
    std::string value = text.substr(eq + 1);
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0')
        throw ConfigError("parameter '" + key + "' has a non-numeric value");
    return {key, v};
}

RunSpec runspec_from_json(const std::string& text)
{
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("run specification must be a JSON object");

    RunSpec spec;
    for (const auto& [key, value] : doc.items())
    {
        const char* k = key.c_str();
        if (key == "problem")
            spec.problem = get_as<std::string>(value, k);
        else if (key == "params")
        {
            if (!value.is_object())
                throw ConfigError("'params' must be an object");
            for (const auto& [pk, pv] : value.items())
                spec.params[pk] = get_as<double>(pv, pk.c_str());
        }
        else if (key == "tab")
            spec.tab = get_as<std::string>(value, k);
        else if (key == "explicit")
            spec.explicit_tab = get_as<std::string>(value, k);
        else if (key == "implicit")
            spec.implicit_tab = get_as<std::string>(value, k);
        else if (key == "tol")
            spec.atol = spec.rtol = get_as<double>(value, k);
        else if (key == "atol")
            spec.atol = get_as<double>(value, k);
        else if (key == "rtol")
            spec.rtol = get_as<double>(value, k);
        else if (key == "t0")
            spec.t0 = get_as<double>(value, k);
        else if (key == "t_end")
            spec.t_end = get_as<double>(value, k);
        else if (key == "h0")
            spec.h0 = get_as<double>(value, k);
        else if (key == "h_max")
            spec.h_max = get_as<double>(value, k);
        else if (key == "fixed_h")
            spec.fixed_h = get_as<double>(value, k);
        else if (key == "jac")
            spec.jac = parse_jac(get_as<std::string>(value, k));
        else if (key == "w")
            spec.w = get_as<std::size_t>(value, k);
        else if (key == "window")
            spec.window = get_as<double>(value, k);
        else if (key == "seed")
            spec.seed = get_as<std::uint64_t>(value, k);
        else if (key == "d1")
            spec.d1 = get_as<double>(value, k);
        else if (key == "d2")
            spec.d2 = get_as<double>(value, k);
        else if (key == "H0")
            spec.H0 = get_as<double>(value, k);
        else if (key == "calibration")
        {
            if (!value.is_object())
                throw ConfigError("'calibration' must be an object");
            Calibration cal;
            for (const auto& [ck, cv] : value.items())
            {
                if (ck == "start")
                    cal.interval_start = get_as<double>(cv, "calibration.start");
                else if (ck == "end")
                    cal.interval_end = get_as<double>(cv, "calibration.end");
                else if (ck == "alpha")
                    cal.alpha = get_as<double>(cv, "calibration.alpha");
                else
                    throw ConfigError("unknown key 'calibration." + ck + "'");
            }
            spec.calibration = cal;
        }
        else if (key == "threshold_mode")
            spec.threshold_mode = parse_threshold_mode(get_as<std::string>(value, k));
        else if (key == "out")
            spec.out = get_as<std::string>(value, k);
        else if (key == "plot")
            spec.plot = get_as<std::string>(value, k);
        else if (key == "quick")
            spec.quick = get_as<bool>(value, k);
        else if (key == "table")
            spec.table = get_as<std::string>(value, k);
        else if (key == "tols")
            spec.tols = get_as<std::vector<double>>(value, k);
        else
            throw ConfigError("unknown key '" + key + "'");
    }
    return spec;
}

//---------------------------------------------------------------------------//
int cmd_solve(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    OdeSystem sys = system_from(spec);
    const double t0 = spec.t0.value_or(0.0);
    Run run = run_spec(spec, sys, t0, resolve_t_end(spec, 1.0));

    OutputTarget target(spec.out, out);
    std::ostream& os = target.get();
    os << "t";
    for (std::size_t i = 0; i < sys.dim; ++i)
        os << ",x_" << i;
    os << ",h,scheme\n";
    const Trajectory& traj = run.traj;
    for (std::size_t n = 0; n < traj.times.size(); ++n)
    {
        os << format_real(traj.times[n]);
        for (std::size_t i = 0; i < sys.dim; ++i)
            os << ',' << format_real(traj.states[n][i]);
        if (n == 0)
            os << ',' << format_real(0.0) << ",-\n";
        else
            os << ',' << format_real(traj.step_sizes[n - 1]) << ','
               << scheme_letter(traj.method_used[n - 1]) << '\n';
    }
    print_stats(err, run.stats);
    return 0;
}

//---------------------------------------------------------------------------//
namespace
{
std::string plot_script(const std::string& csv)
{
    std::ostringstream os;
    os << "# gnuplot script for " << csv << "\n"
       << "set datafile separator ','\n"
       << "set key top left\n"
       << "set multiplot layout 3,1\n"
       << "set logscale y\n"
       << "plot '" << csv << "' using 1:7 every ::1 with lines title '|SI(n,w)|', \\\n"
       << "     '' using 1:6 every ::1 with lines title '|sigma[A(t_n)]|'\n"
       << "unset logscale y\n"
       << "plot '' using 1:8 every ::1 with lines title 'x_0'\n"
       << "set logscale y\n"
       << "plot '' using 1:2 every ::1 with lines title 'h'\n"
       << "unset multiplot\n";
    return os.str();
}
} // namespace

int cmd_stiffness(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    OdeSystem sys = system_from(spec);
    const double t0 = spec.t0.value_or(0.0);
    Run run = run_spec(spec, sys, t0, resolve_t_end(spec, 1.0));
    const std::size_t w = spec.w.value_or(1);
    const JacobianKind mode = spec.jac.value_or(JacobianKind::analytic);
    const Trajectory& traj = run.traj;

    SpectralTrace trace;
    if (run.trace)
    {
        trace = std::move(*run.trace);
    }
    else
    {
        trace = SpectralTrace::start(sys.dim, spec.seed);
        Stats scratch;
        for (std::size_t n = 0; n < traj.num_steps(); ++n)
        {
            sigma_pair(sys, mode, traj.times[n], traj.states[n], traj.states[n + 1],
                       traj.step_sizes[n], trace, scratch);
        }
    }
    std::vector<double> si = stiffness_SI_series(trace, w);

    OutputTarget target(spec.out, out);
    std::ostream& os = target.get();
    os << "t,h,sigma1,sigmad,SI_w,lognorm,abs_SI,x_0";
    if (run.trace)
        os << ",scheme";
    os << '\n';
    Stats scratch;
    for (std::size_t n = 0; n < trace.size(); ++n)
    {
        double lognorm = sigma_lognorm(
            evaluate_jacobian(sys, mode, traj.times[n], traj.states[n], scratch));
        os << format_real(trace.times[n]) << ',' << format_real(trace.steps[n])
           << ',' << format_real(trace.sigma1[n]) << ','
           << format_real(trace.sigmad[n]) << ',' << format_real(si[n]) << ','
           << format_real(lognorm) << ',' << format_real(std::fabs(si[n])) << ','
           << format_real(traj.states[n][0]);
        if (run.trace)
            os << ',' << scheme_letter(traj.method_used[n]);
        os << '\n';
    }

    std::string plot_path = spec.plot;
    if (plot_path.empty() && !spec.out.empty() && spec.out != "-")
        plot_path = spec.out + ".gp";
    if (!plot_path.empty())
    {
        std::ofstream gp(plot_path);
        if (!gp)
            throw ConfigError("cannot open '" + plot_path + "' for writing");
        gp << plot_script(spec.out.empty() ? "stiffness.csv" : spec.out);
    }
    print_stats(err, run.stats);
    return 0;
}

//---------------------------------------------------------------------------//
std::string bench_header()
{
    return "M,TOL,H0,h_mean,nexp,nimp,Feval,Jaceval,Lsol";
}

std::string bench_row(const BenchRow& row)
{
    std::ostringstream os;
    os << row.method << ',' << format_real(row.tol) << ',' << format_real(row.H0)
       << ',' << format_real(row.stats.h_mean) << ',' << row.stats.nexp << ','
       << row.stats.nimp << ',' << row.stats.feval << ',' << row.stats.jaceval
       << ',' << row.stats.lsol;
    return os.str();
}

namespace
{
struct BenchMethod
{
    std::string label;
    std::string explicit_name;  // empty: implicit only
    std::string implicit_name;  // empty: explicit only
};

struct BenchProtocol
{
    OdeSystem sys;
    double t_end = 0;
    ImexConfig imex;
    std::vector<BenchMethod> methods;
    std::vector<double> default_tols;
};

BenchProtocol bench_protocol(const RunSpec& spec)
{
    BenchProtocol p;
    StepperConfig sc;
    sc.h0 = spec.h0.value_or(0.05);
    sc.h_max = spec.h_max.value_or(0.5);
    Calibration cal;
    if (spec.table == "compost")
    {
        p.sys = make_problem("compost", spec.params);
        double nu = p.sys.params.at("nu");
        sc.jac_mode = spec.jac.value_or(JacobianKind::finite_difference);
        p.t_end = spec.t_end.value_or(80.0);
        cal = {2.0, nu >= 0.2 ? 5.0 : 20.0, 0.1};
        p.imex.d1 = spec.d1.value_or(-2.0);
        p.imex.d2 = spec.d2.value_or(2.0);
        p.methods = {{"Mcpb1", "HEU-2-2-1", ""},
                     {"Mcpb2", "", "SDIRK-2-2-1"},
                     {"Mcpb3", "HEU-2-2-1", "SDIRK-2-2-1"}};
        p.default_tols = {1e-4, 1e-5, 1e-6};
    }
    else if (spec.table == "fhn")
    {
        p.sys = make_problem("fhn", spec.params);
        sc.jac_mode = spec.jac.value_or(JacobianKind::analytic);
        p.t_end = spec.t_end.value_or(200.0);
        cal = {2.0, 20.0, 0.5};
        p.imex.d1 = spec.d1.value_or(-3.5);
        p.imex.d2 = spec.d2.value_or(10.0);
        p.methods = {{"Mfhn1", "BS-4-2-3", ""},
                     {"Mfhn2", "BS-4-2-3", "ESDIRK-4-2-3"},
                     {"Mfhn3", "BS-4-2-3", "SDIRK-4-2-3"},
                     {"Mfhn4", "BS-4-2-3", "SDIRK-3-2-3"}};
        p.default_tols = {1e-4, 1e-6, 1e-8, 1e-10};
    }
    else
    {
        throw ConfigError("--table must be 'compost' or 'fhn'");
    }
    if (sc.jac_mode == JacobianKind::finite_difference)
        p.sys = with_fd_jacobian(std::move(p.sys));
    if (spec.calibration)
        cal = *spec.calibration;
    if (spec.quick)
    {
        p.t_end /= 10;
        cal.interval_start /= 10;
        cal.interval_end /= 10;
    }
    p.imex.stepper = sc;
    if (spec.H0)
        p.imex.H0 = spec.H0;
    else
        p.imex.calibration = cal;
    p.imex.threshold_mode = spec.threshold_mode.value_or(ThresholdMode::divide);
    p.imex.seed = spec.seed;
    return p;
}

BenchRow run_cell(const BenchProtocol& p, const BenchMethod& m, double tol)
{
    ImexConfig cfg = p.imex;
    cfg.stepper.atol = cfg.stepper.rtol = tol;
    // H0 is reported on every row and always comes from the table's
    // explicit method
    cfg.explicit_tab = builtin(p.methods.front().explicit_name);

    BenchRow row;
    row.method = m.label;
    row.tol = tol;
    const Vec& x0 = p.sys.x0;
    if (!m.explicit_name.empty() && !m.implicit_name.empty())
    {
        cfg.explicit_tab = builtin(m.explicit_name);
        cfg.implicit_tab = builtin(m.implicit_name);
        ImexResult r = imex_integrate(p.sys, cfg, 0.0, x0, p.t_end);
        row.H0 = r.H0;
        row.stats = r.stats;
    }
    else
    {
        row.H0 = cfg.H0 ? *cfg.H0 : calibrate_H0(p.sys, cfg, 0.0, x0);
        const std::string& name
            = m.explicit_name.empty() ? m.implicit_name : m.explicit_name;
        Solution s = integrate(p.sys, builtin(name), cfg.stepper, 0.0, x0, p.t_end);
        row.stats = s.stats;
    }
    return row;
}
} // namespace

std::vector<BenchRow> run_bench(const RunSpec& spec,
                                std::size_t threads,
                                std::vector<BenchRow>* partial)
{
    BenchProtocol p = bench_protocol(spec);
    std::vector<double> tols = spec.tols.empty() ? p.default_tols : spec.tols;
    for (double tol : tols)
    {
        if (!(tol > 0))
            throw ConfigError("tolerances must be positive");
    }

    struct Cell
    {
        std::size_t method;
        double tol;
    };
    std::vector<Cell> cells;
    for (double tol : tols)
    {
        for (std::size_t m = 0; m < p.methods.size(); ++m)
            cells.push_back({m, tol});
    }

    std::vector<std::optional<BenchRow>> rows(cells.size());
    std::vector<std::exception_ptr> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++)
        {
            try
            {
                rows[i] = run_cell(p, p.methods[cells[i].method], cells[i].tol);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::clamp<std::size_t>(threads, 1, cells.size());
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < threads; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();

    std::vector<BenchRow> result;
    std::exception_ptr first_error;
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
        if (rows[i])
            result.push_back(*rows[i]);
        else if (!first_error)
            first_error = errors[i];
    }
    if (first_error)
    {
        if (partial)
            *partial = result;
        std::rethrow_exception(first_error);
    }
    return result;
}

int cmd_imex_bench(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QRSTAB_THREADS"))
    {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (*env == '\0' || *end != '\0' || v < 1)
            throw ConfigError("QRSTAB_THREADS must be a positive integer");
        threads = static_cast<std::size_t>(v);
    }

    OutputTarget target(spec.out, out);
    std::ostream& os = target.get();
    std::vector<BenchRow> partial;
    try
    {
        std::vector<BenchRow> rows = run_bench(spec, threads, &partial);
        os << bench_header() << '\n';
        for (const auto& row : rows)
            os << bench_row(row) << '\n';
    }
    catch (const NumericalError&)
    {
        os << bench_header() << '\n';
        for (const auto& row : partial)
            os << bench_row(row) << '\n';
        os.flush();
        throw;
    }
    (void)err;
    return 0;
}

//---------------------------------------------------------------------------//
int cmd_spectra(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    OdeSystem sys = system_from(spec);
    const double t0 = spec.t0.value_or(0.0);
    const double t_end = resolve_t_end(spec, 100.0);
    const std::string name = spec.tab.value_or("DP-7-5-4");
    const ButcherTableau tab = find_tableau(name);

    QrDiagonalLog log;
    if (sys.linear && spec.fixed_h)
    {
        log = linear_qr_run(tab, sys, t0, t_end, *spec.fixed_h);
    }
    else
    {
        StepperConfig sc = stepper_from(spec, 1e-2, 1.0);
        Solution s = integrate(sys, tab, sc, t0, sys.x0, t_end);
        DiscreteQr run(Mat::identity(sys.dim), t0);
        const Trajectory& traj = s.traj;
        for (std::size_t n = 0; n < traj.num_steps(); ++n)
        {
            double h = traj.step_sizes[n];
            Mat phi = sys.linear ? method_propagator(tab, sys, traj.times[n], h)
                                 : variational_propagator(sys, traj.times[n],
                                                          traj.states[n],
                                                          traj.states[n + 1], h);
            run.push(phi, h);
        }
        log = run.release();
    }

    LyapunovEstimates lyap = lyapunov_estimates(log);
    const std::size_t d = sys.dim;
    out << "steps " << log.num_steps() << " t_end " << format_real(log.times.back())
        << '\n';
    for (std::size_t i = 0; i < d; ++i)
    {
        out << "lyapunov[" << i << "] final " << format_real(lyap.final[i])
            << " tail_min " << format_real(lyap.tail_min[i]) << " tail_max "
            << format_real(lyap.tail_max[i]) << '\n';
    }
    if (spec.window)
    {
        SackerSellEstimates ss = sackersell_estimates(log, *spec.window);
        for (std::size_t i = 0; i < d; ++i)
        {
            out << "sackersell[" << i << "] H " << format_real(*spec.window)
                << " alpha " << format_real(ss.alpha[i]) << " beta "
                << format_real(ss.beta[i]) << '\n';
        }
    }
    if (d >= 2 && log.num_steps() >= 10)
    {
        for (std::size_t i = 0; i + 1 < d; ++i)
        {
            IntegralSeparation sep = integral_separation_diag(log, i, i + 1);
            out << "separation[" << i << "," << i + 1 << "] "
                << (sep.separated ? "separated" : "not-separated") << " a "
                << format_real(sep.a) << " b " << format_real(sep.b) << '\n';
        }
    }

    if (!spec.out.empty())
    {
        std::ofstream csv(spec.out);
        if (!csv)
            throw ConfigError("cannot open '" + spec.out + "' for writing");
        csv << "t";
        for (std::size_t i = 0; i < d; ++i)
            csv << ",s_" << i;
        csv << '\n';
        for (std::size_t n = 0; n < lyap.series.size(); ++n)
        {
            csv << format_real(log.times[n + 1]);
            for (std::size_t i = 0; i < d; ++i)
                csv << ',' << format_real(lyap.series[n][i]);
            csv << '\n';
        }
    }
    (void)err;
    return 0;
}

//---------------------------------------------------------------------------//
int cmd_tableaux_dump(const RunSpec& spec, std::ostream& out, std::ostream&)
{
    std::vector<std::string> names = builtin_names();
    if (spec.tab)
        names = {*spec.tab};
    out << "name,kind,i,j,value\n";
    for (const auto& name : names)
    {
        ButcherTableau tab = find_tableau(name);
        auto line = [&](const char* kind, std::size_t i, std::size_t j, const std::string& v) {
            out << tab.name << ',' << kind << ',' << i << ',' << j << ',' << v << '\n';
        };
        line("order", 0, 0, std::to_string(tab.order));
        line("embedded_order", 0, 0, std::to_string(tab.embedded_order));
        line("class", 0, 0, tab.is_explicit() ? "explicit" : "dirk");
        char digest[32];
        std::snprintf(digest, sizeof(digest), "%016llx",
                      static_cast<unsigned long long>(tableau_digest(tab)));
        line("digest", 0, 0, digest);
        for (std::size_t i = 0; i < tab.stages; ++i)
        {
            for (std::size_t j = 0; j < tab.stages; ++j)
                line("a", i, j, format_real(tab.a(i, j)));
        }
        for (std::size_t i = 0; i < tab.stages; ++i)
            line("b", i, 0, format_real(tab.b[i]));
        for (std::size_t i = 0; i < tab.stages; ++i)
            line("b_hat", i, 0, format_real(tab.b_hat[i]));
        for (std::size_t i = 0; i < tab.stages; ++i)
            line("c", i, 0, format_real(tab.c[i]));
    }
    return 0;
}

//---------------------------------------------------------------------------//
namespace
{
using Override = std::function<void(RunSpec&)>;

void add_run_options(CLI::App* app, std::vector<Override>& ov, std::string& config)
{
    app->add_option("--config", config, "JSON run specification");
    app->add_option_function<std::string>(
        "--problem", [&ov](const std::string& v) { ov.push_back([v](RunSpec& s) { s.problem = v; }); },
        "problem id");
    app->add_option_function<std::vector<std::string>>(
        "--param",
        [&ov](const std::vector<std::string>& v) {
            for (const auto& item : v)
            {
                auto kv = parse_param(item);
                ov.push_back([kv](RunSpec& s) { s.params[kv.first] = kv.second; });
            }
        },
        "problem parameter key=value (repeatable)");
    auto str_opt = [&](const char* name, std::optional<std::string> RunSpec::*field,
                       const char* help) {
        app->add_option_function<std::string>(
            name, [&ov, field](const std::string& v) { ov.push_back([v, field](RunSpec& s) { s.*field = v; }); },
            help);
    };
    auto real_opt = [&](const char* name, std::optional<double> RunSpec::*field,
                        const char* help) {
        app->add_option_function<double>(
            name, [&ov, field](double v) { ov.push_back([v, field](RunSpec& s) { s.*field = v; }); },
            help);
    };
    str_opt("--tab", &RunSpec::tab, "single Runge-Kutta method");
    str_opt("--explicit", &RunSpec::explicit_tab, "explicit member of an IMEX pair");
    str_opt("--implicit", &RunSpec::implicit_tab, "implicit member of an IMEX pair");
    app->add_option_function<double>(
        "--tol", [&ov](double v) { ov.push_back([v](RunSpec& s) { s.atol = s.rtol = v; }); },
        "absolute and relative tolerance");
    real_opt("--atol", &RunSpec::atol, "absolute tolerance");
    real_opt("--rtol", &RunSpec::rtol, "relative tolerance");
    real_opt("--t0", &RunSpec::t0, "start time");
    real_opt("--tend", &RunSpec::t_end, "end time");
    real_opt("--h0", &RunSpec::h0, "initial step");
    real_opt("--h-max", &RunSpec::h_max, "maximum step");
    real_opt("--fixed-h", &RunSpec::fixed_h, "fixed step size (no step control)");
    app->add_option_function<std::string>(
        "--jac", [&ov](const std::string& v) { JacobianKind k = parse_jac(v); ov.push_back([k](RunSpec& s) { s.jac = k; }); },
        "analytic or fd");
    app->add_option_function<std::size_t>(
        "--w", [&ov](std::size_t v) { ov.push_back([v](RunSpec& s) { s.w = v; }); },
        "SI window count");
    real_opt("--window", &RunSpec::window, "Sacker-Sell window length H");
    app->add_option_function<std::uint64_t>(
        "--seed", [&ov](std::uint64_t v) { ov.push_back([v](RunSpec& s) { s.seed = v; }); },
        "randomize power-iteration start vectors");
    real_opt("--d1", &RunSpec::d1, "lower switching threshold");
    real_opt("--d2", &RunSpec::d2, "upper switching threshold");
    real_opt("--H0", &RunSpec::H0, "minimum tolerated step H0");
    app->add_option_function<std::vector<double>>(
        "--calibrate",
        [&ov](const std::vector<double>& v) {
            if (v.size() != 3)
                throw ConfigError("--calibrate takes START END ALPHA");
            Calibration c{v[0], v[1], v[2]};
            ov.push_back([c](RunSpec& s) { s.calibration = c; });
        },
        "H0 calibration interval and factor: START END ALPHA")
        ->expected(3);
    app->add_option_function<std::string>(
        "--threshold-mode",
        [&ov](const std::string& v) { ThresholdMode m = parse_threshold_mode(v); ov.push_back([m](RunSpec& s) { s.threshold_mode = m; }); },
        "divide (default) or multiply");
    app->add_option_function<std::string>(
        "--out", [&ov](const std::string& v) { ov.push_back([v](RunSpec& s) { s.out = v; }); },
        "output CSV path (default: standard output)");
    app->add_option_function<std::string>(
        "--plot", [&ov](const std::string& v) { ov.push_back([v](RunSpec& s) { s.plot = v; }); },
        "plot script path");
    app->add_flag_callback(
        "--quick", [&ov] { ov.push_back([](RunSpec& s) { s.quick = true; }); },
        "scale the time span down 10x");
}

RunSpec build_spec(const std::string& config, const std::vector<Override>& ov)
{
    RunSpec spec;
    if (!config.empty())
    {
        std::ifstream in(config);
        if (!in)
            throw ConfigError("cannot read config '" + config + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        spec = runspec_from_json(buf.str());
    }
    for (const auto& apply : ov)
        apply(spec);
    return spec;
}
} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"QR-based stiffness detection and explicit/implicit RK switching"};
    app.require_subcommand(1);

    std::vector<Override> ov;
    std::string config;

    auto* solve = app.add_subcommand("solve", "integrate and write the trajectory");
    auto* stiff = app.add_subcommand("stiffness", "stiffness indicator trace");
    auto* bench = app.add_subcommand("imex-bench", "IMEX benchmark table");
    auto* spectra = app.add_subcommand("spectra", "Lyapunov and Sacker-Sell estimates");
    auto* tabs = app.add_subcommand("tableaux", "Butcher tableaux");
    auto* dump = tabs->add_subcommand("dump", "print tableaux as CSV");
    tabs->require_subcommand(1);
    for (auto* sub : {solve, stiff, bench, spectra})
        add_run_options(sub, ov, config);
    dump->add_option_function<std::string>(
        "name", [&ov](const std::string& v) { ov.push_back([v](RunSpec& s) { s.tab = v; }); },
        "single tableau (default: all builtins)");

    std::string table;
    std::vector<double> tols;
    bench->add_option("--table", table, "compost or fhn")->required();
    bench->add_option("--tols", tols, "tolerance list")->delimiter(',');

    try
    {
        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp&)
        {
            out << app.help();
            return 0;
        }
        catch (const CLI::CallForAllHelp&)
        {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        }
        catch (const CLI::ParseError& e)
        {
            err << "error: " << e.what() << '\n';
            return 1;
        }

        RunSpec spec = build_spec(config, ov);
        if (bench->parsed())
        {
            spec.table = table;
            if (!tols.empty())
                spec.tols = tols;
        }

        if (solve->parsed())
            return cmd_solve(spec, out, err);
        if (stiff->parsed())
            return cmd_stiffness(spec, out, err);
        if (bench->parsed())
            return cmd_imex_bench(spec, out, err);
        if (spectra->parsed())
            return cmd_spectra(spec, out, err);
        if (dump->parsed())
            return cmd_tableaux_dump(spec, out, err);
        err << app.help();
        return 1;
    }
    catch (const NumericalError& e)
    {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    catch (const Error& e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace qrstab

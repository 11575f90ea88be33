//---------------------------------------------------------------------------//
//! \file spectral.cpp
//---------------------------------------------------------------------------//
#include "qrstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qrstab
{
//---------------------------------------------------------------------------//
Mat heun_propagator(const Mat& a0, const Mat& a1, double h)
{
    const std::size_t n = a0.rows();
    return Mat::identity(n) + (0.5 * h) * (a0 + a1 + h * (a1 * a0));
}

Mat heun_adjoint_propagator(const Mat& a0, const Mat& a1, double h)
{
    // B = -A^T, so B1 B0 = A1^T A0^T
    Mat b0 = -1.0 * a0.transpose();
    Mat b1 = -1.0 * a1.transpose();
    return heun_propagator(b0, b1, h);
}

Mat variational_propagator(const OdeSystem& sys,
                           double t,
                           const Vec& x,
                           const Vec& x_next,
                           double h)
{
    return heun_propagator(sys.jacobian(t, x), sys.jacobian(t + h, x_next), h);
}

Mat method_propagator(const ButcherTableau& tab,
                      const OdeSystem& sys,
                      double t,
                      double h)
{
    const std::size_t n = sys.dim;
    const std::size_t s = tab.stages;
    const Mat eye = Mat::identity(n);
    std::vector<Mat> ag(s);  // A_i G_i
    Mat phi = eye;
    for (std::size_t i = 0; i < s; ++i)
    {
        Mat ai = sys.coefficient(t + tab.c[i] * h);
        Mat rhs = eye;
        for (std::size_t j = 0; j < i; ++j)
        {
            if (tab.a(i, j) != 0)
                rhs = rhs + (h * tab.a(i, j)) * ag[j];
        }
        Mat gi = rhs;
        if (tab.a(i, i) != 0)
            gi = inverse(eye - (h * tab.a(i, i)) * ai) * rhs;
        ag[i] = ai * gi;
        if (tab.b[i] != 0)
            phi = phi + (h * tab.b[i]) * ag[i];
    }
    return phi;
}

//---------------------------------------------------------------------------//
PowerStep power_step(const Mat& phi, const Vec& q)
{
    Vec v = phi * q;
    double growth = norm2(v);
    if (!(growth >= 1e-300) || !std::isfinite(growth))
        throw ZeroVectorError("power iteration vector collapsed");
    return {(1 / growth) * v, growth};
}

SpectralTrace SpectralTrace::start(std::size_t dim, std::optional<std::uint64_t> seed)
{
    SpectralTrace trace;
    Vec q(dim, 1.0);
    Vec p(dim, 1.0);
    if (seed)
    {
        std::mt19937_64 rng(*seed);
        std::normal_distribution<double> normal;
        for (std::size_t i = 0; i < dim; ++i)
        {
            q[i] = normal(rng);
            p[i] = normal(rng);
        }
    }
    trace.q_fwd = (1 / norm2(q)) * q;
    trace.q_adj = (1 / norm2(p)) * p;
    return trace;
}

SigmaPair sigma_pair_from(const Mat& a0, const Mat& a1, double t, double h,
                          SpectralTrace& trace)
{
    PowerStep fwd = power_step(heun_propagator(a0, a1, h), trace.q_fwd);
    PowerStep adj = power_step(heun_adjoint_propagator(a0, a1, h), trace.q_adj);
    SigmaPair result{std::log(fwd.growth) / h, -std::log(adj.growth) / h};
    trace.q_fwd = std::move(fwd.q_next);
    trace.q_adj = std::move(adj.q_next);
    trace.times.push_back(t);
    trace.steps.push_back(h);
    trace.sigma1.push_back(result.sigma1);
    trace.sigmad.push_back(result.sigmad);
    return result;
}

SigmaPair sigma_pair(const OdeSystem& sys,
                     JacobianKind mode,
                     double t,
                     const Vec& x,
                     const Vec& x_next,
                     double h,
                     SpectralTrace& trace,
                     Stats& stats)
{
    Mat a0 = evaluate_jacobian(sys, mode, t, x, stats);
    Mat a1 = evaluate_jacobian(sys, mode, t + h, x_next, stats);
    return sigma_pair_from(a0, a1, t, h, trace);
}

//---------------------------------------------------------------------------//
namespace
{
double weighted_window(const SpectralTrace& trace, std::size_t lo, std::size_t hi)
{
    double sum = 0;
    double span = 0;
    for (std::size_t k = lo; k <= hi; ++k)
    {
        sum += (trace.sigma1[k] - trace.sigmad[k]) * trace.steps[k];
        span += trace.steps[k];
    }
    return sum / span;
}
} // namespace

double stiffness_SI(const SpectralTrace& trace, std::size_t n, std::size_t w)
{
    if (n < w || n + w >= trace.size())
    {
        throw OutOfWindowError("SI window " + std::to_string(w) + " around step "
                               + std::to_string(n) + " leaves the run of "
                               + std::to_string(trace.size()) + " steps");
    }
    return weighted_window(trace, n - w, n + w);
}

std::vector<double> stiffness_SI_series(const SpectralTrace& trace, std::size_t w)
{
    const std::size_t n = trace.size();
    std::vector<double> result(n);
    if (n == 0)
        return result;
    // running sums of (sigma1 - sigmad) h and h
    std::vector<double> num(n + 1, 0.0);
    std::vector<double> den(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k)
    {
        num[k + 1] = num[k] + (trace.sigma1[k] - trace.sigmad[k]) * trace.steps[k];
        den[k + 1] = den[k] + trace.steps[k];
    }
    for (std::size_t k = 0; k < n; ++k)
    {
        std::size_t lo = k >= w ? k - w : 0;
        std::size_t hi = std::min(n - 1, k + w);
        if (2 * w < 64)
        {
            result[k] = weighted_window(trace, lo, hi);
        }
        else
        {
            result[k] = (num[hi + 1] - num[lo]) / (den[hi + 1] - den[lo]);
        }
    }
    return result;
}

double sigma_lognorm(const Mat& a)
{
    EigExtremes ext = sym_eig_extremes(a);
    return std::max(0.0, ext.lam_max - ext.lam_min);
}

//---------------------------------------------------------------------------//
DiscreteQr::DiscreteQr(const Mat& q0, double t0)
{
    if (!q0.square())
        throw ConfigError("discrete QR needs a square starting matrix");
    log_.times.push_back(t0);
    log_.q = qr_positive(q0).q;
}

void DiscreteQr::push(const Mat& phi, double h)
{
    QrResult qr = qr_positive(phi * log_.q);
    const std::size_t n = qr.r.rows();
    Vec logs(n);
    for (std::size_t i = 0; i < n; ++i)
        logs[i] = std::log(qr.r(i, i));
    log_.log_r.push_back(std::move(logs));
    log_.times.push_back(log_.times.back() + h);
    log_.q = std::move(qr.q);
}

QrDiagonalLog discrete_qr_run(const std::vector<Mat>& phis,
                              const std::vector<double>& steps,
                              const Mat& q0,
                              double t0)
{
    if (phis.size() != steps.size())
        throw ConfigError("discrete_qr_run: one step size per matrix required");
    DiscreteQr run(q0, t0);
    for (std::size_t n = 0; n < phis.size(); ++n)
        run.push(phis[n], steps[n]);
    return run.release();
}

QrDiagonalLog linear_qr_run(const ButcherTableau& tab,
                            const OdeSystem& sys,
                            double t0,
                            double t_end,
                            double h)
{
    if (!sys.linear)
        throw ConfigError("linear_qr_run requires a linear system");
    if (!(h > 0 && t_end > t0))
        throw ConfigError("linear_qr_run: bad step or span");
    const auto nsteps
        = static_cast<std::size_t>(std::ceil((t_end - t0) / h - 1e-9));
    DiscreteQr run(Mat::identity(sys.dim), t0);
    for (std::size_t n = 0; n < nsteps; ++n)
    {
        double t = t0 + static_cast<double>(n) * h;
        double t_next = n + 1 == nsteps ? t_end : t0 + static_cast<double>(n + 1) * h;
        run.push(method_propagator(tab, sys, t, t_next - t), t_next - t);
    }
    return run.release();
}

//---------------------------------------------------------------------------//
LyapunovEstimates lyapunov_estimates(const QrDiagonalLog& log)
{
    const std::size_t steps = log.num_steps();
    if (steps < 2)
        throw RunTooShortError("Lyapunov estimates need at least 2 steps");
    const std::size_t d = log.log_r.front().size();
    const double t0 = log.times.front();

    LyapunovEstimates est;
    est.series.reserve(steps);
    Vec sum(d);
    for (std::size_t n = 0; n < steps; ++n)
    {
        sum = sum + log.log_r[n];
        est.series.push_back((1 / (log.times[n + 1] - t0)) * sum);
    }
    est.final = est.series.back();
    est.tail_min = Vec(d, std::numeric_limits<double>::infinity());
    est.tail_max = Vec(d, -std::numeric_limits<double>::infinity());
    for (std::size_t n = steps / 2; n < steps; ++n)
    {
        for (std::size_t i = 0; i < d; ++i)
        {
            est.tail_min[i] = std::min(est.tail_min[i], est.series[n][i]);
            est.tail_max[i] = std::max(est.tail_max[i], est.series[n][i]);
        }
    }
    return est;
}

SackerSellEstimates sackersell_estimates(const QrDiagonalLog& log, double window)
{
    if (!(window > 0))
        throw ConfigError("Sacker-Sell window must be positive");
    const std::size_t steps = log.num_steps();
    if (steps == 0 || log.times.back() - log.times.front() < 3 * window)
    {
        throw RunTooShortError("Sacker-Sell estimates need a run of at least 3H");
    }
    const std::size_t d = log.log_r.front().size();

    std::vector<Vec> prefix(steps + 1, Vec(d));
    for (std::size_t n = 0; n < steps; ++n)
        prefix[n + 1] = prefix[n] + log.log_r[n];

    SackerSellEstimates est;
    est.alpha = Vec(d, std::numeric_limits<double>::infinity());
    est.beta = Vec(d, -std::numeric_limits<double>::infinity());
    const double min_len = window * (1 - 1e-12);
    std::size_t end = 1;
    for (std::size_t start = 0; start < steps; ++start)
    {
        end = std::max(end, start + 1);
        while (end <= steps && log.times[end] - log.times[start] < min_len)
            ++end;
        if (end > steps)
            break;
        double len = log.times[end] - log.times[start];
        for (std::size_t i = 0; i < d; ++i)
        {
            double rate = (prefix[end][i] - prefix[start][i]) / len;
            est.alpha[i] = std::min(est.alpha[i], rate);
            est.beta[i] = std::max(est.beta[i], rate);
        }
    }
    return est;
}

IntegralSeparation integral_separation_diag(const QrDiagonalLog& log,
                                            std::size_t i,
                                            std::size_t j)
{
    const std::size_t steps = log.num_steps();
    if (!(i < j) || steps == 0 || j >= log.log_r.front().size())
        throw ConfigError("integral separation needs indices i < j < d");
    if (steps < 10)
        throw RunTooShortError("integral separation needs at least 10 steps");

    const std::size_t stride = std::max<std::size_t>(1, (steps + 1999) / 2000);
    std::vector<double> t;
    std::vector<double> s;
    double cum = 0;
    for (std::size_t n = 0; n <= steps; ++n)
    {
        if (n % stride == 0 || n == steps)
        {
            t.push_back(log.times[n]);
            s.push_back(cum);
        }
        if (n < steps)
            cum += log.log_r[n][i] - log.log_r[n][j];
    }

    const double min_gap = (log.times.back() - log.times.front()) / 4;
    double a = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < t.size(); ++m)
    {
        for (std::size_t n = m + 1; n < t.size(); ++n)
        {
            double dt = t[n] - t[m];
            if (dt >= min_gap * (1 - 1e-12))
                a = std::min(a, (s[n] - s[m]) / dt);
        }
    }
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < t.size(); ++m)
    {
        for (std::size_t n = m + 1; n < t.size(); ++n)
            b = std::min(b, (s[n] - s[m]) - a * (t[n] - t[m]));
    }
    return {a > 0, a, b};
}

//---------------------------------------------------------------------------//
namespace
{
Mat qr_flow_rhs(const Mat& q, const Mat& a, Vec* diag)
{
    Mat b = q.transpose() * a * q;
    const std::size_t n = b.rows();
    Mat s(n, n);
    for (std::size_t r = 0; r < n; ++r)
    {
        for (std::size_t c = 0; c < r; ++c)
        {
            s(r, c) = b(r, c);
            s(c, r) = -b(r, c);
        }
    }
    if (diag)
    {
        for (std::size_t r = 0; r < n; ++r)
            (*diag)[r] = b(r, r);
    }
    return q * s;
}
} // namespace

QrFlow::QrFlow(const OdeSystem& sys, double t0, Mat q0, bool reorthonormalize)
    : sys_(&sys), t_(t0), q_(std::move(q0)), reortho_(reorthonormalize)
{
    if (!sys.linear)
        throw ConfigError("the continuous QR oracle requires a linear system");
    if (q_.rows() != sys.dim || !q_.square())
        throw ConfigError("QR flow: starting matrix has the wrong shape");
}

Vec QrFlow::advance(double dt, std::size_t substeps)
{
    if (!(dt > 0) || substeps == 0)
        throw ConfigError("QR flow: dt and substeps must be positive");
    const std::size_t n = sys_->dim;
    const double h = dt / static_cast<double>(substeps);
    Vec integral(n);
    Vec b_start(n);
    Vec b_end(n);
    for (std::size_t k = 0; k < substeps; ++k)
    {
        const double t = t_ + static_cast<double>(k) * h;
        const Mat a0 = sys_->coefficient(t);
        const Mat a_mid = sys_->coefficient(t + h / 2);
        const Mat a1 = sys_->coefficient(t + h);
        Mat k1 = qr_flow_rhs(q_, a0, &b_start);
        Mat k2 = qr_flow_rhs(q_ + (h / 2) * k1, a_mid, nullptr);
        Mat k3 = qr_flow_rhs(q_ + (h / 2) * k2, a_mid, nullptr);
        Mat k4 = qr_flow_rhs(q_ + h * k3, a1, nullptr);
        q_ = q_ + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        Mat b = q_.transpose() * a1 * q_;
        for (std::size_t i = 0; i < n; ++i)
            b_end[i] = b(i, i);
        integral = integral + (h / 2) * (b_start + b_end);
    }
    t_ += dt;
    if (reortho_)
        q_ = qr_positive(q_).q;
    return (1 / dt) * integral;
}

Vec steklov_oracle(const OdeSystem& sys,
                   double t,
                   double dt,
                   std::size_t substeps,
                   const Mat& q)
{
    QrFlow flow(sys, t, q);
    return flow.advance(dt, substeps);
}

Vec steklov_oracle(const OdeSystem& sys, double t, double dt, std::size_t substeps)
{
    return steklov_oracle(sys, t, dt, substeps, Mat::identity(sys.dim));
}

} // namespace qrstab

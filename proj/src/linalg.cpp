//---------------------------------------------------------------------------//
//! \file linalg.cpp
//---------------------------------------------------------------------------//
#include "qrstab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qrstab
{
namespace
{
void require_same_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
    {
        throw ConfigError(std::string("dimension mismatch in ") + what);
    }
}

void require_same_shape(const Mat& a, const Mat& b, const char* what)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
    {
        throw ConfigError(std::string("shape mismatch in ") + what);
    }
}
} // namespace

//---------------------------------------------------------------------------//
// VEC
//---------------------------------------------------------------------------//

Vec operator+(const Vec& a, const Vec& b)
{
    require_same_size(a.size(), b.size(), "vector add");
    Vec result(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        result[i] = a[i] + b[i];
    return result;
}

Vec operator-(const Vec& a, const Vec& b)
{
    require_same_size(a.size(), b.size(), "vector subtract");
    Vec result(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        result[i] = a[i] - b[i];
    return result;
}

Vec operator*(double s, const Vec& a)
{
    Vec result(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        result[i] = s * a[i];
    return result;
}

void axpy(double alpha, const Vec& x, Vec& y)
{
    require_same_size(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

double dot(const Vec& a, const Vec& b)
{
    require_same_size(a.size(), b.size(), "dot");
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * b[i];
    return sum;
}

double norm2(const Vec& v)
{
    // Scaled accumulation avoids overflow for large power-iteration growth
    double scale = norm_inf(v);
    if (scale == 0 || !std::isfinite(scale))
        return scale;
    double sum = 0;
    for (double x : v)
    {
        double y = x / scale;
        sum += y * y;
    }
    return scale * std::sqrt(sum);
}

double norm_inf(const Vec& v)
{
    double result = 0;
    for (double x : v)
        result = std::max(result, std::fabs(x));
    return result;
}

bool all_finite(const Vec& v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

//---------------------------------------------------------------------------//
// MAT
//---------------------------------------------------------------------------//

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0)
{
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows)
    {
        if (row.size() != cols_)
            throw ConfigError("ragged matrix initializer");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Mat Mat::identity(std::size_t n)
{
    Mat result(n, n);
    for (std::size_t i = 0; i < n; ++i)
        result(i, i) = 1;
    return result;
}

Mat Mat::diagonal(const Vec& d)
{
    Mat result(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        result(i, i) = d[i];
    return result;
}

Vec Mat::column(std::size_t j) const
{
    Vec result(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        result[i] = (*this)(i, j);
    return result;
}

void Mat::set_column(std::size_t j, const Vec& v)
{
    require_same_size(v.size(), rows_, "set_column");
    for (std::size_t i = 0; i < rows_; ++i)
        (*this)(i, j) = v[i];
}

Mat Mat::transpose() const
{
    Mat result(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            result(j, i) = (*this)(i, j);
    return result;
}

Mat operator+(const Mat& a, const Mat& b)
{
    require_same_shape(a, b, "matrix add");
    Mat result(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            result(i, j) = a(i, j) + b(i, j);
    return result;
}

Mat operator-(const Mat& a, const Mat& b)
{
    require_same_shape(a, b, "matrix subtract");
    Mat result(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            result(i, j) = a(i, j) - b(i, j);
    return result;
}

Mat operator*(double s, const Mat& a)
{
    Mat result(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            result(i, j) = s * a(i, j);
    return result;
}

Mat operator*(const Mat& a, const Mat& b)
{
    require_same_size(a.cols(), b.rows(), "matrix multiply");
    Mat result(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
    {
        for (std::size_t k = 0; k < a.cols(); ++k)
        {
            double aik = a(i, k);
            if (aik == 0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                result(i, j) += aik * b(k, j);
        }
    }
    return result;
}

Vec operator*(const Mat& a, const Vec& x)
{
    require_same_size(a.cols(), x.size(), "matrix-vector multiply");
    Vec result(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
    {
        double sum = 0;
        for (std::size_t j = 0; j < a.cols(); ++j)
            sum += a(i, j) * x[j];
        result[i] = sum;
    }
    return result;
}

double norm_fro(const Mat& m)
{
    double sum = 0;
    for (double x : m.span())
        sum += x * x;
    return std::sqrt(sum);
}

double max_abs(const Mat& m)
{
    double result = 0;
    for (double x : m.span())
        result = std::max(result, std::fabs(x));
    return result;
}

double norm2(const Mat& m)
{
    Mat gram = m.transpose() * m;
    return std::sqrt(std::max(0.0, sym_eig_extremes(gram).lam_max));
}

bool all_finite(const Mat& m)
{
    auto s = m.span();
    return std::all_of(s.begin(), s.end(), [](double x) { return std::isfinite(x); });
}

//---------------------------------------------------------------------------//
// QR
//---------------------------------------------------------------------------//

QrResult qr_positive(const Mat& m)
{
    if (!m.square())
        throw ConfigError("qr_positive requires a square matrix");
    const std::size_t n = m.rows();
    const double threshold = 1e-14 * max_abs(m);

    Mat r = m;
    Mat q = Mat::identity(n);
    std::vector<double> v(n);

    for (std::size_t k = 0; k + 1 < n; ++k)
    {
        double alpha = 0;
        for (std::size_t i = k; i < n; ++i)
            alpha += r(i, k) * r(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0)
            continue;
        // Reflect x onto -sign(x_k) |x| e_k to avoid cancellation
        double sign = r(k, k) >= 0 ? 1.0 : -1.0;
        for (std::size_t i = k; i < n; ++i)
            v[i] = r(i, k);
        v[k] += sign * alpha;
        double vnorm2 = 0;
        for (std::size_t i = k; i < n; ++i)
            vnorm2 += v[i] * v[i];
        if (vnorm2 == 0)
            continue;

        // R <- (I - 2 v v^T / v^T v) R
        for (std::size_t j = k; j < n; ++j)
        {
            double s = 0;
            for (std::size_t i = k; i < n; ++i)
                s += v[i] * r(i, j);
            s *= 2 / vnorm2;
            for (std::size_t i = k; i < n; ++i)
                r(i, j) -= s * v[i];
        }
        // Q <- Q (I - 2 v v^T / v^T v)
        for (std::size_t i = 0; i < n; ++i)
        {
            double s = 0;
            for (std::size_t l = k; l < n; ++l)
                s += q(i, l) * v[l];
            s *= 2 / vnorm2;
            for (std::size_t l = k; l < n; ++l)
                q(i, l) -= s * v[l];
        }
        for (std::size_t i = k + 1; i < n; ++i)
            r(i, k) = 0;
    }

    for (std::size_t k = 0; k < n; ++k)
    {
        if (std::fabs(r(k, k)) <= threshold || !std::isfinite(r(k, k)))
        {
            throw SingularMatrixError("qr_positive: pivot " + std::to_string(k)
                                      + " below singularity threshold");
        }
        if (r(k, k) < 0)
        {
            for (std::size_t j = k; j < n; ++j)
                r(k, j) = -r(k, j);
            for (std::size_t i = 0; i < n; ++i)
                q(i, k) = -q(i, k);
        }
    }
    return {std::move(q), std::move(r)};
}

//---------------------------------------------------------------------------//
// LU
//---------------------------------------------------------------------------//

LuFactor::LuFactor(const Mat& m) : lu_(m), perm_(m.rows())
{
    if (!m.square())
        throw ConfigError("LU requires a square matrix");
    const std::size_t n = m.rows();
    const double threshold = 1e-14 * max_abs(m);
    std::iota(perm_.begin(), perm_.end(), 0);

    for (std::size_t k = 0; k < n; ++k)
    {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i)
        {
            if (std::fabs(lu_(i, k)) > std::fabs(lu_(pivot, k)))
                pivot = i;
        }
        if (!(std::fabs(lu_(pivot, k)) > threshold))
            throw SingularMatrixError("LU: matrix is numerically singular");
        if (pivot != k)
        {
            std::swap(perm_[k], perm_[pivot]);
            for (std::size_t j = 0; j < n; ++j)
                std::swap(lu_(k, j), lu_(pivot, j));
        }
        for (std::size_t i = k + 1; i < n; ++i)
        {
            double factor = lu_(i, k) / lu_(k, k);
            lu_(i, k) = factor;
            if (factor == 0)
                continue;
            for (std::size_t j = k + 1; j < n; ++j)
                lu_(i, j) -= factor * lu_(k, j);
        }
    }
}

Vec LuFactor::solve(const Vec& b, std::size_t* lsol) const
{
    const std::size_t n = lu_.rows();
    require_same_size(b.size(), n, "LU solve");
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double sum = b[perm_[i]];
        for (std::size_t j = 0; j < i; ++j)
            sum -= lu_(i, j) * x[j];
        x[i] = sum;
    }
    for (std::size_t i = n; i-- > 0;)
    {
        double sum = x[i];
        for (std::size_t j = i + 1; j < n; ++j)
            sum -= lu_(i, j) * x[j];
        x[i] = sum / lu_(i, i);
    }
    if (lsol)
        ++*lsol;
    return x;
}

Vec solve(const Mat& m, const Vec& b, std::size_t* lsol)
{
    return LuFactor(m).solve(b, lsol);
}

Mat inverse(const Mat& m)
{
    LuFactor lu(m);
    const std::size_t n = m.rows();
    Mat result(n, n);
    for (std::size_t j = 0; j < n; ++j)
    {
        Vec e(n);
        e[j] = 1;
        result.set_column(j, lu.solve(e));
    }
    return result;
}

//---------------------------------------------------------------------------//
// SYMMETRIC EIGENVALUES
//---------------------------------------------------------------------------//

std::vector<double> sym_eigenvalues(const Mat& s)
{
    if (!s.square())
        throw ConfigError("symmetric eigenvalues require a square matrix");
    if (!all_finite(s))
        throw NumericalError("symmetric eigenvalues: non-finite input");
    const std::size_t n = s.rows();
    Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = 0.5 * (s(i, j) + s(j, i));

    const double scale = std::max(norm_fro(a), 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep)
    {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= 1e-15 * scale)
            break;

        for (std::size_t p = 0; p < n; ++p)
        {
            for (std::size_t q = p + 1; q < n; ++q)
            {
                double apq = a(p, q);
                if (std::fabs(apq) <= 1e-300)
                    continue;
                double theta = (a(q, q) - a(p, p)) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0)
                           / (std::fabs(theta) + std::sqrt(theta * theta + 1));
                double c = 1 / std::sqrt(t * t + 1);
                double sn = t * c;
                for (std::size_t k = 0; k < n; ++k)
                {
                    double akp = a(k, p);
                    double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k)
                {
                    double apk = a(p, k);
                    double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = 0;
                a(q, p) = 0;
            }
        }
    }

    std::vector<double> result(n);
    for (std::size_t i = 0; i < n; ++i)
        result[i] = a(i, i);
    std::sort(result.begin(), result.end());
    return result;
}

EigExtremes sym_eig_extremes(const Mat& s)
{
    auto values = sym_eigenvalues(s);
    return {values.front(), values.back()};
}

} // namespace qrstab

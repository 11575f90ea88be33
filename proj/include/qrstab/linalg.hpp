//---------------------------------------------------------------------------//
//! \file linalg.hpp
//! Small dense linear algebra: vectors, matrices, QR, LU, symmetric spectra.
//---------------------------------------------------------------------------//
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "qrstab/errors.hpp"

namespace qrstab
{
//---------------------------------------------------------------------------//
/*!
 * Dense real vector.
 */
class Vec
{
  public:
    Vec() = default;
    explicit Vec(std::size_t n, double value = 0.0) : data_(n, value) {}
    Vec(std::initializer_list<double> values) : data_(values) {}
    explicit Vec(std::vector<double> values) : data_(std::move(values)) {}

    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> span() { return data_; }
    std::span<const double> span() const { return data_; }
    const std::vector<double>& values() const { return data_; }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool operator==(const Vec&) const = default;

  private:
    std::vector<double> data_;
};

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& a);

// y <- y + alpha * x
void axpy(double alpha, const Vec& x, Vec& y);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm_inf(const Vec& v);
bool all_finite(const Vec& v);

//---------------------------------------------------------------------------//
/*!
 * Dense real matrix stored row-major.
 */
class Mat
{
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value)
    {
    }
    //! Build from nested rows; all rows must have equal length
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t n);
    static Mat diagonal(const Vec& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j)
    {
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const
    {
        return data_[i * cols_ + j];
    }

    Vec column(std::size_t j) const;
    void set_column(std::size_t j, const Vec& v);

    Mat transpose() const;

    std::span<const double> span() const { return data_; }

    bool operator==(const Mat&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& a);
Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, const Vec& x);

double norm_fro(const Mat& m);
double max_abs(const Mat& m);
//! Spectral norm via the largest eigenvalue of m^T m
double norm2(const Mat& m);
bool all_finite(const Mat& m);

//---------------------------------------------------------------------------//
// FACTORIZATIONS
//---------------------------------------------------------------------------//

struct QrResult
{
    Mat q;
    Mat r;
};

/*!
 * Householder QR of a square matrix with the diagonal of R made positive.
 *
 * The positive-diagonal convention makes the factorization unique, which the
 * discrete QR iteration relies on. Throws SingularMatrixError when a diagonal
 * of R falls below 1e-14 times the largest entry of the input.
 */
QrResult qr_positive(const Mat& m);

/*!
 * LU factorization with partial pivoting, reusable across right-hand sides.
 */
class LuFactor
{
  public:
    explicit LuFactor(const Mat& m);

    //! Solve m x = b; increments lsol if provided
    Vec solve(const Vec& b, std::size_t* lsol = nullptr) const;

    std::size_t size() const { return lu_.rows(); }

  private:
    Mat lu_;
    std::vector<std::size_t> perm_;
};

//! One-shot solve of m x = b
Vec solve(const Mat& m, const Vec& b, std::size_t* lsol = nullptr);

//! Inverse via LU (used for small propagator matrices)
Mat inverse(const Mat& m);

struct EigExtremes
{
    double lam_min;
    double lam_max;
};

//! Smallest and largest eigenvalue of the symmetric part of s (cyclic Jacobi)
EigExtremes sym_eig_extremes(const Mat& s);

//! All eigenvalues of the symmetric part of s in ascending order
std::vector<double> sym_eigenvalues(const Mat& s);

//---------------------------------------------------------------------------//
} // namespace qrstab

//---------------------------------------------------------------------------//
//! \file errors.hpp
//---------------------------------------------------------------------------//
#pragma once

#include <stdexcept>
#include <string>

namespace qrstab
{
//! Base class for all library errors
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Invalid user input: bad names, parameters, configurations
class ConfigError : public Error
{
  public:
    using Error::Error;
};

//! Failure of a numerical procedure (maps to CLI exit status 2)
class NumericalError : public Error
{
  public:
    using Error::Error;
};

class SingularMatrixError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class PoleError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class NonFiniteStageError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class NewtonDivergenceError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class MinimumStepError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class ZeroVectorError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class OutOfWindowError : public Error
{
  public:
    using Error::Error;
};

class RunTooShortError : public Error
{
  public:
    using Error::Error;
};

} // namespace qrstab

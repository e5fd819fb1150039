#pragma once

#include <stdexcept>
#include <string>

namespace mpdae {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// The algebraic Jacobian dg/dz was singular where the index-1 assumption needs it regular.
class SingularConstraintJacobian : public Error
{
public:
    using Error::Error;
};

/// Condition 1 (phase pinned on a component that is flat at t2 = 0) or
/// Condition 2 (every weighted variable constant in fast time) failed on the grid.
class ConditionViolation : public Error
{
public:
    ConditionViolation(int condition, const std::string& what)
        : Error(what), condition_(condition)
    {}
    int condition() const noexcept { return condition_; }

private:
    int condition_;
};

class NewtonFailure : public Error
{
public:
    NewtonFailure(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations)
    {}
    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

class SingularIterationMatrix : public Error
{
public:
    SingularIterationMatrix(const std::string& what, double rcond)
        : Error(what), rcond_(rcond)
    {}
    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// Point handed to the index analysis does not satisfy the DAE.
class InconsistentPoint : public Error
{
public:
    using Error::Error;
};

class NoPeriodicRegime : public Error
{
public:
    using Error::Error;
};

class ParseError : public Error
{
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line)
    {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace mpdae

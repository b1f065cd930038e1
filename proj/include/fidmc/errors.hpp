#pragma once

#include <stdexcept>
#include <string>

namespace fidmc {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// A numerical solver could not produce a result. NonBracketing,
// MaxIterExceeded and NonFinite refine the cause; catching SolverFailure
// covers all of them.
class SolverFailure : public Error {
public:
    using Error::Error;
};

class NonBracketing : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

class MaxIterExceeded : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

class NonFinite : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

// A support restriction carries no probability mass.
class EmptySupport : public Error {
public:
    using Error::Error;
};

// The unnormalized mass of a slice density underflowed to zero.
class NormalizerUnderflow : public Error {
public:
    using Error::Error;
};

// The applicability conditions checked at sampler setup do not hold.
class ConditionViolated : public Error {
public:
    using Error::Error;
};

class EmptySample : public Error {
public:
    using Error::Error;
};

} // namespace fidmc

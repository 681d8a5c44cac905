#pragma once

#include <stdexcept>
#include <string>

namespace cayley {

// Base of every error raised by the library. Each subclass names the
// violated contract so callers (and the CLI exit-code mapping) can dispatch.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameters outside the admissible domain (d < 2, J <= 0, theta outside (0,1), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Generation index beyond a finite explicit field list.
class IndexError : public Error {
public:
    using Error::Error;
};

// The critical field is undefined because theta <= 1/d.
class CriticalityError : public Error {
public:
    using Error::Error;
};

// The requested fixed-point structure does not exist (e.g. a single fixed point).
class CaseError : public Error {
public:
    using Error::Error;
};

// A perturbation prefix that is not positive and decreasing.
class MonotonicityError : public Error {
public:
    using Error::Error;
};

// Exact enumeration requested beyond the vertex cap.
class SizeError : public Error {
public:
    using Error::Error;
};

}  // namespace cayley

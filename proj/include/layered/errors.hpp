#pragma once

#include <stdexcept>
#include <string>

namespace layered {

// Base class for every failure raised by the library.  Numerical failures
// carry enough context (momentum, configuration) in the message to reproduce.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedStacking : public Error {
public:
    using Error::Error;
};

// A closed-form quantity was requested at a point where some E_m = 0.
class SingularPoint : public Error {
public:
    using Error::Error;
};

// An eigenvector identity was requested on a degenerate spectrum.
class IdentityUndefined : public Error {
public:
    using Error::Error;
};

// Both components of the dynamical field vanish at a contour point.
class DegenerateField : public Error {
public:
    using Error::Error;
};

class NonQuantizedWinding : public Error {
public:
    using Error::Error;
};

// Contour unusable for winding: too few points, open, or under-resolved.
class ContourError : public Error {
public:
    using Error::Error;
};

class GaplessConfiguration : public Error {
public:
    using Error::Error;
};

class TrivialRegime : public Error {
public:
    using Error::Error;
};

class InconsistentSample : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

// Bad user input (configuration keys, ranges, tokens).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace layered

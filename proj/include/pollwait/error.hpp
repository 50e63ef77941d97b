#pragma once

#include <stdexcept>
#include <string>

namespace pollwait {

// Base for all pipeline errors. Subclasses carry the error categories named
// in the module contracts so callers can branch on type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

class SchemaMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class DuplicateKey : public Error {
public:
    using Error::Error;
};

class JoinError : public Error {
public:
    using Error::Error;
};

class InvariantViolation : public Error {
public:
    using Error::Error;
};

class UnsortedInput : public Error {
public:
    using Error::Error;
};

class MissingBound : public Error {
public:
    using Error::Error;
};

class RankDeficient : public Error {
public:
    using Error::Error;
};

class TooFewClusters : public Error {
public:
    using Error::Error;
};

class MissingField : public Error {
public:
    using Error::Error;
};

class EmptyWindow : public Error {
public:
    using Error::Error;
};

class DegenerateVariance : public Error {
public:
    using Error::Error;
};

class DegenerateField : public Error {
public:
    using Error::Error;
};

class NonPositiveCurve : public Error {
public:
    using Error::Error;
};

class UnknownBucket : public Error {
public:
    using Error::Error;
};

class InsufficientOverlap : public Error {
public:
    using Error::Error;
};

class ConfigInvalid : public Error {
public:
    using Error::Error;
};

} // namespace pollwait

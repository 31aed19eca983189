#pragma once

#include <stdexcept>
#include <string>

namespace sbp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, int iterations, double last_residual)
        : Error(what + " (iterations=" + std::to_string(iterations) +
                ", residual=" + std::to_string(last_residual) + ")"),
          iterations(iterations), last_residual(last_residual) {}
    int iterations;
    double last_residual;
};

class InvalidExponent : public Error { public: using Error::Error; };
class QuadratureUnderflow : public Error { public: using Error::Error; };
class GridMismatch : public Error { public: using Error::Error; };
class GridTooSmall : public Error { public: using Error::Error; };
class GridTooLarge : public Error { public: using Error::Error; };
class PeaksUnresolved : public Error { public: using Error::Error; };
class SingularGram : public Error { public: using Error::Error; };
class KrylovBreakdown : public Error { public: using Error::Error; };
class AlphaTooSmall : public Error { public: using Error::Error; };
class EmptyAdmissible : public Error { public: using Error::Error; };
class InvalidArgument : public Error { public: using Error::Error; };

class ParseError : public Error {
public:
    ParseError(int line, std::string key, const std::string& msg)
        : Error("line " + std::to_string(line) + ", key '" + key + "': " + msg),
          line(line), key(std::move(key)) {}
    int line;
    std::string key;
};

class ValidationError : public Error {
public:
    ValidationError(std::string key, std::string constraint)
        : Error(key + " must be " + constraint), key(std::move(key)),
          constraint(std::move(constraint)) {}
    std::string key;
    std::string constraint;
};

}  // namespace sbp

#pragma once

#include <stdexcept>
#include <string>

namespace qcv {

struct QcvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivisionByZero : QcvError {
    DivisionByZero() : QcvError("division by zero rational function") {}
    explicit DivisionByZero(const std::string& m) : QcvError(m) {}
};

struct ExponentDenominator : QcvError {
    explicit ExponentDenominator(const std::string& m)
        : QcvError("exponent denominator bound violated: " + m) {}
};

struct UnsupportedDenominator : QcvError {
    explicit UnsupportedDenominator(const std::string& m)
        : QcvError("denominator does not factor into binomials: " + m) {}
};

struct NonExpandable : QcvError {
    explicit NonExpandable(const std::string& m)
        : QcvError("not expandable in the requested region: " + m) {}
};

struct SingularPivot : QcvError {
    explicit SingularPivot(const std::string& m)
        : QcvError("singular pivot: " + m) {}
};

// Raised when a formal-distribution product has coefficientwise-divergent
// coefficients.  `trace` names the offending pair of factors.
struct Divergent : QcvError {
    std::string trace;
    explicit Divergent(const std::string& t)
        : QcvError("divergent distribution product: " + t), trace(t) {}
};

struct Unsupported : QcvError {
    explicit Unsupported(const std::string& m) : QcvError("unsupported: " + m) {}
};

struct ParseError : QcvError {
    int line;
    int col;
    ParseError(int l, int c, const std::string& m)
        : QcvError("parse error at " + std::to_string(l) + ":" + std::to_string(c) +
                   ": " + m),
          line(l), col(c) {}
};

} // namespace qcv

#pragma once

#include <stdexcept>
#include <string>

namespace vessiot {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DivisionByZero : Error {
    explicit DivisionByZero(const std::string& msg = "division by zero") : Error(msg) {}
};

struct IdenticallyZeroDenominator : Error {
    explicit IdenticallyZeroDenominator(const std::string& msg = "denominator normalizes to zero") : Error(msg) {}
};

struct UnboundAtom : Error {
    explicit UnboundAtom(const std::string& msg) : Error("unbound atom: " + msg) {}
};

struct SourceTargetMismatch : Error {
    explicit SourceTargetMismatch(const std::string& msg) : Error(msg) {}
};

struct SingularLinearPart : Error {
    explicit SingularLinearPart(const std::string& msg) : Error(msg) {}
};

struct NonAffineTopOrder : Error {
    explicit NonAffineTopOrder(const std::string& msg) : Error(msg) {}
};

struct ReductionFailed : Error {
    explicit ReductionFailed(const std::string& msg) : Error(msg) {}
};

struct InadmissiblePoint : Error {
    explicit InadmissiblePoint(const std::string& msg) : Error(msg) {}
};

struct UnknownName : Error {
    explicit UnknownName(const std::string& msg) : Error("unknown name: " + msg) {}
};

/* An identifier inside a DSL expression that names no declared component. */
struct UnknownSymbol : Error {
    explicit UnknownSymbol(const std::string& msg) : Error("unknown symbol: " + msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

/* Parse error with 1-based position info. */
struct SyntaxError : Error {
    int line, column;
    SyntaxError(const std::string& msg, int line_, int col_)
        : Error(msg + " at line " + std::to_string(line_) + ", column " + std::to_string(col_)),
          line(line_), column(col_) {}
};

/* Raised when a computation exceeds the configured term budget. */
struct ResourceLimit : Error {
    explicit ResourceLimit(const std::string& msg) : Error(msg) {}
};

} // namespace vessiot

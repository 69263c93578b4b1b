#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace moser {

using Point = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DegreeError : public Error {
public:
    using Error::Error;
};

/// A 2-form (or the contact bordered system) is degenerate at a point.
class SingularForm : public Error {
public:
    SingularForm(const std::string& what, Point where, double margin)
        : Error(what), point_(std::move(where)), margin_(margin) {}

    const Point& point() const { return point_; }
    double margin() const { return margin_; }

private:
    Point point_;
    double margin_;
};

/// A coefficient or derivative evaluated to NaN/inf.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, Point where)
        : Error(what), point_(std::move(where)) {}
    const Point& point() const { return point_; }

private:
    Point point_;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

/// dσ_t did not match ω̇_t at a probe point.
class PrimitiveMismatch : public Error {
public:
    PrimitiveMismatch(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// A cylinder primitive failed its residual check and no slice primitive was given.
class MissingBasePrimitive : public Error {
public:
    MissingBasePrimitive(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& message)
        : Error("syntax error at offset " + std::to_string(position) + ": " + message),
          position_(position), message_(message) {}
    std::size_t position() const { return position_; }
    const std::string& message() const { return message_; }

private:
    std::size_t position_;
    std::string message_;
};

class UnboundVariable : public Error {
public:
    UnboundVariable(std::size_t position, std::string name)
        : Error("unbound variable '" + name + "' at offset " + std::to_string(position)),
          position_(position), name_(std::move(name)) {}
    std::size_t position() const { return position_; }
    const std::string& name() const { return name_; }

private:
    std::size_t position_;
    std::string name_;
};

namespace detail {

inline std::string format_point(const Point& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << x[i];
    }
    os << ')';
    return os.str();
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline void require_dim(int expected, int got, const char* what) {
    if (expected != got)
        throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(got) +
                                " does not match " + std::to_string(expected));
}

} // namespace detail

} // namespace moser

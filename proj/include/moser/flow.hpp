#pragma once

// Flows of time-dependent vector fields with Jacobian transport (variational
// equation J' = DX_t(γ) J) and arc length, by an embedded Dormand–Prince 5(4) pair.

#include "moser/form.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace moser {

struct TimeVectorField {
    int dim = 0;
    std::function<Vector(double, const Point&)> eval;
    std::function<Matrix(double, const Point&)> jac; // optional

    Vector operator()(double t, const Point& x) const { return eval(t, x); }

    bool has_jacobian() const { return static_cast<bool>(jac); }

    Matrix jacobian(double t, const Point& x) const {
        if (jac) return jac(t, x);
        const auto& f = eval;
        return central_jacobian([&f, t](const Point& y) { return f(t, y); }, x);
    }

    static TimeVectorField zero(int dim) {
        return {dim, [dim](double, const Point&) { return Vector(Vector::Zero(dim)); },
                [dim](double, const Point&) { return Matrix(Matrix::Zero(dim, dim)); }};
    }

    /// The autonomous field x ↦ X(t_frozen, x).
    TimeVectorField frozen(double t_frozen) const {
        const auto f = eval;
        const auto j = jac;
        TimeVectorField out{dim, [f, t_frozen](double, const Point& x) { return f(t_frozen, x); }, {}};
        if (j) out.jac = [j, t_frozen](double, const Point& x) { return j(t_frozen, x); };
        return out;
    }
};

struct IntegratorSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    std::size_t max_steps = 200000;
    double escape_radius = 1e6;
    double min_step = 1e-12;
    double initial_step = 1e-3;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw Error("integrator tolerances must be positive");
        if (!(min_step > 0.0) || !(initial_step > 0.0) || !(escape_radius > 0.0) || max_steps == 0)
            throw Error("invalid integrator step controls");
    }

    IntegratorSpec tightened(double factor) const {
        IntegratorSpec s = *this;
        s.rel_tol /= factor;
        s.abs_tol /= factor;
        return s;
    }
};

enum class FlowStatus { completed, escaped, step_underflow };

inline std::string to_string(FlowStatus s) {
    switch (s) {
    case FlowStatus::completed: return "completed";
    case FlowStatus::escaped: return "escaped";
    case FlowStatus::step_underflow: return "step_underflow";
    }
    return "?";
}

/// One integral curve with transported Jacobian at every accepted step.
struct FlowRecord {
    std::vector<double> times;
    std::vector<Point> points;
    std::vector<Matrix> jacobians;
    double arc_length = 0.0;
    FlowStatus status = FlowStatus::completed;
    std::string message;
    std::size_t rejected_steps = 0;

    const Point& end_point() const { return points.back(); }
    const Matrix& end_jacobian() const { return jacobians.back(); }

    /// Index of the record at exactly time t, or -1.
    long index_of(double t) const {
        const auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it == times.end() || *it != t) return -1;
        return static_cast<long>(it - times.begin());
    }

    double min_jacobian_determinant() const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& J : jacobians) d = std::min(d, J.determinant());
        return d;
    }
};

/// Integration window; every entry of `stops` inside (t0, t1] is hit exactly.
struct FlowWindow {
    double t0 = 0.0;
    double t1 = 1.0;
    std::vector<double> stops;
};

namespace detail {

// Dormand–Prince 5(4) coefficients.
struct DormandPrince {
    static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr std::array<double, 7> b{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
    static constexpr std::array<double, 7> b_star{5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                                                  -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

/// Augmented state [x (m), J column-major (m²), arc length (1)].
class AugmentedSystem {
public:
    AugmentedSystem(const TimeVectorField& X) : X_(X), m_(X.dim) {}

    Vector operator()(double t, const Vector& y) const {
        const Point x = y.head(m_);
        const Vector v = X_(t, x);
        if (!v.allFinite()) throw EvaluationError("vector field is not finite at " + format_point(x), x);
        const Matrix DX = X_.jacobian(t, x);
        if (!DX.allFinite()) throw EvaluationError("vector field Jacobian is not finite at " + format_point(x), x);
        const Eigen::Map<const Matrix> J(y.data() + m_, m_, m_);
        Vector out(y.size());
        out.head(m_) = v;
        Eigen::Map<Matrix>(out.data() + m_, m_, m_) = DX * J;
        out[out.size() - 1] = v.norm();
        return out;
    }

    int dim() const { return m_; }

private:
    const TimeVectorField& X_;
    int m_;
};

} // namespace detail

/// Integrates γ' = X_t(γ), γ(t0) = x0 over the window, transporting J and arc length.
inline FlowRecord integrate_flow(const TimeVectorField& X, const Point& x0, const IntegratorSpec& spec = {},
                                 const FlowWindow& window = {}) {
    spec.validate();
    detail::require_dim(X.dim, static_cast<int>(x0.size()), "integrate_flow");
    if (!(window.t1 >= window.t0)) throw Error("flow window must satisfy t1 >= t0");
    using DP = detail::DormandPrince;
    const int m = X.dim;
    const detail::AugmentedSystem sys(X);

    std::vector<double> stops;
    for (double s : window.stops)
        if (s > window.t0 && s < window.t1) stops.push_back(s);
    stops.push_back(window.t1);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    FlowRecord rec;
    Vector y(m + m * m + 1);
    y.head(m) = x0;
    Eigen::Map<Matrix>(y.data() + m, m, m).setIdentity();
    y[y.size() - 1] = 0.0;
    double t = window.t0;
    auto record = [&] {
        rec.times.push_back(t);
        rec.points.push_back(y.head(m));
        rec.jacobians.push_back(Eigen::Map<const Matrix>(y.data() + m, m, m));
        rec.arc_length = y[y.size() - 1];
    };
    record();
    if (window.t1 == window.t0) return rec;

    auto underflow = [&](const std::string& why) {
        rec.status = FlowStatus::step_underflow;
        rec.message = why + " at t = " + std::to_string(t) + ", x = " + detail::format_point(y.head(m));
        return rec;
    };

    Vector k1;
    try {
        k1 = sys(t, y);
    } catch (const Error& e) {
        return underflow(std::string("field evaluation failed: ") + e.what());
    }
    double h = std::min(spec.initial_step, window.t1 - window.t0);
    std::size_t next_stop = 0;
    std::size_t steps = 0;
    std::array<Vector, 7> k;
    while (next_stop < stops.size()) {
        if (++steps > spec.max_steps) return underflow("maximum step count exceeded");
        const double target = stops[next_stop];
        const double remaining = target - t;
        const bool lands = h >= remaining;
        const double step = lands ? remaining : h;

        bool ok = true;
        std::string failure;
        Vector y5, err;
        try {
            k[0] = k1;
            k[1] = sys(t + DP::c[1] * step, y + step * (DP::a21 * k[0]));
            k[2] = sys(t + DP::c[2] * step, y + step * (DP::a31 * k[0] + DP::a32 * k[1]));
            k[3] = sys(t + DP::c[3] * step, y + step * (DP::a41 * k[0] + DP::a42 * k[1] + DP::a43 * k[2]));
            k[4] = sys(t + DP::c[4] * step, y + step * (DP::a51 * k[0] + DP::a52 * k[1] + DP::a53 * k[2] + DP::a54 * k[3]));
            k[5] = sys(t + step,
                       y + step * (DP::a61 * k[0] + DP::a62 * k[1] + DP::a63 * k[2] + DP::a64 * k[3] + DP::a65 * k[4]));
            y5 = y + step * (DP::b[0] * k[0] + DP::b[2] * k[2] + DP::b[3] * k[3] + DP::b[4] * k[4] + DP::b[5] * k[5]);
            k[6] = sys(t + step, y5);
            err = step * ((DP::b[0] - DP::b_star[0]) * k[0] + (DP::b[2] - DP::b_star[2]) * k[2] +
                          (DP::b[3] - DP::b_star[3]) * k[3] + (DP::b[4] - DP::b_star[4]) * k[4] +
                          (DP::b[5] - DP::b_star[5]) * k[5] + (DP::b[6] - DP::b_star[6]) * k[6]);
            ok = y5.allFinite() && err.allFinite();
            if (!ok) failure = "non-finite state";
        } catch (const Error& e) {
            ok = false;
            failure = e.what();
        }

        double err_norm = std::numeric_limits<double>::infinity();
        if (ok) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double sc = spec.abs_tol + spec.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
                acc += (err[i] / sc) * (err[i] / sc);
            }
            err_norm = std::sqrt(acc / static_cast<double>(y.size()));
        }

        if (ok && err_norm <= 1.0) {
            t = lands ? target : t + step;
            y = y5;
            k1 = k[6];
            if (lands) ++next_stop;
            record();
            if (y.head(m).norm() > spec.escape_radius) {
                rec.status = FlowStatus::escaped;
                rec.message = "left the ball of radius " + std::to_string(spec.escape_radius) + " at t = " + std::to_string(t);
                return rec;
            }
            const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            // A step clipped to land on a stop says little about the natural step size.
            h = lands ? std::max(h, step * factor) : step * factor;
        } else {
            ++rec.rejected_steps;
            h = ok ? step * std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9) : 0.25 * step;
            if (h < spec.min_step) return underflow(failure.empty() ? "step size underflow" : "step size underflow (" + failure + ")");
        }
    }
    return rec;
}

} // namespace moser

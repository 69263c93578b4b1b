#pragma once

// Contact path method: Reeb fields, the contact Moser field X_t ∈ ker θ_t and
// verification of φ_t*θ_t = f_t θ_0 along its flow.

#include "moser/flow.hpp"
#include "moser/parallel.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace moser {

inline constexpr double kContactVolumeTol = 1e-9;

namespace detail {

/// Coefficient of θ∧(dθ)^n on dx_1∧…∧dx_m.
inline double contact_volume(const Vector& theta, const Vector& dtheta, int m) {
    Vector acc = theta;
    int k = 1;
    while (k < m) {
        acc = values::wedge(acc, k, dtheta, 2, m);
        k += 2;
    }
    return acc[0];
}

/// Solves [[W, θ], [θᵀ, 0]] [v; μ] = [rhs; last].
inline Vector bordered_solve(const Matrix& w, const Vector& theta, const Vector& rhs, double last, const Point& x) {
    const int m = static_cast<int>(theta.size());
    Matrix a = Matrix::Zero(m + 1, m + 1);
    a.topLeftCorner(m, m) = w;
    a.topRightCorner(m, 1) = theta;
    a.bottomLeftCorner(1, m) = theta.transpose();
    Vector b(m + 1);
    b.head(m) = rhs;
    b[m] = last;
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible())
        throw SingularForm("contact system is singular at " + format_point(x), x, 0.0);
    return lu.solve(b).head(m);
}

} // namespace detail

/// A path θ_t of contact forms on an odd-dimensional chart.
class ContactFamily {
public:
    ContactFamily(TimeForm theta, std::optional<TimeForm> theta_dot = std::nullopt) : theta_(std::move(theta)) {
        if (theta_.degree() != 1) throw DegreeError("contact family needs a 1-form");
        if (theta_.dim() % 2 == 0) throw DimensionMismatch("contact family needs an odd-dimensional chart");
        dtheta_ = exterior_derivative(theta_, theta_.has_jacobian() ? DerivativeScheme::exact() : DerivativeScheme::central());
        theta_dot_ = theta_dot ? *theta_dot : theta_.time_derivative();
    }

    int dim() const { return theta_.dim(); }
    const TimeForm& theta() const { return theta_; }
    const TimeForm& dtheta() const { return dtheta_; }
    const TimeForm& theta_dot() const { return theta_dot_; }

    double volume(double t, const Point& x) const {
        return detail::contact_volume(theta_.eval(t, x), dtheta_.eval(t, x), dim());
    }

    /// Throws SingularForm where |θ∧(dθ)^n| ≤ tol.
    void require_contact(double t, const Point& x, double tol = kContactVolumeTol) const {
        const double v = volume(t, x);
        if (!(std::abs(v) > tol))
            throw SingularForm("contact condition fails at t = " + std::to_string(t) + ", x = " + detail::format_point(x) +
                                   " (θ∧(dθ)^n = " + std::to_string(v) + ")",
                               x, std::abs(v));
    }

    void check(const std::vector<Point>& points, const std::vector<double>& times) const {
        for (double t : times)
            for (const auto& x : points) require_contact(t, x);
    }

private:
    TimeForm theta_;
    TimeForm dtheta_;
    TimeForm theta_dot_;
};

/// Reeb field R of θ_t at x: θ(R) = 1, R⌟dθ = 0.
inline Vector reeb_field(const ContactFamily& fam, double t, const Point& x) {
    fam.require_contact(t, x);
    const int m = fam.dim();
    return detail::bordered_solve(values::two_form_matrix(fam.dtheta().eval(t, x), m), fam.theta().eval(t, x),
                                  Vector::Zero(m), 1.0, x);
}

/// Reeb field of a single contact form.
inline Vector reeb_field(const KForm& theta, const Point& x) {
    return reeb_field(ContactFamily(TimeForm::constant(theta)), 0.0, x);
}

/// h_t = θ̇_t(R_t).
inline double reeb_rate(const ContactFamily& fam, double t, const Point& x) {
    return fam.theta_dot().eval(t, x).dot(reeb_field(fam, t, x));
}

/// X_t with θ_t(X) = 0 and X⌟dθ_t = −θ̇_t + h_t θ_t.
inline TimeVectorField contact_moser_field(const ContactFamily& fam) {
    const int m = fam.dim();
    return {m, [fam, m](double t, const Point& x) {
                fam.require_contact(t, x);
                const Matrix w = values::two_form_matrix(fam.dtheta().eval(t, x), m);
                const Vector theta = fam.theta().eval(t, x);
                const Vector theta_dot = fam.theta_dot().eval(t, x);
                const Vector reeb = detail::bordered_solve(w, theta, Vector::Zero(m), 1.0, x);
                const double h = theta_dot.dot(reeb);
                return detail::bordered_solve(w, theta, theta_dot - h * theta, 0.0, x);
            },
            {}};
}

struct GrayReport {
    std::vector<Point> points;
    std::vector<double> times;
    std::vector<std::vector<double>> residuals; // collinearity residual [point][time]
    std::vector<std::vector<double>> factors;   // f_t [point][time]
    double max_residual = 0.0;
    double min_factor = std::numeric_limits<double>::infinity();
    double max_rate_error = 0.0; // |d/dt log f_t − h_t∘φ_t| at interior grid times
    bool rate_checked = false;
    double tolerance = 0.0;
    double rate_tolerance = 0.0;
    std::size_t escapes = 0;
    std::size_t underflows = 0;
    bool pass = false;
};

struct GrayOptions {
    IntegratorSpec integrator{};
    bool check_rate = true;
    double rate_step = 1e-3;
    double rate_tolerance = 1e-4;
    unsigned threads = 0;
};

/// Flows every point, pulls θ_t back by the transported Jacobian and measures its
/// distance to the line through θ_0(x).
inline GrayReport verify_contact_isotopy(const ContactFamily& fam, const std::vector<Point>& points,
                                         const std::vector<double>& times, double tol, const GrayOptions& opt = {}) {
    if (points.empty()) throw Error("verification needs at least one sample point");
    for (double t : times)
        if (!(t >= 0.0 && t <= 1.0)) throw Error("verification times must lie in [0, 1]");
    fam.check(points, {0.0});
    GrayReport rep;
    rep.points = points;
    rep.times = times;
    rep.tolerance = tol;
    rep.rate_tolerance = opt.rate_tolerance;
    rep.rate_checked = opt.check_rate;
    const TimeVectorField X = contact_moser_field(fam);
    const double t_end = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
    std::vector<double> stops = times;
    std::vector<double> interior;
    if (opt.check_rate)
        for (double t : times)
            if (t - opt.rate_step > 0.0 && t + opt.rate_step <= t_end) {
                interior.push_back(t);
                stops.push_back(t - opt.rate_step);
                stops.push_back(t + opt.rate_step);
            }
    const FlowWindow window{0.0, t_end, stops};
    const double inf = std::numeric_limits<double>::infinity();
    rep.residuals.assign(points.size(), std::vector<double>(times.size(), inf));
    rep.factors.assign(points.size(), std::vector<double>(times.size(), std::numeric_limits<double>::quiet_NaN()));
    std::vector<double> rate_err(points.size(), 0.0);
    std::vector<FlowStatus> status(points.size());
    parallel_for(
        points.size(),
        [&](std::size_t i) {
            const Point& x = points[i];
            const FlowRecord rec = integrate_flow(X, x, opt.integrator, window);
            status[i] = rec.status;
            const Vector theta0 = fam.theta().eval(0.0, x);
            auto factor_at = [&](long idx, double t, double* residual) {
                const Vector v = rec.jacobians[idx].transpose() * fam.theta().eval(t, rec.points[idx]);
                const double f = v.dot(theta0) / theta0.squaredNorm();
                if (residual) *residual = (v - f * theta0).norm();
                return f;
            };
            for (std::size_t j = 0; j < times.size(); ++j) {
                const long idx = rec.index_of(times[j]);
                if (idx < 0) continue;
                double res = 0.0;
                rep.factors[i][j] = factor_at(idx, times[j], &res);
                rep.residuals[i][j] = res;
            }
            for (double t : interior) {
                const long lo = rec.index_of(t - opt.rate_step), mid = rec.index_of(t), hi = rec.index_of(t + opt.rate_step);
                if (lo < 0 || mid < 0 || hi < 0) {
                    rate_err[i] = inf;
                    continue;
                }
                const double fl = factor_at(lo, t - opt.rate_step, nullptr);
                const double fh = factor_at(hi, t + opt.rate_step, nullptr);
                const double rate = (std::log(fh) - std::log(fl)) / (2.0 * opt.rate_step);
                const double h = reeb_rate(fam, t, rec.points[mid]);
                rate_err[i] = std::max(rate_err[i], std::abs(rate - h));
            }
        },
        opt.threads);

    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < times.size(); ++j) {
            rep.max_residual = std::max(rep.max_residual, rep.residuals[i][j]);
            const double f = rep.factors[i][j];
            rep.min_factor = std::min(rep.min_factor, f == f ? f : -inf);
        }
        rep.max_rate_error = std::max(rep.max_rate_error, rate_err[i] == rate_err[i] ? rate_err[i] : inf);
        if (status[i] == FlowStatus::escaped) ++rep.escapes;
        if (status[i] == FlowStatus::step_underflow) ++rep.underflows;
    }
    rep.pass = rep.max_residual <= tol && rep.min_factor > 0.0 && rep.escapes == 0 && rep.underflows == 0 &&
               (!opt.check_rate || rep.max_rate_error <= opt.rate_tolerance);
    return rep;
}

} // namespace moser

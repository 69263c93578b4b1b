#pragma once

// Moser vector fields X_t with X_t⌟ω_t = −σ_t and numerical certification of
// φ_t*ω_t = ω_0 along their flows.

#include "moser/flow.hpp"
#include "moser/norms.hpp"
#include "moser/parallel.hpp"

#include <limits>
#include <vector>

namespace moser {

/// X_t = W_t⁻¹ s_t where W_t is the coefficient matrix of ω_t and s_t that of σ_t.
/// The Jacobian is exact when both families carry exact Jacobians.
inline TimeVectorField build_moser_field(const TimeForm& omega, const TimeForm& sigma,
                                         double tol_singular = kDefaultSingularTol) {
    if (omega.degree() != 2) throw DegreeError("Moser field needs a 2-form family");
    if (sigma.degree() != 1) throw DegreeError("Moser field needs a 1-form primitive");
    detail::require_dim(omega.dim(), sigma.dim(), "build_moser_field");
    const int m = omega.dim();
    auto solve = [omega, sigma, m, tol_singular](double t, const Point& x, Matrix* winv_out) {
        const Matrix w = values::two_form_matrix(omega.eval(t, x), m);
        Matrix winv;
        try {
            winv = invert_two_form_matrix(w, x, tol_singular);
        } catch (const SingularForm& e) {
            throw SingularForm("ω_t is degenerate at t = " + std::to_string(t) + ", x = " + detail::format_point(x),
                               x, e.margin());
        }
        const Vector v = winv * sigma.eval(t, x);
        if (winv_out) *winv_out = winv;
        return v;
    };
    TimeVectorField X{m, [solve](double t, const Point& x) { return solve(t, x, nullptr); }, {}};
    if (omega.has_jacobian() && sigma.has_jacobian()) {
        X.jac = [solve, omega, sigma, m](double t, const Point& x) {
            Matrix winv;
            const Vector v = solve(t, x, &winv);
            const Matrix jw = omega.jacobian(t, x);
            Matrix rhs = sigma.jacobian(t, x);
            for (int j = 0; j < m; ++j) rhs.col(j) -= values::two_form_matrix(jw.col(j), m) * v;
            return Matrix(winv * rhs);
        };
    }
    return X;
}

/// max over x of |X⌟ω_t + σ_t| at time t; the defining-equation residual.
inline double moser_equation_residual(const TimeVectorField& X, const TimeForm& omega, const TimeForm& sigma, double t,
                                      std::span<const Point> points) {
    double worst = 0.0;
    for (const auto& x : points) {
        const Vector r = values::contract(X(t, x), omega.eval(t, x), 2, omega.dim()) + sigma.eval(t, x);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

struct ProbeSpec {
    std::vector<double> times{0.0, 0.5, 1.0};
    double tolerance = 1e-5;   // relative to max(1, |ω̇|)
    std::size_t max_points = 0; // 0 = all verification points
};

/// Largest relative defect |dσ_t − ω̇_t| / max(1, |ω̇_t|) at the probe points.
inline double primitive_defect(const TimeForm& omega, const TimeForm& sigma, std::span<const Point> points,
                               const std::vector<double>& times) {
    const TimeForm dsigma = exterior_derivative(
        sigma, sigma.has_jacobian() ? DerivativeScheme::exact() : DerivativeScheme::central());
    const TimeForm omega_dot = omega.time_derivative();
    double worst = 0.0;
    for (double t : times)
        for (const auto& x : points) {
            const Vector a = dsigma.eval(t, x);
            const Vector b = omega_dot.eval(t, x);
            const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
            worst = std::max(worst, (a - b).cwiseAbs().maxCoeff() / scale);
        }
    return worst;
}

/// Throws PrimitiveMismatch unless dσ_t = ω̇_t at the probe points; returns the defect.
inline double check_primitive(const TimeForm& omega, const TimeForm& sigma, std::span<const Point> points,
                              const ProbeSpec& probe) {
    const std::size_t n = probe.max_points == 0 ? points.size() : std::min(points.size(), probe.max_points);
    const double defect = primitive_defect(omega, sigma, points.first(n), probe.times);
    if (!(defect <= probe.tolerance))
        throw PrimitiveMismatch("dσ_t differs from dω_t/dt: relative defect " + std::to_string(defect), defect);
    return defect;
}

struct VerificationReport {
    std::vector<Point> points;
    std::vector<double> times;
    std::vector<std::vector<double>> residuals; // [point][time]; +inf where the flow did not reach t
    std::vector<FlowRecord> flows;
    double max_residual = 0.0;
    double tolerance = 0.0;
    double probe_defect = 0.0;
    double max_arc_length = 0.0;
    std::size_t escapes = 0;
    std::size_t underflows = 0;
    NormKind norm_kind = NormKind::l1_operator;
    bool pass = false;
};

struct VerifyOptions {
    IntegratorSpec integrator{};
    ProbeSpec probe{};
    NormKind norm_kind = NormKind::l1_operator;
    double tol_singular = kDefaultSingularTol;
    bool keep_flows = true;
    unsigned threads = 0;
};

/// Residual ‖Jᵀ W_t(γ(t)) J − W_0(x)‖ of the pulled-back form at one point and time.
inline double pullback_residual(const TimeForm& omega, double t, const Point& x, const Point& gamma, const Matrix& J,
                                NormKind kind) {
    const int m = omega.dim();
    const Matrix w_t = values::two_form_matrix(omega.eval(t, gamma), m);
    const Matrix w_0 = values::two_form_matrix(omega.eval(0.0, x), m);
    return matrix_norm(J.transpose() * w_t * J - w_0, kind);
}

/// Flows every sample point under the Moser field and measures φ_t*ω_t − ω_0 on the time grid.
inline VerificationReport verify_strong_isotopy(const TimeForm& omega, const TimeForm& sigma,
                                                const std::vector<Point>& points, const std::vector<double>& times,
                                                double tol, const VerifyOptions& opt = {}) {
    if (points.empty()) throw Error("verification needs at least one sample point");
    for (double t : times)
        if (!(t >= 0.0 && t <= 1.0)) throw Error("verification times must lie in [0, 1]");
    VerificationReport rep;
    rep.points = points;
    rep.times = times;
    rep.tolerance = tol;
    rep.norm_kind = opt.norm_kind;
    rep.probe_defect = check_primitive(omega, sigma, points, opt.probe);

    const TimeVectorField X = build_moser_field(omega, sigma, opt.tol_singular);
    FlowWindow window{0.0, times.empty() ? 0.0 : *std::max_element(times.begin(), times.end()), times};
    std::vector<FlowRecord> flows(points.size());
    rep.residuals.assign(points.size(), std::vector<double>(times.size(), std::numeric_limits<double>::infinity()));
    parallel_for(
        points.size(),
        [&](std::size_t i) {
            flows[i] = integrate_flow(X, points[i], opt.integrator, window);
            for (std::size_t j = 0; j < times.size(); ++j) {
                const long idx = flows[i].index_of(times[j]);
                if (idx < 0) continue;
                rep.residuals[i][j] = pullback_residual(omega, times[j], points[i], flows[i].points[idx],
                                                        flows[i].jacobians[idx], opt.norm_kind);
            }
        },
        opt.threads);

    rep.max_residual = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (double r : rep.residuals[i]) rep.max_residual = std::max(rep.max_residual, std::isnan(r) ? INFINITY : r);
        rep.max_arc_length = std::max(rep.max_arc_length, flows[i].arc_length);
        if (flows[i].status == FlowStatus::escaped) ++rep.escapes;
        if (flows[i].status == FlowStatus::step_underflow) ++rep.underflows;
    }
    rep.pass = rep.max_residual <= tol && rep.escapes == 0 && rep.underflows == 0;
    if (opt.keep_flows) rep.flows = std::move(flows);
    return rep;
}

} // namespace moser

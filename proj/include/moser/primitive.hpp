#pragma once

// Right inverses of d: the radial (Euler-field) homotopy on R^m and fiber
// integration along the last coordinate of a product chart N × J.

#include "moser/norms.hpp"
#include "moser/quadrature.hpp"

#include <optional>

namespace moser {

/// Optional set on which a form is undefined; radial primitives refuse rays that meet it.
using SingularSet = std::function<bool(const Point&)>;

namespace detail {

inline void check_ray(const SingularSet& singular, const Point& x, const QuadratureSpec& q) {
    if (!singular) return;
    if (singular(Point::Zero(x.size()))) throw EvaluationError("radial primitive: ray through the declared singular set at the origin", x);
    for (double node : gauss_legendre(q.nodes).nodes)
        if (singular((0.5 + 0.5 * node) * x)) throw EvaluationError("radial primitive: ray meets the declared singular set", x);
}

/// (Ia)(x) = ∫_0^1 s^{k-1} a(sx)(x, ·, …) ds and, when available, its x-Jacobian.
inline Vector radial_primitive_value(const CoeffFn& a, int k, int m, const Point& x, const QuadratureSpec& q) {
    return integrate(
        [&](double s) {
            const Vector v = a(s * x);
            require_finite(v, s * x, "form coefficient");
            return Vector(std::pow(s, k - 1) * values::contract(x, v, k, m));
        },
        0.0, 1.0, q);
}

inline Matrix radial_primitive_jacobian(const CoeffFn& a, const CoeffJacFn& ja, int k, int m, const Point& x,
                                        const QuadratureSpec& q) {
    const auto rows = static_cast<Eigen::Index>(basis(m, k - 1).size());
    const Vector flat = integrate(
        [&](double s) {
            const Point y = s * x;
            const Vector v = a(y);
            const Matrix jv = ja(y);
            Vector out(rows * m);
            const double w = std::pow(s, k - 1);
            for (int j = 0; j < m; ++j)
                out.segment(j * rows, rows) =
                    w * (values::contract(Vector::Unit(m, j), v, k, m) + s * values::contract(x, jv.col(j), k, m));
            return out;
        },
        0.0, 1.0, q);
    return Eigen::Map<const Matrix>(flat.data(), rows, m);
}

} // namespace detail

/// Radial homotopy primitive of a k-form, k ≥ 1: d(Ia) = a for exact a. For k = 2 this is
/// I a(x) = ∫_0^1 E(sx) ⌟ a(sx) ds. The result carries an exact Jacobian when `a` does.
inline KForm euler_primitive(const KForm& a, const QuadratureSpec& q = {}, SingularSet singular = {}) {
    q.validate();
    const int m = a.dim(), k = a.degree();
    if (k < 1) throw DegreeError("euler_primitive needs degree ≥ 1");
    const CoeffFn c = a.coeff_fn();
    CoeffJacFn jac;
    if (a.has_jacobian()) {
        const CoeffJacFn ja = a.jacobian_fn();
        jac = [c, ja, k, m, q, singular](const Point& x) {
            detail::check_ray(singular, x, q);
            return detail::radial_primitive_jacobian(c, ja, k, m, x, q);
        };
    }
    return KForm(
        m, k - 1,
        [c, k, m, q, singular](const Point& x) {
            detail::check_ray(singular, x, q);
            return detail::radial_primitive_value(c, k, m, x, q);
        },
        jac);
}

/// σ_t = I ω̇_t pointwise in t.
inline TimeForm euler_primitive(const TimeForm& a, const QuadratureSpec& q = {}, SingularSet singular = {}) {
    q.validate();
    const int m = a.dim(), k = a.degree();
    if (k < 1) throw DegreeError("euler_primitive needs degree ≥ 1");
    TimeCoeffJacFn jac;
    if (a.has_jacobian()) {
        jac = [a, k, m, q, singular](double t, const Point& x) {
            detail::check_ray(singular, x, q);
            const auto& fc = a.coeff_fn();
            const auto& fj = a.jacobian_fn();
            return detail::radial_primitive_jacobian([&](const Point& y) { return fc(t, y); },
                                                     [&](const Point& y) { return fj(t, y); }, k, m, x, q);
        };
    }
    return TimeForm(
        m, k - 1,
        [a, k, m, q, singular](double t, const Point& x) {
            detail::check_ray(singular, x, q);
            const auto& fc = a.coeff_fn();
            return detail::radial_primitive_value([&](const Point& y) { return fc(t, y); }, k, m, x, q);
        },
        jac);
}

// ---------------------------------------------------------------------------

struct CylinderPrimitiveSpec {
    double r0 = 1.0;                  // base slice {r = r0}
    std::optional<KForm> base;        // primitive of ι*a on the slice (dim m-1, degree k-1)
    QuadratureSpec quadrature;
    std::vector<Point> probes;        // residual check points; empty disables the check
    double residual_tol = 1e-6;
};

namespace detail {

/// Lift a form on the slice R^{m-1} (first m-1 coordinates) to R^m.
inline Vector lift_slice_value(const Vector& v, int k, int m) {
    const auto& src = basis(m - 1, k);
    const auto& dst = basis(m, k);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dst.size()));
    for (std::size_t i = 0; i < src.size(); ++i) out[dst.rank(src.masks[i])] = v[static_cast<Eigen::Index>(i)];
    return out;
}

inline Point slice_of(const Point& x) { return x.head(x.size() - 1); }

} // namespace detail

/// Fiber primitive on N × J (last coordinate r):
///   (Ia)(y, r) = ∫_{r0}^r ∂_s ⌟ a(y, s) ds + base(y).
/// d(Ia) = a when a is closed and `base` is a primitive of the slice restriction.
inline KForm cylinder_primitive(const KForm& a, const CylinderPrimitiveSpec& spec) {
    spec.quadrature.validate();
    const int m = a.dim(), k = a.degree();
    if (k < 1) throw DegreeError("cylinder_primitive needs degree ≥ 1");
    if (m < 2) throw DimensionMismatch("cylinder_primitive needs a product chart of dimension ≥ 2");
    if (spec.base) {
        if (spec.base->dim() != m - 1) throw DimensionMismatch("slice primitive must live on the (m-1)-dimensional slice");
        if (spec.base->degree() != k - 1) throw DegreeError("slice primitive must have degree k-1");
    }
    const CoeffFn c = a.coeff_fn();
    const Vector er = Vector::Unit(m, m - 1);
    const double r0 = spec.r0;
    const QuadratureSpec q = spec.quadrature;
    const std::optional<KForm> base = spec.base;

    auto value = [c, er, r0, q, base, k, m](const Point& x) {
        const double r = x[m - 1];
        Vector out = integrate(
            [&](double u) {
                Point y = x;
                y[m - 1] = r0 + u * (r - r0);
                const Vector v = c(y);
                detail::require_finite(v, y, "form coefficient");
                return Vector((r - r0) * values::contract(er, v, k, m));
            },
            0.0, 1.0, q);
        if (base) out += detail::lift_slice_value(base->eval(detail::slice_of(x)), k - 1, m);
        return out;
    };

    CoeffJacFn jac;
    if (a.has_jacobian() && (!base || base->has_jacobian())) {
        const CoeffJacFn ja = a.jacobian_fn();
        jac = [c, ja, er, r0, q, base, k, m](const Point& x) {
            const double r = x[m - 1];
            const auto rows = static_cast<Eigen::Index>(basis(m, k - 1).size());
            const Vector flat = integrate(
                [&](double u) {
                    Point y = x;
                    y[m - 1] = r0 + u * (r - r0);
                    const Matrix jv = ja(y);
                    Vector out = Vector::Zero(rows * m);
                    for (int j = 0; j + 1 < m; ++j)
                        out.segment(j * rows, rows) = (r - r0) * values::contract(er, jv.col(j), k, m);
                    return out;
                },
                0.0, 1.0, q);
            Matrix J = Eigen::Map<const Matrix>(flat.data(), rows, m);
            J.col(m - 1) = values::contract(er, c(x), k, m);
            if (base) {
                const Matrix jb = base->jacobian(detail::slice_of(x));
                for (int j = 0; j + 1 < m; ++j) J.col(j) += detail::lift_slice_value(jb.col(j), k - 1, m);
            }
            return J;
        };
    }

    KForm result(m, k - 1, value, jac);
    if (!spec.probes.empty()) {
        const KForm d = result.has_jacobian() ? exterior_derivative(result) : exterior_derivative(result, DerivativeScheme::central());
        double worst = 0.0;
        for (const auto& x : spec.probes) {
            const Vector av = a.eval(x);
            worst = std::max(worst, (d.eval(x) - av).cwiseAbs().maxCoeff() / std::max(1.0, av.cwiseAbs().maxCoeff()));
        }
        if (worst > spec.residual_tol) {
            if (!base)
                throw MissingBasePrimitive("cylinder primitive residual " + std::to_string(worst) +
                                               " exceeds tolerance; the slice restriction needs a supplied primitive",
                                           worst);
            throw PrimitiveMismatch("cylinder primitive residual " + std::to_string(worst) + " exceeds tolerance", worst);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

struct LengthBoundSpec {
    double radius = 1.0;
    SamplerSpec sampler{1, 2048};
    QuadratureSpec quadrature{16, false}; // Gauss–Legendre nodes in t
    int s_nodes = 17;                     // equispaced s ∈ [0, 1] for the inner sup
};

/// ∫_0^1 sup_{|x| ≤ R, s ∈ [0,1]} s|x| |ω_t⁻¹(x)| |ω̇_t(sx)| dt with Euclidean operator norms:
/// an a priori bound on the length of Moser flow lines of σ_t = I ω̇_t started in the ball.
inline double naive_length_bound(const TimeForm& omega, const LengthBoundSpec& spec) {
    spec.quadrature.validate();
    if (omega.degree() != 2) throw DegreeError("naive_length_bound needs a family of 2-forms");
    if (!(spec.radius > 0.0) || spec.s_nodes < 2) throw Error("invalid length-bound region");
    const int m = omega.dim();
    auto pts = ball_points(m, spec.radius, spec.sampler);
    for (const auto& d : sphere_points(m, spec.sampler)) pts.push_back(spec.radius * d);
    const TimeForm dot = omega.time_derivative();
    const auto& gl = gauss_legendre(spec.quadrature.nodes);
    double total = 0.0;
    for (std::size_t n = 0; n < gl.nodes.size(); ++n) {
        const double t = 0.5 + 0.5 * gl.nodes[n];
        std::vector<double> vals(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            const Point& x = pts[i];
            const Matrix inv = invert_two_form_matrix(values::two_form_matrix(omega.eval(t, x), m), x);
            double inner = 0.0;
            for (int j = 0; j < spec.s_nodes; ++j) {
                const double s = static_cast<double>(j) / (spec.s_nodes - 1);
                inner = std::max(inner, s * matrix_norm(values::two_form_matrix(dot.eval(t, s * x), m), NormKind::l2_operator));
            }
            vals[i] = x.norm() * matrix_norm(inv, NormKind::l2_operator) * inner;
        });
        double sup = 0.0;
        for (double v : vals) sup = std::max(sup, v);
        total += 0.5 * gl.weights[n] * sup;
    }
    return total;
}

} // namespace moser

#pragma once

// Worked families: a product family, a radial pullback with growing derivative,
// a rotated Liouville end with divergent log-variation, a closed-form shrinking
// family and the inversion chart x ↦ x/|x|².

#include "moser/contact.hpp"
#include "moser/form_spec.hpp"
#include "moser/path_method.hpp"
#include "moser/primitive.hpp"

#include <map>
#include <sstream>

namespace moser {

/// Where a case is sampled: the shell r_inner ≤ |x| ≤ r_outer (a ball when r_inner = 0).
struct Region {
    double r_inner = 0.0;
    double r_outer = 1.0;

    std::vector<Point> sample(int m, const SamplerSpec& spec) const { return shell_points(m, r_inner, r_outer, spec); }
    bool contains(const Point& x) const { return x.norm() >= r_inner && x.norm() <= r_outer; }
};

/// A value a case is expected to meet, tagged with its origin
/// ("closed_form", "published_bound", "fit" or "trivial").
struct Expectation {
    std::string name;
    double value = 0.0;
    std::string provenance;
};

struct SelfTest {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct GalleryCase {
    std::string name;
    int dim = 0;
    TimeForm omega;
    std::optional<TimeForm> sigma;
    Region region;
    RadialChart chart = RadialChart::euclidean;
    SingularSet singular;
    std::map<std::string, double> params;
    std::vector<Expectation> expectations;
    std::vector<SelfTest> self_tests;

    bool self_tests_pass() const {
        return std::all_of(self_tests.begin(), self_tests.end(), [](const SelfTest& s) { return s.pass; });
    }
};

namespace detail {

inline SelfTest self_test(std::string name, double value, double tol) {
    return {std::move(name), value, tol, value <= tol};
}

inline void require_self_tests(const GalleryCase& c) {
    for (const auto& s : c.self_tests)
        if (!s.pass)
            throw Error("gallery case '" + c.name + "' failed self-test " + s.name + " (" + std::to_string(s.value) +
                        " > " + std::to_string(s.tolerance) + ")");
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

/// Largest |a − b| over probe points, relative to max(1, |b|).
inline double max_rel_diff(const std::function<Vector(const Point&)>& a, const std::function<Vector(const Point&)>& b,
                           const std::vector<Point>& pts) {
    double worst = 0.0;
    for (const auto& x : pts) {
        const Vector va = a(x), vb = b(x);
        worst = std::max(worst, (va - vb).cwiseAbs().maxCoeff() / std::max(1.0, vb.cwiseAbs().maxCoeff()));
    }
    return worst;
}

inline double max_abs(const std::function<Vector(const Point&)>& a, const std::vector<Point>& pts) {
    double worst = 0.0;
    for (const auto& x : pts) worst = std::max(worst, a(x).cwiseAbs().maxCoeff());
    return worst;
}

/// Relative size of dω at probe points (closedness check).
inline double closedness_defect(const KForm& omega, const std::vector<Point>& pts, DerivativeScheme scheme) {
    const KForm d = exterior_derivative(omega, scheme);
    double worst = 0.0;
    for (const auto& x : pts)
        worst = std::max(worst, d.eval(x).cwiseAbs().maxCoeff() / std::max(1.0, omega.eval(x).cwiseAbs().maxCoeff()));
    return worst;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Product family ω_t = a_1 f(t, x_1, y_1) dx_1∧dy_1 + Σ_{i≥2} a_i dx_i∧dy_i.

/// `f1` is an expression in t, x1, x2 (the first symplectic pair); the default is √(x1²+x2²+1+t²).
inline GalleryCase case_product(int n, const std::vector<double>& a, const std::string& f1 = "sqrt(x1^2 + x2^2 + 1 + t^2)") {
    if (n < 2) throw Error("product case needs n ≥ 2");
    if (static_cast<int>(a.size()) != n) throw Error("product case needs exactly n coefficients");
    for (double ai : a)
        if (ai == 0.0) throw Error("product case coefficients must be nonzero");
    const int m = 2 * n;
    const Expr f = parse_expr(f1, m);
    if (f.max_variable() > 2) throw Error("the first factor may depend on t, x1 and x2 only");
    std::vector<Expr> c(basis(m, 2).size(), Expr::constant(0.0));
    c[basis(m, 2).rank(0b11)] = Expr::constant(a[0]) * f;
    for (int i = 1; i < n; ++i) c[basis(m, 2).rank((1u << (2 * i)) | (1u << (2 * i + 1)))] = Expr::constant(a[i]);
    GalleryCase g;
    g.name = "product";
    g.dim = m;
    g.omega = TimeForm::symbolic(m, 2, c);
    g.sigma = euler_primitive(g.omega.time_derivative());
    g.region = {0.0, 3.0};
    g.params = {{"n", static_cast<double>(n)}};
    for (int i = 0; i < n; ++i) g.params["a" + std::to_string(i + 1)] = a[i];
    g.expectations = {{"coefficient_12_t0_origin", a[0], "published_bound"},
                      {"dot_coefficient_12_t1_origin", a[0] / std::sqrt(2.0), "closed_form"}};
    const Point origin = Point::Zero(m);
    const int r12 = static_cast<int>(basis(m, 2).rank(0b11));
    if (f1 == "sqrt(x1^2 + x2^2 + 1 + t^2)") {
        g.self_tests.push_back(detail::self_test("coefficient at t=0, x=0", std::abs(g.omega.eval(0.0, origin)[r12] - a[0]), 1e-14));
        g.self_tests.push_back(detail::self_test(
            "time derivative at t=1, x=0", std::abs(g.omega.time_derivative().eval(1.0, origin)[r12] - a[0] / std::sqrt(2.0)), 1e-14));
    }
    const auto probes = ball_points(m, 3.0, {7, 16});
    double min_margin = std::numeric_limits<double>::infinity();
    for (double t : {0.0, 0.5, 1.0})
        for (const auto& x : probes) min_margin = std::min(min_margin, values::nondegeneracy_margin(values::two_form_matrix(g.omega.eval(t, x), m)));
    g.self_tests.push_back(detail::self_test("nondegeneracy (negated margin)", -min_margin, -kDefaultSingularTol));
    detail::require_self_tests(g);
    return g;
}

// ---------------------------------------------------------------------------
// Radial pullback ω = φ̂*ω_0 with φ̂(x) = g(|x|) x, g = φ(r)/r, φ(r) = r^p for r ≥ 1.2.

namespace detail {

/// g = φ(r)/r with g = 1 on [0, lo], g = r^{p-1} on [hi, ∞) and a quintic blend in
/// between; returns g, g', g''.
struct RadialProfile {
    double p = 2.0;
    double lo = 1.0;
    double hi = 1.2;

    std::array<double, 3> operator()(double r) const {
        if (r <= lo) return {1.0, 0.0, 0.0};
        const double P = std::pow(r, p - 1.0) - 1.0;
        const double P1 = (p - 1.0) * std::pow(r, p - 2.0);
        const double P2 = (p - 1.0) * (p - 2.0) * std::pow(r, p - 3.0);
        if (r >= hi) return {P + 1.0, P1, P2};
        const double w = hi - lo, u = (r - lo) / w;
        const double S = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
        const double S1 = 30.0 * u * u * (1.0 - u) * (1.0 - u) / w;
        const double S2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (w * w);
        return {1.0 + S * P, S1 * P + S * P1, S2 * P + 2.0 * S1 * P1 + S * P2};
    }
};

/// Cubic smoothstep on [½, 1] (max slope 3); returns λ, λ', λ''.
inline std::array<double, 3> cutoff(double r) {
    if (r <= 0.5) return {0.0, 0.0, 0.0};
    if (r >= 1.0) return {1.0, 0.0, 0.0};
    const double v = 2.0 * r - 1.0;
    return {v * v * (3.0 - 2.0 * v), 12.0 * v * (1.0 - v), 24.0 * (1.0 - 2.0 * v)};
}

} // namespace detail

/// φ̂(x) = g(|x|) x with exact Jacobian g I + g' x xᵀ/|x|.
inline SmoothMap radial_map(double p) {
    const detail::RadialProfile prof{p};
    return {4, [prof](const Point& x) { return Point(prof(x.norm())[0] * x); },
            [prof](const Point& x) {
                const double r = x.norm();
                const auto g = prof(r);
                Matrix J = g[0] * Matrix::Identity(4, 4);
                if (r > 0.0) J += (g[1] / r) * x * x.transpose();
                return J;
            }};
}

/// ω = φ̂*ω_0 from the closed-form coefficients A = g², B = g g'/r, with exact Jacobian.
inline KForm radial_pullback_form(double p) {
    const detail::RadialProfile prof{p};
    auto parts = [prof](double r) {
        const auto g = prof(r);
        const double A = g[0] * g[0];
        double B = 0.0, dB = 0.0;
        if (r > prof.lo) {
            B = g[0] * g[1] / r;
            dB = (g[1] * g[1] + g[0] * g[2]) / r - g[0] * g[1] / (r * r);
        }
        return std::array<double, 3>{A, B, dB};
    };
    auto coeff = [parts](const Point& x) {
        const auto [A, B, dB] = parts(x.norm());
        const double P1 = x[0] * x[0] + x[1] * x[1], P2 = x[2] * x[2] + x[3] * x[3];
        const double U = x[0] * x[3] - x[1] * x[2], V = x[0] * x[2] + x[1] * x[3];
        Vector c(6);
        c << A + B * P1, -B * U, B * V, -B * V, -B * U, A + B * P2;
        return c;
    };
    auto jac = [parts](const Point& x) {
        const double r = x.norm();
        const auto [A, B, dB] = parts(r);
        const double P1 = x[0] * x[0] + x[1] * x[1], P2 = x[2] * x[2] + x[3] * x[3];
        const double U = x[0] * x[3] - x[1] * x[2], V = x[0] * x[2] + x[1] * x[3];
        const Vector gA = 2.0 * B * x;
        const Vector gB = r > 0.0 ? Vector(dB / r * x) : Vector(Vector::Zero(4));
        Vector gP1(4), gP2(4), gU(4), gV(4);
        gP1 << 2 * x[0], 2 * x[1], 0, 0;
        gP2 << 0, 0, 2 * x[2], 2 * x[3];
        gU << x[3], -x[2], -x[1], x[0];
        gV << x[2], x[3], x[0], x[1];
        Matrix J(6, 4);
        J.row(0) = (gA + P1 * gB + B * gP1).transpose();
        J.row(1) = -(U * gB + B * gU).transpose();
        J.row(2) = (V * gB + B * gV).transpose();
        J.row(3) = -(V * gB + B * gV).transpose();
        J.row(4) = -(U * gB + B * gU).transpose();
        J.row(5) = (gA + P2 * gB + B * gP2).transpose();
        return J;
    };
    return KForm(4, 2, coeff, jac);
}

/// σ = K λ(r) r^{2p-1} (dx_1 + dx_2 + dx_3 + dx_4), K = cp/(6(2p−1)²); returns σ and dσ.
inline std::pair<KForm, KForm> radial_pullback_primitive(double p, double c) {
    const double K = c * p / (6.0 * (2.0 * p - 1.0) * (2.0 * p - 1.0));
    const double q = 2.0 * p - 1.0;
    // F = K λ r^q and its first two r-derivatives.
    auto F = [K, q](double r) {
        const auto l = detail::cutoff(r);
        const double rq = std::pow(r, q);
        return std::array<double, 3>{K * l[0] * rq, K * (l[1] * rq + q * l[0] * std::pow(r, q - 1.0)),
                                     K * (l[2] * rq + 2.0 * q * l[1] * std::pow(r, q - 1.0) +
                                          q * (q - 1.0) * l[0] * std::pow(r, q - 2.0))};
    };
    KForm sigma(
        4, 1, [F](const Point& x) { return Vector(Vector::Constant(4, F(x.norm())[0])); },
        [F](const Point& x) {
            const double r = x.norm();
            Matrix J = Matrix::Zero(4, 4);
            if (r > 0.5) {
                const double f1 = F(r)[1];
                for (int i = 0; i < 4; ++i) J.row(i) = (f1 / r) * x.transpose();
            }
            return J;
        });
    // dσ = Q(r) Σ_{i<j} (x_i − x_j) dx_i∧dx_j with Q = F'/r.
    auto Q = [F](double r) {
        if (r <= 0.5) return std::array<double, 2>{0.0, 0.0};
        const auto f = F(r);
        return std::array<double, 2>{f[1] / r, (f[2] * r - f[1]) / (r * r)};
    };
    const BasisTable* b = &basis(4, 2);
    KForm dsigma(
        4, 2,
        [Q, b](const Point& x) {
            const double qv = Q(x.norm())[0];
            Vector c(6);
            for (std::size_t n = 0; n < 6; ++n) {
                const int i = std::countr_zero(b->masks[n]);
                const int j = 31 - std::countl_zero(b->masks[n]);
                c[static_cast<Eigen::Index>(n)] = qv * (x[i] - x[j]);
            }
            return c;
        },
        [Q, b](const Point& x) {
            const double r = x.norm();
            const auto qq = Q(r);
            Matrix J = Matrix::Zero(6, 4);
            for (std::size_t n = 0; n < 6; ++n) {
                const int i = std::countr_zero(b->masks[n]);
                const int j = 31 - std::countl_zero(b->masks[n]);
                const auto row = static_cast<Eigen::Index>(n);
                if (r > 0.0) J.row(row) = (qq[1] / r * (x[i] - x[j])) * x.transpose();
                J(row, i) += qq[0];
                J(row, j) -= qq[0];
            }
            return J;
        });
    return {sigma, dsigma};
}

/// ω_t = ω + t dσ with σ_t = σ.
inline GalleryCase case_radial_pullback(double p, double c) {
    if (!(p > 1.0)) throw Error("radial_pullback needs p > 1");
    if (!(c > 0.0 && c < 1.0)) throw Error("radial_pullback needs 0 < c < 1");
    const KForm omega = radial_pullback_form(p);
    const auto [sigma, dsigma] = radial_pullback_primitive(p, c);
    GalleryCase g;
    g.name = "radial_pullback";
    g.dim = 4;
    g.omega = TimeForm(
        4, 2, [omega, dsigma](double t, const Point& x) { return Vector(omega.eval(x) + t * dsigma.eval(x)); },
        [omega, dsigma](double t, const Point& x) { return Matrix(omega.jacobian(x) + t * dsigma.jacobian(x)); },
        std::make_shared<const TimeForm>(TimeForm::constant(dsigma)));
    g.sigma = TimeForm::constant(sigma);
    g.region = {1.0, 4.0};
    g.params = {{"p", p}, {"c", c}};
    g.expectations = {{"inverse_norm_coefficient", 2.0 - 1.0 / p, "published_bound"},
                      {"inverse_norm_exponent", 2.0 - 2.0 * p, "published_bound"},
                      {"dsigma_norm_coefficient", c * p / (2.0 * p - 1.0), "published_bound"},
                      {"dsigma_norm_exponent", 2.0 * p - 2.0, "published_bound"},
                      {"pointwise_product", c, "published_bound"},
                      {"total_bound", c / (1.0 - c), "published_bound"},
                      {"bound_radius_min", 1.2, "trivial"}};

    auto probes = shell_points(4, 0.2, 5.0, {11, 64});
    const SmoothMap phi = radial_map(p);
    const KForm pulled = pullback(phi, standard_symplectic(4));
    g.self_tests.push_back(detail::self_test(
        "closed form matches pullback", detail::max_rel_diff(omega.coeff_fn(), pulled.coeff_fn(), probes), 1e-12));
    g.self_tests.push_back(detail::self_test(
        "dσ closed form matches differentiated σ",
        detail::max_rel_diff(dsigma.coeff_fn(), exterior_derivative(sigma, DerivativeScheme::central()).coeff_fn(), probes), 1e-6));
    g.self_tests.push_back(detail::self_test("ω closed", detail::closedness_defect(omega, probes, DerivativeScheme::exact()), 1e-12));
    g.self_tests.push_back(detail::self_test(
        "ω Jacobian matches differences",
        detail::max_rel_diff([&](const Point& x) { Matrix j = omega.jacobian(x); return Vector(Eigen::Map<Vector>(j.data(), j.size())); },
                             [&](const Point& x) { Matrix j = central_jacobian(omega.coeff_fn(), x); return Vector(Eigen::Map<Vector>(j.data(), j.size())); },
                             probes),
        1e-6));
    g.self_tests.push_back(detail::self_test(
        "φ Jacobian matches differences", phi.jacobian_consistency(probes), 1e-6));
    detail::require_self_tests(g);
    return g;
}

// ---------------------------------------------------------------------------
// Rotated Liouville end: ω = d(|x| α) on R⁴∖{0}, α = f α_0 with α_0 the standard
// contact form pulled back along x ↦ x/|x|, ω_t = φ_t*ω with φ_t the rotation by
// t (log|x|)^p in the (x_1, y_1)-plane.

/// α = f α_0 with f = 2x̂_1² + ŷ_1² + κ(x̂_2² + ŷ_2²); κ > 0 keeps α nonvanishing on S³.
inline KForm liouville_form(double kappa = 1.0) {
    if (!(kappa >= 0.0)) throw Error("regularization κ must be nonnegative");
    // |x| α = h(x)·(−x2 dx1 + x1 dx2 − x4 dx3 + x3 dx4), h = (2x1²+x2²+κ(x3²+x4²)) / (2|x|³).
    const std::string h = "(2*x1^2 + x2^2 + " + detail::fmt(kappa) + "*(x3^2 + x4^2)) / (2*(x1^2 + x2^2 + x3^2 + x4^2)^1.5)";
    const std::vector<Expr> beta{parse_expr("-x2*" + h, 4), parse_expr("x1*" + h, 4), parse_expr("-x4*" + h, 4),
                                 parse_expr("x3*" + h, 4)};
    return exterior_derivative(KForm::symbolic(4, 1, beta));
}

/// Rotation by θ = t (log|x|)^p in the (1,2)-plane for |x| > 1; identity inside.
inline SmoothMap liouville_rotation_map(double p, double t) {
    auto angle = [p, t](const Point& x) {
        const double rho = x.norm();
        if (rho <= 1.0) return std::array<double, 2>{0.0, 0.0};
        const double L = std::log(rho);
        return std::array<double, 2>{t * std::pow(L, p), t * p * std::pow(L, p - 1.0) / (rho * rho)};
    };
    return {4,
            [angle](const Point& x) {
                const double th = angle(x)[0], c = std::cos(th), s = std::sin(th);
                Point y = x;
                y[0] = c * x[0] - s * x[1];
                y[1] = s * x[0] + c * x[1];
                return y;
            },
            [angle](const Point& x) {
                const auto a = angle(x);
                const double c = std::cos(a[0]), s = std::sin(a[0]);
                Matrix J = Matrix::Identity(4, 4);
                J(0, 0) = c;
                J(0, 1) = -s;
                J(1, 0) = s;
                J(1, 1) = c;
                // ∂θ/∂x = a[1]·x
                J.row(0) += (-s * x[0] - c * x[1]) * a[1] * x.transpose();
                J.row(1) += (c * x[0] - s * x[1]) * a[1] * x.transpose();
                return J;
            }};
}

inline GalleryCase case_liouville_rotation(double p, double kappa = 1.0) {
    if (!(p >= 1.0)) throw Error("liouville_rotation needs p ≥ 1");
    const KForm omega = liouville_form(kappa);
    GalleryCase g;
    g.name = "liouville_rotation";
    g.dim = 4;
    g.omega = TimeForm(4, 2, [omega, p](double t, const Point& x) {
        const SmoothMap phi = liouville_rotation_map(p, t);
        return values::pullback(omega.eval(phi(x)), phi.jacobian(x), 2, 4);
    });
    g.region = {std::exp(1.0), std::exp(6.0)};
    g.chart = RadialChart::cylindrical_log;
    g.singular = [](const Point& x) { return x.norm() <= 1.0; };
    g.params = {{"p", p}, {"kappa", kappa}};
    g.expectations = {{"product_exponent", p, "fit"}, {"inverse_log_slope", -1.0, "fit"}};
    const auto probes = shell_points(4, std::exp(1.0), std::exp(3.0), {13, 24});
    g.self_tests.push_back(detail::self_test("ω closed", detail::closedness_defect(omega, probes, DerivativeScheme::exact()), 1e-12));
    double worst = 0.0;
    for (double t : {0.25, 0.5})
        worst = std::max(worst, detail::closedness_defect(g.omega.at(t), probes, DerivativeScheme::central()));
    g.self_tests.push_back(detail::self_test("ω_t closed", worst, 1e-5));
    g.self_tests.push_back(detail::self_test(
        "φ_t Jacobian matches differences", liouville_rotation_map(p, 0.5).jacobian_consistency(probes), 1e-6));
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& x : probes) margin = std::min(margin, values::nondegeneracy_margin(values::two_form_matrix(omega.eval(x), 4)));
    g.self_tests.push_back(detail::self_test("ω nondegenerate (negated margin)", -margin, -kDefaultSingularTol));
    detail::require_self_tests(g);
    return g;
}

// ---------------------------------------------------------------------------

/// ω_t = (1+t) dx_1∧dx_2 + dx_3∧dx_4, σ_t from the radial primitive.
inline GalleryCase case_shrinking_form() {
    GalleryCase g;
    g.name = "shrinking";
    g.dim = 4;
    std::vector<Expr> c(6, Expr::constant(0.0));
    c[0] = parse_expr("1 + t", 4);
    c[5] = Expr::constant(1.0);
    g.omega = TimeForm::symbolic(4, 2, c);
    g.sigma = euler_primitive(g.omega.time_derivative());
    g.region = {0.0, 5.0};
    g.expectations = {{"flow_endpoint_x1", std::pow(2.0, -0.5), "closed_form"},
                      {"arc_length_from_(1,1,0,0)", std::sqrt(2.0) * (1.0 - std::pow(2.0, -0.5)), "closed_form"}};
    const auto probes = ball_points(4, 5.0, {17, 16});
    const KForm expected(4, 1, [](const Point& x) {
        Vector v = Vector::Zero(4);
        v[0] = -0.5 * x[1];
        v[1] = 0.5 * x[0];
        return v;
    });
    g.self_tests.push_back(detail::self_test(
        "σ matches ½(x1 dx2 − x2 dx1)",
        detail::max_rel_diff([&](const Point& x) { return g.sigma->eval(0.3, x); }, expected.coeff_fn(), probes), 1e-13));
    detail::require_self_tests(g);
    return g;
}

/// Closed-form flow of the shrinking family: (1+t)^{-1/2}(x1, x2) ⊕ (x3, x4).
inline Point shrinking_flow(const Point& x, double t) {
    Point y = x;
    y.head(2) /= std::sqrt(1.0 + t);
    return y;
}

// ---------------------------------------------------------------------------

/// ι(x) = x/|x|² on R⁴∖{0}; an involution with Jacobian (δ_ij/|x|² − 2x_i x_j/|x|⁴).
inline SmoothMap inversion_map(int m = 4) {
    return {m,
            [](const Point& x) {
                const double n2 = x.squaredNorm();
                if (!(n2 > 0.0)) throw EvaluationError("inversion is undefined at the origin", x);
                return Point(x / n2);
            },
            [m](const Point& x) {
                const double n2 = x.squaredNorm();
                if (!(n2 > 0.0)) throw EvaluationError("inversion is undefined at the origin", x);
                return Matrix(Matrix::Identity(m, m) / n2 - 2.0 * x * x.transpose() / (n2 * n2));
            }};
}

/// Moves a form between the punctured ball and the exterior chart (ι is its own inverse).
inline KForm to_exterior_chart(const KForm& a) { return pullback(inversion_map(a.dim()), a); }

/// ω_t = ι*(ω_0 + t dx_1∧dx_2) on the exterior chart.
inline GalleryCase case_inversion_chart() {
    GalleryCase g;
    g.name = "inversion_chart";
    g.dim = 4;
    const SmoothMap iota = inversion_map(4);
    const KForm w0 = standard_symplectic(4);
    Vector e12 = Vector::Zero(6);
    e12[0] = 1.0;
    const KForm dot = KForm::constant(4, 2, e12);
    g.omega = TimeForm(
        4, 2,
        [iota, w0, dot](double t, const Point& x) {
            return values::pullback(w0.eval(iota(x)) + t * dot.eval(iota(x)), iota.jacobian(x), 2, 4);
        },
        {},
        std::make_shared<const TimeForm>(TimeForm::constant(to_exterior_chart(dot))));
    g.region = {2.0, 32.0};
    g.singular = [](const Point& x) { return x.squaredNorm() == 0.0; };
    g.expectations = {{"dot_decay_exponent", -4.0, "published_bound"}, {"inverse_growth_exponent", 4.0, "published_bound"}};
    const auto probes = shell_points(4, 0.1, 10.0, {19, 64});
    g.self_tests.push_back(detail::self_test(
        "ι∘ι = id", detail::max_rel_diff([&](const Point& x) { return iota(iota(x)); }, [](const Point& x) { return x; }, probes), 1e-12));
    g.self_tests.push_back(detail::self_test("ι Jacobian matches differences", iota.jacobian_consistency(probes), 1e-6));
    detail::require_self_tests(g);
    return g;
}

// ---------------------------------------------------------------------------
// Contact families on R³ with coordinates (x, y, z).

/// θ_t = e^t (dz − y dx).
inline ContactFamily conformal_contact_family() {
    return ContactFamily(TimeForm::symbolic(3, 1, {parse_expr("-exp(t)*x2", 3), Expr::constant(0.0), parse_expr("exp(t)", 3)}));
}

/// θ_t = dz − y dx + t dx.
inline ContactFamily perturbed_contact_family() {
    return ContactFamily(TimeForm::symbolic(3, 1, {parse_expr("t - x2", 3), Expr::constant(0.0), Expr::constant(1.0)}));
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& gallery_names() {
    static const std::vector<std::string> names{"product", "radial_pullback", "liouville_rotation", "shrinking",
                                                "inversion_chart"};
    return names;
}

} // namespace moser

#include "moser/gallery.hpp"
#include "moser/primitive.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace moser;
using moser::testing::coeff_on;
using moser::testing::random_point;
using moser::testing::random_polynomial;

namespace {

KForm dx12(int m) {
    Vector c = Vector::Zero(static_cast<Eigen::Index>(basis(m, 2).size()));
    c[0] = 1.0;
    return KForm::constant(m, 2, c);
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// A random exact 2-form dτ on R^m with τ a polynomial 1-form.
KForm random_exact_two_form(std::mt19937_64& rng, int m) {
    return exterior_derivative(moser::testing::random_polynomial_form(rng, m, 1, 3));
}

} // namespace

TEST(EulerPrimitive, ZeroGivesZero) {
    const KForm s = euler_primitive(KForm::zero(4, 2));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(s.eval(random_point(rng, 4, 3.0)).norm(), 0.0);
}

TEST(EulerPrimitive, ConstantAreaForm) {
    const KForm s = euler_primitive(dx12(4));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i) {
        const Point x = random_point(rng, 4, 3.0);
        const Vector v = s.eval(x);
        EXPECT_NEAR(v[0], -0.5 * x[1], 1e-15);
        EXPECT_NEAR(v[1], 0.5 * x[0], 1e-15);
        EXPECT_EQ(v[2], 0.0);
        EXPECT_EQ(v[3], 0.0);
    }
    Point x = Point::Zero(4);
    x[0] = 2.0;
    EXPECT_NEAR(coeff_on(s.eval(x), 4, 1, {2}), 1.0, 1e-15);
}

TEST(EulerPrimitive, ShrinkingFamilyDerivative) {
    const TimeForm w = case_shrinking_form().omega;
    const TimeForm sigma = euler_primitive(w.time_derivative());
    Point x = Point::Zero(4);
    x[0] = 2.0;
    for (double t : {0.0, 0.7}) EXPECT_NEAR(coeff_on(sigma.eval(t, x), 4, 1, {2}), 1.0, 1e-15);
}

TEST(EulerPrimitive, RightInverseOnExactForms) {
    std::mt19937_64 rng(5);
    for (int m : {2, 3, 4, 6}) {
        const KForm a = random_exact_two_form(rng, m);
        const KForm da = exterior_derivative(euler_primitive(a));
        for (int i = 0; i < 10; ++i) {
            const Point x = random_point(rng, m, 2.0);
            const Vector av = a.eval(x);
            EXPECT_LT(max_abs(da.eval(x) - av), 1e-10 * std::max(1.0, max_abs(av))) << "m=" << m;
        }
    }
}

TEST(EulerPrimitive, ExactJacobianAgreesWithDifferences) {
    std::mt19937_64 rng(6);
    const KForm s = euler_primitive(random_exact_two_form(rng, 4));
    ASSERT_TRUE(s.has_jacobian());
    for (int i = 0; i < 5; ++i) {
        const Point x = random_point(rng, 4, 2.0);
        const Matrix exact = s.jacobian(x);
        const Matrix fd = central_jacobian(s.coeff_fn(), x, 1e-5);
        EXPECT_LT((exact - fd).cwiseAbs().maxCoeff(), 1e-7);
    }
}

TEST(EulerPrimitive, DegreeThreeAndOne) {
    std::mt19937_64 rng(7);
    const KForm a3 = exterior_derivative(moser::testing::random_polynomial_form(rng, 4, 2, 2));
    const KForm d3 = exterior_derivative(euler_primitive(a3));
    const KForm f = KForm::symbolic(3, 0, {random_polynomial(rng, 3, 3)});
    const KForm a1 = exterior_derivative(f);
    const KForm p1 = euler_primitive(a1);
    const Point origin = Point::Zero(3);
    for (int i = 0; i < 5; ++i) {
        const Point x = random_point(rng, 4, 1.5);
        EXPECT_LT(max_abs(d3.eval(x) - a3.eval(x)), 1e-10);
        const Point y = random_point(rng, 3, 1.5);
        EXPECT_NEAR(p1.eval(y)[0], f.eval(y)[0] - f.eval(origin)[0], 1e-12);
    }
}

TEST(EulerPrimitive, Linearity) {
    std::mt19937_64 rng(8);
    const KForm a = random_exact_two_form(rng, 4), b = random_exact_two_form(rng, 4);
    const KForm lhs = euler_primitive(2.5 * a + b);
    const KForm ia = euler_primitive(a), ib = euler_primitive(b);
    for (int i = 0; i < 5; ++i) {
        const Point x = random_point(rng, 4, 2.0);
        EXPECT_LT(max_abs(lhs.eval(x) - (2.5 * ia.eval(x) + ib.eval(x))), 1e-12);
    }
}

TEST(EulerPrimitive, RejectsDegreeZero) {
    EXPECT_THROW(euler_primitive(KForm::constant(3, 0, Vector::Ones(1))), DegreeError);
}

TEST(EulerPrimitive, RayThroughSingularSet) {
    const SingularSet hole = [](const Point& x) { return (x - Point::Constant(4, 0.5)).norm() < 0.2; };
    const KForm s = euler_primitive(dx12(4), {}, hole);
    EXPECT_THROW(s.eval(Point::Constant(4, 1.0)), EvaluationError);
    EXPECT_NO_THROW(s.eval(-Point::Constant(4, 1.0)));
}

TEST(EulerPrimitive, FamilyVersionTracksTime) {
    const TimeForm w = TimeForm::symbolic(
        4, 2,
        {Expr::variable(0) * Expr::variable(3), Expr::constant(0), Expr::constant(0), Expr::constant(0), Expr::constant(0),
         Expr::constant(0)});
    // t x3 dx1∧dx2 is not closed; only check the formula against direct quadrature.
    const TimeForm s = euler_primitive(w);
    Point x(4);
    x << 1.0, 2.0, 3.0, 0.5;
    // ∫_0^1 s · t (s x3) (x1 dx2 − x2 dx1) ds = t x3 (x1 dx2 − x2 dx1) / 3
    const Vector v = s.eval(0.6, x);
    EXPECT_NEAR(v[0], -0.6 * 3.0 * 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(v[1], 0.6 * 3.0 * 1.0 / 3.0, 1e-14);
}

TEST(CylinderPrimitive, FiberIntegrationOfConstantForm) {
    // coordinates (x1, x2, r); a = dr ∧ dx1 = −dx1 ∧ dr
    Vector c = Vector::Zero(3);
    c[basis(3, 2).rank(0b101)] = -1.0;
    const KForm a = KForm::constant(3, 2, c);
    CylinderPrimitiveSpec spec;
    spec.r0 = 1.0;
    const KForm ia = cylinder_primitive(a, spec);
    Point x(3);
    x << 0.4, -2.0, 3.5;
    const Vector v = ia.eval(x);
    EXPECT_NEAR(v[0], 2.5, 1e-14);
    EXPECT_NEAR(v[1], 0.0, 1e-14);
    EXPECT_NEAR(v[2], 0.0, 1e-14);
    const Vector da = exterior_derivative(ia).eval(x);
    EXPECT_LT(max_abs(da - c), 1e-14);
}

TEST(CylinderPrimitive, RecoversFormsVanishingOnTheSlice) {
    std::mt19937_64 rng(9);
    const int m = 4;
    const double r0 = 0.5;
    std::vector<Expr> tau;
    const Expr shift = Expr::variable(m) - Expr::constant(r0);
    for (int i = 0; i < m; ++i) tau.push_back(shift * random_polynomial(rng, m, 2));
    const KForm a = exterior_derivative(KForm::symbolic(m, 1, tau));
    CylinderPrimitiveSpec spec;
    spec.r0 = r0;
    for (int i = 0; i < 8; ++i) spec.probes.push_back(random_point(rng, m, 2.0));
    const KForm ia = cylinder_primitive(a, spec);
    const KForm dia = exterior_derivative(ia);
    for (int i = 0; i < 10; ++i) {
        const Point x = random_point(rng, m, 2.0);
        const Vector av = a.eval(x);
        EXPECT_LE(max_abs(dia.eval(x) - av), 1e-6 * std::max(1.0, max_abs(av)));
    }
}

TEST(CylinderPrimitive, ZeroGivesBase) {
    CylinderPrimitiveSpec spec;
    Vector bc(2);
    bc << 1.5, -0.5;
    spec.base = KForm::constant(2, 1, bc);
    const KForm ia = cylinder_primitive(KForm::zero(3, 2), spec);
    Point x(3);
    x << 1.0, 2.0, 7.0;
    const Vector v = ia.eval(x);
    EXPECT_EQ(v[0], 1.5);
    EXPECT_EQ(v[1], -0.5);
    EXPECT_EQ(v[2], 0.0);
    EXPECT_EQ(cylinder_primitive(KForm::zero(3, 2), {}).eval(x).norm(), 0.0);
}

TEST(CylinderPrimitive, MissingBaseIsReported) {
    // dx1∧dx2 restricts nontrivially to every slice {r = r0}.
    CylinderPrimitiveSpec spec;
    std::mt19937_64 rng(10);
    for (int i = 0; i < 4; ++i) spec.probes.push_back(random_point(rng, 3, 1.0));
    Vector c = Vector::Zero(3);
    c[0] = 1.0;
    EXPECT_THROW(cylinder_primitive(KForm::constant(3, 2, c), spec), MissingBasePrimitive);
    spec.base = KForm::symbolic(2, 1, {Expr::constant(0.0), Expr::variable(1)});
    EXPECT_NO_THROW(cylinder_primitive(KForm::constant(3, 2, c), spec));
}

TEST(CylinderPrimitive, ValidatesBaseShape) {
    CylinderPrimitiveSpec spec;
    spec.base = KForm::zero(3, 1);
    EXPECT_THROW(cylinder_primitive(KForm::zero(3, 2), spec), DimensionMismatch);
    spec.base = KForm::zero(2, 0);
    EXPECT_THROW(cylinder_primitive(KForm::zero(3, 2), spec), DegreeError);
}

TEST(LengthBound, ZeroDerivativeGivesZero) {
    EXPECT_EQ(naive_length_bound(TimeForm::constant(standard_symplectic(4)), {}), 0.0);
}

TEST(LengthBound, ShrinkingFamily) {
    // |ω_t⁻¹| = 1 and |ω̇| = 1, so the integrand is sup s|x| = R.
    LengthBoundSpec spec;
    spec.radius = 1.0;
    EXPECT_NEAR(naive_length_bound(case_shrinking_form().omega, spec), 1.0, 1e-12);
}

TEST(LengthBound, StandardFormWithAreaDerivative) {
    // ω_t = ω0 + t dx1∧dx2 with R = 2: |ω_t⁻¹| = 1 and |ω̇| = 1, so the hand estimate is sup s|x| = 2.
    const KForm w0 = standard_symplectic(4);
    const TimeForm w(4, 2, [w0](double t, const Point& x) {
        Vector v = w0.eval(x);
        v[0] += t;
        return v;
    });
    LengthBoundSpec spec;
    spec.radius = 2.0;
    EXPECT_GE(naive_length_bound(w, spec), 2.0 * (1.0 - 1e-9));
}

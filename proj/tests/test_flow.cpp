#include "moser/flow.hpp"
#include "moser/gallery.hpp"
#include "moser/path_method.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace moser;

namespace {

Point pt(std::initializer_list<double> v) {
    Point x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

TimeVectorField shrinking_field() {
    const GalleryCase g = case_shrinking_form();
    return build_moser_field(g.omega, *g.sigma);
}

} // namespace

TEST(Flow, ZeroFieldIsStationary) {
    const Point x0 = pt({1, -2, 3, 0.5});
    const FlowRecord rec = integrate_flow(TimeVectorField::zero(4), x0);
    EXPECT_EQ(rec.status, FlowStatus::completed);
    EXPECT_EQ(rec.times.back(), 1.0);
    EXPECT_EQ((rec.end_point() - x0).norm(), 0.0);
    EXPECT_EQ((rec.end_jacobian() - Matrix::Identity(4, 4)).norm(), 0.0);
    EXPECT_EQ(rec.arc_length, 0.0);
}

TEST(Flow, ShrinkingEndpoint) {
    const FlowRecord rec = integrate_flow(shrinking_field(), pt({1, 1, 1, 1}));
    ASSERT_EQ(rec.status, FlowStatus::completed);
    const Point expected = pt({std::pow(2.0, -0.5), std::pow(2.0, -0.5), 1, 1});
    EXPECT_LT((rec.end_point() - expected).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(rec.arc_length, std::sqrt(2.0) * (1.0 - std::pow(2.0, -0.5)), 1e-8);
    Matrix J = Matrix::Identity(4, 4);
    J(0, 0) = J(1, 1) = std::pow(2.0, -0.5);
    EXPECT_LT((rec.end_jacobian() - J).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Flow, StopsAreHitExactly) {
    FlowWindow w;
    w.stops = {0.25, 0.5, 0.8};
    const FlowRecord rec = integrate_flow(shrinking_field(), pt({2, 0, 0, 0}), {}, w);
    for (double s : w.stops) {
        const long i = rec.index_of(s);
        ASSERT_GE(i, 0);
        EXPECT_EQ(rec.times[static_cast<std::size_t>(i)], s);
        EXPECT_NEAR(rec.points[static_cast<std::size_t>(i)][0], 2.0 / std::sqrt(1.0 + s), 1e-8);
    }
    EXPECT_EQ(rec.index_of(0.3), -1);
}

TEST(Flow, SingularFormStopsTheFlow) {
    // ω = (3 − |x|) dx1∧dx2 + dx3∧dx4 and σ = 5 dx2 give |X1| = 5/(3 − |x|), which blows up at |x| = 3.
    const TimeForm omega(4, 2, [](double, const Point& x) {
        Vector v = Vector::Zero(6);
        v[0] = 3.0 - x.norm();
        v[5] = 1.0;
        return v;
    });
    const TimeForm sigma(4, 1, [](double, const Point&) {
        Vector v = Vector::Zero(4);
        v[1] = 5.0;
        return v;
    });
    const TimeVectorField X = build_moser_field(omega, sigma);
    const Point x0 = X(0.0, pt({1, 0, 0, 0}))[0] > 0 ? pt({1, 0, 0, 0}) : pt({-1, 0, 0, 0});
    const FlowRecord rec = integrate_flow(X, x0);
    EXPECT_EQ(rec.status, FlowStatus::step_underflow);
    EXPECT_FALSE(rec.message.empty());
    EXPECT_NEAR(rec.end_point().norm(), 3.0, 1e-2);
    EXPECT_LT(rec.times.back(), 1.0);
}

TEST(Flow, NonFiniteFieldUnderflows) {
    const TimeVectorField X{2, [](double t, const Point& x) {
                                Vector v = Vector::Ones(2);
                                if (t > 0.5) v[0] = std::nan("");
                                return Vector(v + 0.0 * x);
                            }};
    const FlowRecord rec = integrate_flow(X, pt({0, 0}));
    EXPECT_EQ(rec.status, FlowStatus::step_underflow);
    EXPECT_NEAR(rec.times.back(), 0.5, 1e-6);
}

TEST(Flow, EscapeIsReported) {
    const TimeVectorField X{2, [](double, const Point& x) { return Vector(x); }};
    IntegratorSpec spec;
    spec.escape_radius = 2.0;
    FlowWindow w{0.0, 2.0, {}};
    const FlowRecord rec = integrate_flow(X, pt({1, 0}), spec, w);
    EXPECT_EQ(rec.status, FlowStatus::escaped);
    EXPECT_LT(rec.times.back(), 2.0);
    EXPECT_GT(rec.end_point().norm(), 2.0);
}

TEST(Flow, MaxStepsReportedAsUnderflow) {
    IntegratorSpec spec;
    spec.max_steps = 3;
    spec.initial_step = 1e-4;
    const FlowRecord rec = integrate_flow(shrinking_field(), pt({1, 1, 1, 1}), spec);
    EXPECT_EQ(rec.status, FlowStatus::step_underflow);
}

TEST(Flow, ConstantFieldArcLength) {
    const TimeVectorField X{3, [](double, const Point&) { return Vector(Eigen::Vector3d(3.0, 4.0, 0.0)); }};
    const FlowRecord rec = integrate_flow(X, pt({0, 0, 0}));
    EXPECT_NEAR(rec.arc_length, 5.0, 1e-12);
    EXPECT_NEAR(rec.end_point()[1], 4.0, 1e-12);
}

TEST(Flow, GroupPropertyOfFrozenField) {
    const GalleryCase g = case_product(2, {1.0, 1.0});
    const TimeVectorField X = build_moser_field(g.omega, *g.sigma).frozen(0.3);
    const Point x0 = pt({0.7, -0.4, 1.1, 0.2});
    const FlowRecord whole = integrate_flow(X, x0, {}, {0.0, 0.6, {}});
    const FlowRecord first = integrate_flow(X, x0, {}, {0.0, 0.3, {}});
    const FlowRecord second = integrate_flow(X, first.end_point(), {}, {0.0, 0.3, {}});
    EXPECT_LT((whole.end_point() - second.end_point()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((whole.end_jacobian() - second.end_jacobian() * first.end_jacobian()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Flow, JacobianMatchesFiniteDifferences) {
    const GalleryCase g = case_product(2, {1.0, 1.0});
    const TimeVectorField X = build_moser_field(g.omega, *g.sigma);
    const Point x0 = pt({0.5, 0.3, -0.2, 0.9});
    const FlowRecord rec = integrate_flow(X, x0);
    IntegratorSpec tight = IntegratorSpec{}.tightened(1e-2);
    const double h = 1e-5;
    for (int j = 0; j < 4; ++j) {
        const Point e = Vector::Unit(4, j) * h;
        const Vector col = (integrate_flow(X, x0 + e, tight).end_point() - integrate_flow(X, x0 - e, tight).end_point()) / (2 * h);
        EXPECT_LT((rec.end_jacobian().col(j) - col).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Flow, JacobianDeterminantPositive) {
    const FlowRecord rec = integrate_flow(shrinking_field(), pt({1, 2, 3, 4}));
    EXPECT_GT(rec.min_jacobian_determinant(), 0.0);
    EXPECT_NEAR(rec.end_jacobian().determinant(), 0.5, 1e-8);
}

TEST(Flow, RejectsBadInput) {
    EXPECT_THROW(integrate_flow(TimeVectorField::zero(4), pt({1, 2})), DimensionMismatch);
    EXPECT_THROW(integrate_flow(TimeVectorField::zero(2), pt({1, 2}), {}, {1.0, 0.0, {}}), Error);
    IntegratorSpec bad;
    bad.rel_tol = -1;
    EXPECT_THROW(integrate_flow(TimeVectorField::zero(2), pt({1, 2}), bad), Error);
}

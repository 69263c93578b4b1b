#include "moser/gallery.hpp"
#include "moser/stability.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

using namespace moser;
using moser::testing::coeff_on;

namespace {

const SamplerSpec kSampler{1, 4096};

} // namespace

TEST(Gallery, RegistryNames) {
    EXPECT_EQ(gallery_names(),
              (std::vector<std::string>{"product", "radial_pullback", "liouville_rotation", "shrinking", "inversion_chart"}));
}

TEST(Gallery, SelfTestsPassOnLoad) {
    for (const GalleryCase& g : {case_product(2, {1.0, 1.0}), case_radial_pullback(2.0, 0.5), case_liouville_rotation(2.0),
                                 case_shrinking_form(), case_inversion_chart()}) {
        EXPECT_TRUE(g.self_tests_pass()) << g.name;
        EXPECT_FALSE(g.self_tests.empty()) << g.name;
        for (const auto& e : g.expectations)
            EXPECT_TRUE(e.provenance == "closed_form" || e.provenance == "published_bound" || e.provenance == "fit" ||
                        e.provenance == "trivial")
                << e.provenance;
    }
}

TEST(Product, DisplayedFormulaProbes) {
    const GalleryCase g = case_product(2, {1.0, 1.0});
    const Point zero = Point::Zero(4);
    EXPECT_EQ(coeff_on(g.omega.eval(0.0, zero), 4, 2, {1, 2}), 1.0);
    EXPECT_NEAR(coeff_on(g.omega.time_derivative().eval(1.0, zero), 4, 2, {1, 2}), 1.0 / std::sqrt(2.0), 1e-15);
    ASSERT_TRUE(g.sigma.has_value());
}

TEST(Product, NondegenerateEverywhere) {
    const GalleryCase g = case_product(3, {1.0, -2.0, 0.5});
    for (const auto& x : ball_points(6, 50.0, {3, 200}))
        for (double t : {0.0, 1.0})
            EXPECT_GE(values::nondegeneracy_margin(values::two_form_matrix(g.omega.eval(t, x), 6)), 0.5 * (1 - 1e-12));
}

TEST(Product, RejectsZeroCoefficient) {
    EXPECT_THROW(case_product(2, {1.0, 0.0}), Error);
    EXPECT_THROW(case_product(2, {1.0}), Error);
}

TEST(RadialPullback, PublishedBoundsHold) {
    const double p = 2.0, c = 0.5;
    const GalleryCase g = case_radial_pullback(p, c);
    const KForm omega = g.omega.at(0.0), dsigma = g.omega.time_derivative().at(0.0);
    for (double r : {2.0, 4.0, 8.0}) {
        EXPECT_LE(sup_inverse_norm_on_sphere(omega, r, kSampler), 1.5 / (r * r) * (1 + 1e-3)) << r;
        EXPECT_LE(sup_norm_on_sphere(dsigma, r, kSampler), r * r / 3.0 * (1 + 1e-3)) << r;
    }
}

TEST(RadialPullback, PointwiseProductBelowC) {
    const double c = 0.5;
    const GalleryCase g = case_radial_pullback(2.0, c);
    const KForm omega = g.omega.at(0.0), dsigma = g.omega.time_derivative().at(0.0);
    for (const auto& x : g.region.sample(4, {7, 1000})) {
        const double prod = matrix_norm(two_form_inverse(omega, x), NormKind::l1_operator) *
                            form_value_norm(dsigma.eval(x), 2, 4, NormKind::l1_operator);
        EXPECT_LE(prod, c);
        for (double t : {0.5, 1.0})
            EXPECT_GT(values::nondegeneracy_margin(values::two_form_matrix(g.omega.eval(t, x), 4)), 0.0);
    }
}

TEST(RadialPullback, LinearFamilyVerdictGrid) {
    const std::vector<double> radii{1.0, 1.1, 1.2, 2.0, 4.0, 8.0};
    for (double p : {1.5, 2.0, 3.0})
        for (double c : {0.25, 0.5, 0.9}) {
            const auto rep = linear_family_check(radial_pullback_form(p), radial_pullback_primitive(p, c).first, radii, {1, 1024});
            EXPECT_TRUE(rep.pass) << p << " " << c;
            ASSERT_TRUE(rep.total_bound.has_value());
            EXPECT_LE(*rep.total_bound, c / (1 - c));
        }
}

TEST(RadialPullback, CutoffHasSlopeThree) {
    double steepest = 0.0;
    for (int i = 0; i <= 1000; ++i) steepest = std::max(steepest, detail::cutoff(0.5 + 0.5 * i / 1000.0)[1]);
    EXPECT_NEAR(steepest, 3.0, 1e-9);
}

TEST(RadialPullback, ParameterRange) {
    EXPECT_THROW(case_radial_pullback(1.0, 0.5), Error);
    EXPECT_THROW(case_radial_pullback(2.0, 1.0), Error);
    EXPECT_THROW(case_radial_pullback(2.0, 0.0), Error);
}

TEST(LiouvilleRotation, ClosedAndSingularCoreMarked) {
    const GalleryCase g = case_liouville_rotation(2.0);
    EXPECT_EQ(g.chart, RadialChart::cylindrical_log);
    ASSERT_TRUE(static_cast<bool>(g.singular));
    EXPECT_TRUE(g.singular(Point::Constant(4, 0.1)));
    EXPECT_FALSE(g.singular(Point::Constant(4, 2.0)));
    const auto probes = g.region.sample(4, {2, 32});
    for (const auto& x : probes) EXPECT_FALSE(g.singular(x));
    EXPECT_LE(detail::closedness_defect(g.omega.at(0.5), probes, DerivativeScheme::central()), 1e-5);
    EXPECT_THROW(case_liouville_rotation(0.5), Error);
}

TEST(LiouvilleRotation, RotationAngle) {
    const SmoothMap phi = liouville_rotation_map(2.0, 0.5);
    Point x = Point::Zero(4);
    x[0] = std::exp(2.0);
    const Point y = phi(x);
    const double angle = 0.5 * 4.0;
    EXPECT_NEAR(y[0], x[0] * std::cos(angle), 1e-12 * x[0]);
    EXPECT_NEAR(y[1], x[0] * std::sin(angle), 1e-12 * x[0]);
    EXPECT_NEAR(y.norm(), x.norm(), 1e-12 * x[0]);
}

TEST(Shrinking, ClosedFormFlow) {
    const Point y = shrinking_flow(Point::Ones(4), 1.0);
    EXPECT_NEAR(y[0], std::pow(2.0, -0.5), 1e-15);
    EXPECT_EQ(y[3], 1.0);
}

TEST(InversionChart, InvolutionAndDecay) {
    const SmoothMap iota = inversion_map(4);
    for (const auto& x : shell_points(4, 0.1, 10.0, {4, 50})) EXPECT_LT((iota(iota(x)) - x).norm(), 1e-12 * x.norm());
    const GalleryCase g = case_inversion_chart();
    const std::vector<double> radii{2, 4, 8, 16, 32};
    const KForm dot = g.omega.time_derivative().at(0.0);
    EXPECT_NEAR(loglog_slope(radii, norm_profile(dot, radii, kSampler).values), -4.0, 0.2);
    EXPECT_NEAR(loglog_slope(radii, inverse_norm_profile(g.omega.at(0.5), radii, kSampler).values), 4.0, 0.2);
    EXPECT_TRUE(g.singular(Point::Zero(4)));
}

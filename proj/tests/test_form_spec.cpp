#include "moser/form_spec.hpp"
#include "moser/gallery.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace moser;
using moser::testing::coeff_on;

namespace {

std::string spec_path(const std::string& name) { return std::string(MOSER_DATA_DIR) + "/specs/" + name; }

Point pt(std::initializer_list<double> v) {
    Point x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

} // namespace

TEST(FormSpec, StandardFormLoadsAsConstantFamily) {
    const TimeForm w = load_form_spec_file(spec_path("omega0.json"));
    ASSERT_EQ(w.dim(), 4);
    ASSERT_EQ(w.degree(), 2);
    const Vector ref = standard_symplectic(4).eval(pt({0.3, -1, 2, 5}));
    for (double t : {0.0, 0.5, 1.0}) EXPECT_EQ((w.eval(t, pt({0.3, -1, 2, 5})) - ref).norm(), 0.0);
    EXPECT_EQ(w.time_derivative().eval(0.4, pt({1, 2, 3, 4})).norm(), 0.0);
}

TEST(FormSpec, ProductExampleHandEvaluation) {
    const TimeForm w = load_form_spec_file(spec_path("product_sin.json"));
    const Vector v = w.eval(0.0, pt({1, 1, 0, 0}));
    EXPECT_NEAR(coeff_on(v, 4, 2, {1, 2}), std::sqrt(3.0), 1e-15);
    EXPECT_EQ(coeff_on(v, 4, 2, {3, 4}), 1.0);
    EXPECT_EQ(coeff_on(v, 4, 2, {1, 3}), 0.0);
    EXPECT_NEAR(coeff_on(w.eval(1.0, pt({0, 0, 0, 0})), 4, 2, {1, 2}), std::sqrt(2.0), 1e-15);
}

TEST(FormSpec, NonIncreasingIndex) {
    const std::string text = R"({"dim":4,"degree":2,"terms":[{"coeff":"x3","index":[2,1]}]})";
    EXPECT_THROW(load_form_spec_text(text), IndexError);
    const TimeForm w = load_form_spec_text(text, {true});
    EXPECT_EQ(coeff_on(w.eval(0.0, pt({0, 0, 2, 0})), 4, 2, {1, 2}), -2.0);
}

TEST(FormSpec, RepeatedAxisVanishesWhenNormalized) {
    const std::string text = R"({"dim":3,"degree":2,"terms":[{"coeff":"1","index":[2,2]}]})";
    EXPECT_THROW(load_form_spec_text(text), IndexError);
    EXPECT_EQ(load_form_spec_text(text, {true}).eval(0.0, pt({1, 1, 1})).norm(), 0.0);
}

TEST(FormSpec, RepeatedTermsAccumulate) {
    const TimeForm w = load_form_spec_text(
        R"({"dim":2,"degree":1,"terms":[{"coeff":"x1","index":[1]},{"coeff":"2","index":[1]}]})");
    EXPECT_EQ(w.eval(0.0, pt({3, 0}))[0], 5.0);
}

TEST(FormSpec, SchemaErrors) {
    EXPECT_THROW(load_form_spec_text("[1,2]"), SchemaError);
    EXPECT_THROW(load_form_spec_text(R"({"dim":4,"degree":2})"), SchemaError);
    EXPECT_THROW(load_form_spec_text(R"({"dim":4,"degree":2,"terms":[],"extra":1})"), SchemaError);
    EXPECT_THROW(load_form_spec_text(R"({"dim":"4","degree":2,"terms":[]})"), SchemaError);
    EXPECT_THROW(load_form_spec_text(R"({"dim":4,"degree":5,"terms":[]})"), SchemaError);
    EXPECT_THROW(load_form_spec_text(R"({"dim":4,"degree":2,"terms":[{"coeff":"1","index":[1]}]})"), SchemaError);
    EXPECT_THROW(load_form_spec_text(R"({"dim":4,"degree":2,"terms":[{"coeff":1,"index":[1,2]}]})"), SchemaError);
    EXPECT_THROW(load_form_spec_text(R"({"dim":4,"degree":2,"terms":[)"), SchemaError);
    EXPECT_THROW(load_form_spec_file(spec_path("does_not_exist.json")), SchemaError);
}

TEST(FormSpec, MalformedJsonReportsOffset) {
    try {
        load_form_spec_text("{\"dim\": 4,, }");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
    }
}

TEST(FormSpec, IndexOutOfRange) {
    EXPECT_THROW(load_form_spec_text(R"({"dim":4,"degree":2,"terms":[{"coeff":"1","index":[1,5]}]})"), IndexError);
    EXPECT_THROW(load_form_spec_text(R"({"dim":4,"degree":2,"terms":[{"coeff":"1","index":[0,1]}]})"), IndexError);
}

TEST(FormSpec, SyntaxErrorCarriesTermLocation) {
    try {
        load_form_spec_text(R"({"dim":4,"degree":2,"terms":[{"coeff":"x1 +* 2","index":[1,2]}]})");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_NE(std::string(e.what()).find("terms[0]"), std::string::npos);
    }
    EXPECT_THROW(load_form_spec_text(R"({"dim":2,"degree":1,"terms":[{"coeff":"x3","index":[1]}]})"), UnboundVariable);
}

TEST(FormSpec, SymbolicTimeDerivativeMatchesDifferences) {
    const TimeForm w = load_form_spec_file(spec_path("product_sin.json"));
    const TimeForm exact = w.time_derivative();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const Point x = moser::testing::random_point(rng, 4, 2.0);
        const double t = 0.1 + 0.04 * i;
        const Vector fd = (w.eval(t + 1e-5, x) - w.eval(t - 1e-5, x)) / 2e-5;
        EXPECT_LT((exact.eval(t, x) - fd).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(FormSpec, RoundTripThroughJson) {
    const FormSpec spec = parse_form_spec(parse_json_text(read_text_file(spec_path("product_sin.json"))));
    const FormSpec again = parse_form_spec(nlohmann::json::parse(to_json(spec).dump()));
    ASSERT_EQ(again.terms.size(), spec.terms.size());
    EXPECT_TRUE(again.time_dependent);
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        EXPECT_EQ(again.terms[i].coeff, spec.terms[i].coeff);
        EXPECT_EQ(again.terms[i].index, spec.terms[i].index);
    }
}

TEST(FormSpec, DisplayedRadialFormulaMatchesGalleryOutsideBlend) {
    const TimeForm w = load_form_spec_file(spec_path("radial_pullback_outer_p2.json"));
    const KForm g = radial_pullback_form(2.0);
    std::mt19937_64 rng(11);
    for (const Point& d : sphere_points(4, {5, 64})) {
        for (double r : {1.2, 2.0, 5.5}) {
            const Point x = r * d;
            const Vector a = w.eval(0.0, x), b = g.eval(x);
            EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()));
        }
    }
}

#include "moser/contact.hpp"
#include "moser/gallery.hpp"
#include "moser/path_method.hpp"
#include "moser/primitive.hpp"
#include "moser/report.hpp"
#include "moser/stability.hpp"
#include "moser/suite.hpp"

#include "../test_helpers.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace moser;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) { return format_double(v); }

std::string failed_checks(const SuiteResult& s) {
    std::string out;
    for (const auto& c : s.checks)
        if (c.gating && !c.pass) out += " " + c.name + "=" + num(c.value);
    return out;
}

class ThreadsEnv {
public:
    explicit ThreadsEnv(const char* value) {
        if (const char* old = std::getenv("MOSER_THREADS")) saved_ = old;
        ::setenv("MOSER_THREADS", value, 1);
    }
    ~ThreadsEnv() {
        if (saved_)
            ::setenv("MOSER_THREADS", saved_->c_str(), 1);
        else
            ::unsetenv("MOSER_THREADS");
    }

private:
    std::optional<std::string> saved_;
};

// 1. d(I dσ) = dσ for random exact 2-forms on R⁴.
Outcome right_inverse() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    const auto pts = ball_points(4, 3.0, {11, 50});
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const KForm a = exterior_derivative(moser::testing::random_polynomial_form(rng, 4, 1, 3));
        const KForm da = exterior_derivative(euler_primitive(a));
        for (const auto& x : pts) worst = std::max(worst, (da.eval(x) - a.eval(x)).cwiseAbs().maxCoeff());
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-5 && secs < 30.0, "max defect " + num(worst) + ", " + num(secs) + " s"};
}

// 2. Closed-form shrinking isotopy.
Outcome shrinking(SuiteResult& s) {
    const auto t0 = Clock::now();
    s = run_shrinking_suite();
    const double secs = seconds_since(t0);
    const Check& r = s.get("max_residual");
    const Check& e = s.get("flow_endpoint_error");
    return {r.pass && e.pass && secs < 60.0,
            "residual " + num(r.value) + ", endpoint error " + num(e.value) + ", " + num(secs) + " s"};
}

// 3. Published bounds and linear-family criterion for p ∈ {1.5, 2, 3}.
Outcome radial_bounds() {
    bool ok = true;
    std::ostringstream os;
    for (double p : {1.5, 2.0, 3.0}) {
        const SuiteResult s = run_radial_pullback_suite(p, 0.5, {}, false);
        const bool case_ok = s.pass();
        ok = ok && case_ok;
        os << "p=" << p << " inv/bound " << num(s.get("inverse_norm_over_bound").value) << " dσ/bound "
           << num(s.get("dsigma_norm_over_bound").value) << " A " << num(s.get("linear_family_A").value)
           << (case_ok ? "" : " failed:" + failed_checks(s)) << "; ";
    }
    return {ok, os.str()};
}

// 4. Isotopy check for ω + t dσ on the shell 1 ≤ |x| ≤ 4.
Outcome radial_verification() {
    const auto t0 = Clock::now();
    const GalleryCase g = case_radial_pullback(2.0, 0.5);
    const auto pts = shell_points(4, 1.0, 4.0, {1, 50});
    const VerificationReport rep = verify_strong_isotopy(g.omega, *g.sigma, pts, unit_time_grid(11), 1e-5);
    const double secs = seconds_since(t0);
    return {rep.pass && secs < 300.0, "residual " + num(rep.max_residual) + ", " + num(secs) + " s"};
}

// 5. Divergence of the rotated Liouville end.
Outcome liouville() {
    bool ok = true;
    std::ostringstream os;
    for (double p : {1.5, 2.0}) {
        const SuiteResult s = run_liouville_suite(p);
        const Check& e = s.get("product_exponent_t_half");
        const Check& inc = s.get("total_increasing_in_r_max");
        ok = ok && e.pass && inc.pass;
        os << "p=" << p << " fitted exponent " << num(e.value) << " (target " << p << " ± " << num(0.1 * p) << "), totals "
           << (inc.pass ? "increasing" : "not increasing") << "; ";
    }
    return {ok, os.str()};
}

// 6. Inversion-chart exponents.
Outcome inversion() {
    const SuiteResult s = run_inversion_suite();
    const Check& d = s.get("dot_decay_exponent");
    const Check& i = s.get("inverse_growth_exponent");
    return {d.pass && i.pass, "decay slope " + num(d.value) + ", inverse slope " + num(i.value)};
}

// 7. Contact stability.
Outcome contact() {
    const SuiteResult s = run_contact_suite();
    return {s.pass(), "conformal |X| " + num(s.get("conformal_field_max").value) + ", factor error " +
                          num(s.get("conformal_factor_rel_error").value) + ", perturbed collinearity " +
                          num(s.get("perturbed_collinearity").value) + ", rate error " +
                          num(s.get("perturbed_rate_error").value) + (s.pass() ? "" : ", failed:" + failed_checks(s))};
}

// 8. Measured arc lengths within the a priori bound.
Outcome arc_length(const SuiteResult& s) {
    const Check& c = s.get("arc_length_within_naive_bound");
    return {c.pass, "longest arc " + num(c.value) + ", bound " + num(c.threshold)};
}

// 9. Algebraic invariants and determinism under parallelism.
Outcome invariants() {
    std::mt19937_64 rng(99);
    using moser::testing::random_point;
    using moser::testing::random_polynomial_form;
    double dd = 0.0, functorial = 0.0, antider = 0.0, inverse = 0.0, scale = 0.0;

    for (int m : {4, 6})
        for (int k = 0; k <= 2; ++k) {
            const KForm dda = exterior_derivative(exterior_derivative(random_polynomial_form(rng, m, k)));
            for (int s = 0; s < 20; ++s) dd = std::max(dd, dda.eval(random_point(rng, m)).cwiseAbs().maxCoeff());
        }

    const int m = 4;
    const SmoothMap psi = SmoothMap::linear(Matrix::Identity(m, m) * 1.3 + Matrix::Ones(m, m) * 0.1);
    const SmoothMap phi{m,
                        [](const Point& x) {
                            Point y = x;
                            y[0] += std::sin(x[1]);
                            y[2] += x[3] * x[3];
                            return y;
                        },
                        [m](const Point& x) {
                            Matrix J = Matrix::Identity(m, m);
                            J(0, 1) = std::cos(x[1]);
                            J(2, 3) = 2 * x[3];
                            return J;
                        }};
    for (int k = 1; k <= 3; ++k) {
        const KForm a = random_polynomial_form(rng, m, k);
        const KForm lhs = pullback(compose(phi, psi), a), rhs = pullback(psi, pullback(phi, a));
        for (int s = 0; s < 20; ++s) {
            const Point x = random_point(rng, m);
            const Vector l = lhs.eval(x);
            functorial = std::max(functorial, (l - rhs.eval(x)).cwiseAbs().maxCoeff() / (1 + l.cwiseAbs().maxCoeff()));
        }
    }

    for (int trial = 0; trial < 20; ++trial) {
        const int ka = 1 + trial % 3, kb = 1 + (trial / 3) % 2;
        const KForm a = random_polynomial_form(rng, 6, ka), b = random_polynomial_form(rng, 6, kb);
        const Vector v = random_point(rng, 6);
        const VectorField X{6, [v](const Point& x) { return Vector(v + 0.5 * x); }, {}};
        const Point x = random_point(rng, 6);
        const double sign = ka % 2 ? -1.0 : 1.0;
        const Vector rhs = wedge(interior_product(X, a), b).eval(x) + sign * wedge(a, interior_product(X, b)).eval(x);
        antider = std::max(antider, (interior_product(X, wedge(a, b)).eval(x) - rhs).cwiseAbs().maxCoeff());
    }

    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int mm = trial % 2 ? 4 : 6;
        const KForm a = random_polynomial_form(rng, mm, 2, 2);
        const Point x = random_point(rng, mm);
        const Matrix w = two_form_matrix(a, x);
        if (values::nondegeneracy_margin(w) <= 1e-6) continue;
        const Matrix inv = two_form_inverse(a, x);
        inverse = std::max(inverse, (w * inv - Matrix::Identity(mm, mm)).cwiseAbs().maxCoeff() /
                                        std::max(1.0, w.norm() * inv.norm()));
        ++checked;
    }

    const GalleryCase rp = case_radial_pullback(2.0, 0.5);
    const KForm w = rp.omega.at(0.3), b = rp.omega.time_derivative().at(0.3);
    const std::vector<double> radii{1, 1.5, 2, 3, 4};
    const double base = log_variation(w, b, radii, {1, 1024}).sup;
    for (double lambda : {1e-3, 7.0, 1e4})
        scale = std::max(scale, std::abs(log_variation(lambda * w, lambda * b, radii, {1, 1024}).sup - base) / base);

    auto deterministic_report = [] {
        const GalleryCase g = case_shrinking_form();
        Json j = report_header("verify");
        j["report"] = to_json(verify_strong_isotopy(g.omega, *g.sigma, ball_points(4, 5.0, {3, 24}), unit_time_grid(5), 1e-6));
        j["norms"] = to_json(inverse_norm_profile(case_radial_pullback(2.0, 0.5).omega.at(0.0), {1.2, 2, 4}, {1, 4096}));
        return to_json_text(j);
    };
    std::string one, four;
    {
        ThreadsEnv env("1");
        one = deterministic_report();
    }
    {
        ThreadsEnv env("4");
        four = deterministic_report();
    }
    const bool identical = one == four;

    const bool ok = dd <= 1e-4 && functorial <= 1e-8 && antider <= 1e-10 && inverse <= 1e-10 && checked >= 50 &&
                    scale <= 1e-12 && identical;
    return {ok, "d∘d " + num(dd) + ", pullback " + num(functorial) + ", antiderivation " + num(antider) + ", inverse " +
                    num(inverse) + ", scale " + num(scale) + ", threads 1 vs 4 " + (identical ? "identical" : "differ")};
}

} // namespace

int main() {
    const auto t0 = Clock::now();
    SuiteResult shrink;
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"right_inverse", right_inverse},
        {"shrinking_isotopy", [&] { return shrinking(shrink); }},
        {"radial_pullback_bounds", radial_bounds},
        {"radial_pullback_verification", radial_verification},
        {"liouville_divergence", liouville},
        {"inversion_decay", inversion},
        {"contact_stability", contact},
        {"arc_length_bound", [&] { return arc_length(shrink); }},
        {"invariants", invariants},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto ti = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail << " ["
                  << num(seconds_since(ti)) << " s]" << std::endl;
    }
    const double total = seconds_since(t0);
    std::cout << "total " << num(total) << " s, " << failures << " of " << criteria.size() << " criteria failed" << std::endl;
    return failures == 0 ? 0 : 1;
}

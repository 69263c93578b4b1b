#pragma once

// Check suites for the gallery cases: each runs the case through the engines and
// returns named pass/fail checks plus JSON artifacts.

#include "moser/gallery.hpp"
#include "moser/report.hpp"

#include <chrono>
#include <utility>

namespace moser {

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation; // "<=", ">=", "within", "true"
    bool pass = false;
    bool gating = true;   // non-gating checks are reported as diagnostics
    std::string note;
};

inline Check check_le(std::string name, double value, double threshold, bool gating = true) {
    return {std::move(name), value, threshold, "<=", value <= threshold, gating, {}};
}

inline Check check_ge(std::string name, double value, double threshold, bool gating = true) {
    return {std::move(name), value, threshold, ">=", value >= threshold, gating, {}};
}

/// |value − target| ≤ halfwidth.
inline Check check_within(std::string name, double value, double target, double halfwidth, bool gating = true) {
    Check c{std::move(name), value, halfwidth, "within", std::abs(value - target) <= halfwidth, gating, {}};
    c.note = "target " + format_double(target);
    return c;
}

inline Check check_true(std::string name, bool ok, bool gating = true) {
    return {std::move(name), ok ? 1.0 : 0.0, 1.0, "true", ok, gating, {}};
}

struct SuiteResult {
    std::string name;
    Json params = Json::object();
    std::vector<Check> checks;
    std::vector<std::pair<std::string, Json>> artifacts;
    std::vector<std::pair<std::string, double>> timings; // seconds per stage

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.gating || c.pass; });
    }

    const Check& get(const std::string& n) const {
        for (const auto& c : checks)
            if (c.name == n) return c;
        throw Error("no check named '" + n + "' in suite " + name);
    }

    void add(Check c) { checks.push_back(std::move(c)); }
};

struct SuiteConfig {
    SamplerSpec sampler{1, 4096};
    IntegratorSpec integrator{};
    unsigned threads = 0;
};

inline Json to_json(const Check& c) {
    Json j;
    j["name"] = c.name;
    j["verdict"] = c.pass ? "pass" : "fail";
    j["gating"] = c.gating;
    j["value"] = c.value;
    j["relation"] = c.relation;
    j["threshold"] = c.threshold;
    j["note"] = c.note;
    return j;
}

/// Summary document: per-check verdicts (artifacts are written separately).
inline Json summary_json(const SuiteResult& s) {
    Json j = report_header("example");
    j["case"] = s.name;
    j["verdict"] = s.pass() ? "pass" : "fail";
    j["params"] = s.params;
    Json checks = Json::array();
    for (const auto& c : s.checks) checks.push_back(to_json(c));
    j["checks"] = checks;
    return j;
}

/// Wall-clock seconds per stage; kept apart from the deterministic summary.
inline Json timings_json(const SuiteResult& s) {
    Json t = Json::object();
    for (const auto& [k, v] : s.timings) t[k] = v;
    return t;
}

namespace detail {

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline std::vector<double> uniform_grid(double a, double b, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return g;
}

inline std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
    g.back() = b;
    return g;
}

inline Json self_tests_json(const GalleryCase& g) {
    Json a = Json::array();
    for (const auto& s : g.self_tests) {
        Json j;
        j["name"] = s.name;
        j["value"] = s.value;
        j["tolerance"] = s.tolerance;
        j["verdict"] = s.pass ? "pass" : "fail";
        a.push_back(j);
    }
    return a;
}

} // namespace detail

inline std::vector<double> unit_time_grid(int n = 11) { return detail::uniform_grid(0.0, 1.0, n); }

// ---------------------------------------------------------------------------

/// Closed-form regression: residuals, endpoints, arc length, Jacobians, length bound.
inline SuiteResult run_shrinking_suite(const SuiteConfig& cfg = {}) {
    detail::Stopwatch sw;
    SuiteResult s;
    s.name = "shrinking";
    const GalleryCase g = case_shrinking_form();
    s.artifacts.emplace_back("self_tests", detail::self_tests_json(g));
    const auto pts = ball_points(4, 5.0, {cfg.sampler.seed, 100});
    const auto times = unit_time_grid(11);
    VerifyOptions vo;
    vo.integrator = cfg.integrator;
    vo.threads = cfg.threads;
    const VerificationReport rep = verify_strong_isotopy(g.omega, *g.sigma, pts, times, 1e-6, vo);
    s.add(check_le("max_residual", rep.max_residual, 1e-6));
    double endpoint = 0.0, min_det = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& f = rep.flows[i];
        for (double t : times) {
            const long idx = f.index_of(t);
            endpoint = std::max(endpoint, idx < 0 ? INFINITY : (f.points[idx] - shrinking_flow(pts[i], t)).norm());
        }
        min_det = std::min(min_det, f.min_jacobian_determinant());
    }
    s.add(check_le("flow_endpoint_error", endpoint, 1e-8));
    s.add(check_ge("min_jacobian_determinant", min_det, 0.0));
    s.artifacts.emplace_back("verification", to_json(rep));
    s.timings.emplace_back("verification", sw.lap());

    const TimeVectorField X = build_moser_field(g.omega, *g.sigma);
    Point x0(4);
    x0 << 1.0, 1.0, 0.0, 0.0;
    const FlowRecord arc = integrate_flow(X, x0, cfg.integrator);
    s.add(check_le("arc_length_error", std::abs(arc.arc_length - std::sqrt(2.0) * (1.0 - std::pow(2.0, -0.5))), 1e-8));

    // Transported Jacobian against differences of the flow map.
    double jac_err = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        const FlowRecord f = integrate_flow(X, pts[i], cfg.integrator);
        const double h = 1e-5;
        Matrix fd(4, 4);
        for (int k = 0; k < 4; ++k) {
            Point xp = pts[i], xm = pts[i];
            xp[k] += h;
            xm[k] -= h;
            fd.col(k) = (integrate_flow(X, xp, cfg.integrator).end_point() - integrate_flow(X, xm, cfg.integrator).end_point()) / (2 * h);
        }
        jac_err = std::max(jac_err, (fd - f.end_jacobian()).cwiseAbs().maxCoeff() / f.end_jacobian().cwiseAbs().maxCoeff());
    }
    s.add(check_le("jacobian_vs_differences", jac_err, 1e-4));

    // Residual does not grow when tolerances tighten tenfold.
    double worst_increase = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        const FlowRecord loose = integrate_flow(X, pts[i], cfg.integrator);
        const FlowRecord tight = integrate_flow(X, pts[i], cfg.integrator.tightened(10.0));
        const double rl = pullback_residual(g.omega, 1.0, pts[i], loose.end_point(), loose.end_jacobian(), NormKind::l1_operator);
        const double rt = pullback_residual(g.omega, 1.0, pts[i], tight.end_point(), tight.end_jacobian(), NormKind::l1_operator);
        worst_increase = std::max(worst_increase, rt - rl);
    }
    s.add(check_le("residual_increase_under_tightening", worst_increase, 1e-13));
    s.timings.emplace_back("flow_checks", sw.lap());

    // Measured arc lengths against the a priori bound on the unit ball.
    LengthBoundSpec lb;
    lb.radius = 1.0;
    const double bound = naive_length_bound(g.omega, lb);
    auto starts = ball_points(4, 1.0, {cfg.sampler.seed, 64});
    for (const auto& d : sphere_points(4, {cfg.sampler.seed, 16})) starts.push_back(d);
    double longest = 0.0;
    for (const auto& x : starts) longest = std::max(longest, integrate_flow(X, x, cfg.integrator).arc_length);
    Check c = check_le("arc_length_within_naive_bound", longest, bound);
    c.note = "longest measured arc " + format_double(longest);
    s.add(c);
    s.timings.emplace_back("length_bound", sw.lap());
    return s;
}

// ---------------------------------------------------------------------------

/// Published bounds, linear-family criterion, log-variation total and isotopy check.
inline SuiteResult run_radial_pullback_suite(double p, double c, const SuiteConfig& cfg = {}, bool verify = true) {
    detail::Stopwatch sw;
    SuiteResult s;
    s.name = "radial_pullback";
    s.params["p"] = p;
    s.params["c"] = c;
    const GalleryCase g = case_radial_pullback(p, c);
    s.artifacts.emplace_back("self_tests", detail::self_tests_json(g));
    const KForm omega = g.omega.at(0.0);
    const KForm dsigma = g.omega.time_derivative().at(0.0);
    const KForm sigma = g.sigma->at(0.0);

    const std::vector<double> radii{1.2, 2.0, 4.0, 8.0};
    const NormProfile inv = inverse_norm_profile(omega, radii, cfg.sampler);
    const NormProfile dnorm = norm_profile(dsigma, radii, cfg.sampler);
    double inv_ratio = 0.0, d_ratio = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        inv_ratio = std::max(inv_ratio, inv.values[i] / ((2.0 - 1.0 / p) * std::pow(radii[i], 2.0 - 2.0 * p)));
        d_ratio = std::max(d_ratio, dnorm.values[i] / (c * p / (2.0 * p - 1.0) * std::pow(radii[i], 2.0 * p - 2.0)));
    }
    s.add(check_le("inverse_norm_over_bound", inv_ratio, 1.001));
    s.add(check_le("dsigma_norm_over_bound", d_ratio, 1.001));
    s.artifacts.emplace_back("inverse_norm_profile", to_json(inv));
    s.artifacts.emplace_back("dsigma_norm_profile", to_json(dnorm));

    double pointwise = 0.0;
    for (const auto& x : ball_points(4, 8.0, {cfg.sampler.seed, 1000}))
        pointwise = std::max(pointwise, matrix_norm(two_form_inverse(omega, x), NormKind::l1_operator) *
                                            form_value_norm(dsigma.eval(x), 2, 4, NormKind::l1_operator));
    s.add(check_le("pointwise_product", pointwise, c));
    s.timings.emplace_back("bounds", sw.lap());

    const std::vector<double> lf_radii{0.25, 0.5, 0.75, 1.0, 1.2, 2.0, 4.0, 8.0, 16.0};
    const LinearFamilyReport lf = linear_family_check(omega, sigma, lf_radii, {cfg.sampler.seed, 1024});
    s.add(check_true("linear_family_verdict", lf.pass));
    s.add(check_le("linear_family_A", lf.A, 1.0 - 1e-12));
    s.add(check_le("linear_family_total_bound", lf.total_bound.value_or(INFINITY), c / (1.0 - c)));
    s.artifacts.emplace_back("linear_family", to_json(lf));
    s.timings.emplace_back("linear_family", sw.lap());

    const auto grid = detail::log_grid(1.0, 64.0, 13);
    const TotalLogVarReport total = total_log_variation(g.omega, grid, {cfg.sampler.seed, 1024});
    s.add(check_le("total_log_variation", total.total, c / (1.0 - c)));
    const GrowthFit fit = check_growth(total.per_time[0].radii, total.per_time[0].product, GrowthModel::linear_Cr);
    s.add(check_le("linear_growth_constant", fit.constant, c));
    s.add(check_le("linear_growth_max_ratio", fit.max_ratio, 1.0 + 1e-12));
    s.add(check_le("linear_growth_ratio_decay", fit.ratios.back(), fit.ratios.front()));
    s.artifacts.emplace_back("log_variation", to_json(total));
    s.artifacts.emplace_back("growth_fit", to_json(fit));
    s.timings.emplace_back("log_variation", sw.lap());

    if (verify) {
        VerifyOptions vo;
        vo.integrator = cfg.integrator;
        vo.threads = cfg.threads;
        const auto pts = g.region.sample(4, {cfg.sampler.seed, 50});
        const VerificationReport rep = verify_strong_isotopy(g.omega, *g.sigma, pts, unit_time_grid(11), 1e-5, vo);
        s.add(check_le("verification_max_residual", rep.max_residual, 1e-5));
        s.add(check_true("verification_verdict", rep.pass));
        s.artifacts.emplace_back("verification", to_json(rep));
        s.timings.emplace_back("verification", sw.lap());
    }
    return s;
}

// ---------------------------------------------------------------------------

/// Divergence of the log-variation for the rotated Liouville end.
inline SuiteResult run_liouville_suite(double p, const SuiteConfig& cfg = {}, double kappa = 1.0) {
    detail::Stopwatch sw;
    SuiteResult s;
    s.name = "liouville_rotation";
    s.params["p"] = p;
    s.params["kappa"] = kappa;
    const GalleryCase g = case_liouville_rotation(p, kappa);
    s.artifacts.emplace_back("self_tests", detail::self_tests_json(g));
    const TimeForm dot = g.omega.time_derivative();
    const auto radii = detail::uniform_grid(2.0, 6.0, 9);
    const SamplerSpec sampler{cfg.sampler.seed, std::min<std::size_t>(cfg.sampler.count, 2048)};

    auto product_profile = [&](double t) {
        const NormProfile inv = inverse_norm_profile(g.omega.at(t), radii, sampler, NormKind::l1_operator, g.chart);
        const NormProfile d = norm_profile(dot.at(t), radii, sampler, NormKind::l1_operator, g.chart);
        std::vector<double> prod;
        for (std::size_t i = 0; i < radii.size(); ++i) prod.push_back(inv.values[i] * d.values[i]);
        return std::make_tuple(inv, d, prod);
    };
    const auto [inv_half, dot_half, prod_half] = product_profile(0.5);
    const GrowthFit fit = check_growth(radii, prod_half, GrowthModel::power_rp);
    s.add(check_within("product_exponent_t_half", fit.exponent, p, 0.1 * p));
    const auto [inv_zero, dot_zero, prod_zero] = product_profile(0.0);
    const GrowthFit fit0 = check_growth(radii, prod_zero, GrowthModel::power_rp);
    s.add(check_within("product_exponent_t_zero", fit0.exponent, p, 0.1 * p, false));

    // ‖ω_t⁻¹‖_r against e^{−r}: slope of log ‖ω_t⁻¹‖_r in r.
    std::vector<double> er;
    for (double r : radii) er.push_back(std::exp(r));
    const double inv_slope = loglog_slope(er, inv_half.values);
    s.add(check_within("inverse_log_slope_t_half", inv_slope, -1.0, 0.25));
    bool decreasing = true;
    for (std::size_t i = 1; i < radii.size(); ++i) decreasing = decreasing && inv_half.values[i] < inv_half.values[i - 1];
    s.add(check_true("inverse_norm_decreasing", decreasing));
    Json prof;
    prof["radii"] = to_json(radii);
    prof["norm_inv_t_half"] = to_json(inv_half.values);
    prof["norm_dot_t_half"] = to_json(dot_half.values);
    prof["product_t_half"] = to_json(prod_half);
    prof["product_t_zero"] = to_json(prod_zero);
    s.artifacts.emplace_back("profiles", prof);
    s.artifacts.emplace_back("fit_t_half", to_json(fit));
    s.artifacts.emplace_back("fit_t_zero", to_json(fit0));
    s.timings.emplace_back("profiles", sw.lap());

    LogVarOptions lo;
    lo.chart = g.chart;
    lo.r_max = 6.0;
    const TotalLogVarReport total =
        total_log_variation(g.omega, detail::uniform_grid(1.0, 6.0, 11), {cfg.sampler.seed, 512}, lo);
    const std::vector<double> r_max{2.0, 4.0, 6.0};
    std::vector<double> totals;
    for (double rm : r_max) totals.push_back(truncated_total(total, rm));
    s.add(check_true("total_increasing_in_r_max", totals[0] < totals[1] && totals[1] < totals[2]));
    const double div_slope = loglog_slope(r_max, totals);
    s.add(check_within("divergence_exponent", div_slope, p, 0.1 * p, false));
    Json sweep;
    sweep["r_max"] = to_json(r_max);
    sweep["total"] = to_json(totals);
    sweep["loglog_slope"] = div_slope;
    s.artifacts.emplace_back("divergence", sweep);
    s.artifacts.emplace_back("log_variation", to_json(total));
    s.timings.emplace_back("log_variation", sw.lap());
    return s;
}

// ---------------------------------------------------------------------------

/// Decay and growth exponents under the inversion chart.
inline SuiteResult run_inversion_suite(const SuiteConfig& cfg = {}) {
    detail::Stopwatch sw;
    SuiteResult s;
    s.name = "inversion_chart";
    const GalleryCase g = case_inversion_chart();
    s.artifacts.emplace_back("self_tests", detail::self_tests_json(g));
    s.add(check_le("involution", g.self_tests[0].value, 1e-12));
    const std::vector<double> radii{2.0, 4.0, 8.0, 16.0, 32.0};
    const NormProfile dot = norm_profile(g.omega.time_derivative().at(0.0), radii, cfg.sampler);
    const NormProfile inv = inverse_norm_profile(g.omega.at(0.0), radii, cfg.sampler);
    s.add(check_within("dot_decay_exponent", loglog_slope(radii, dot.values), -4.0, 0.2));
    s.add(check_within("inverse_growth_exponent", loglog_slope(radii, inv.values), 4.0, 0.2));
    s.artifacts.emplace_back("dot_profile", to_json(dot));
    s.artifacts.emplace_back("inverse_profile", to_json(inv));
    s.timings.emplace_back("profiles", sw.lap());
    return s;
}

// ---------------------------------------------------------------------------

/// Product family: probes, isotopy check on the ball of radius 3, log-growth fit.
inline SuiteResult run_product_suite(int n, const std::vector<double>& a, const SuiteConfig& cfg = {}) {
    detail::Stopwatch sw;
    SuiteResult s;
    s.name = "product";
    s.params["n"] = n;
    s.params["a"] = to_json(a);
    const GalleryCase g = case_product(n, a);
    s.artifacts.emplace_back("self_tests", detail::self_tests_json(g));
    s.add(check_true("self_tests", g.self_tests_pass()));
    VerifyOptions vo;
    vo.integrator = cfg.integrator;
    vo.threads = cfg.threads;
    const auto pts = ball_points(2 * n, 3.0, {cfg.sampler.seed, 50});
    const VerificationReport rep = verify_strong_isotopy(g.omega, *g.sigma, pts, unit_time_grid(11), 1e-5, vo);
    s.add(check_le("verification_max_residual", rep.max_residual, 1e-5));
    s.add(check_true("verification_verdict", rep.pass));
    s.artifacts.emplace_back("verification", to_json(rep));
    s.timings.emplace_back("verification", sw.lap());

    const auto radii = detail::log_grid(2.0, 64.0, 6);
    const SamplerSpec sampler{cfg.sampler.seed, 1024};
    std::vector<double> worst(radii.size(), 0.0);
    for (double t : {0.0, 0.5, 1.0}) {
        const NormProfile inv = inverse_norm_profile(g.omega.at(t), radii, sampler);
        const NormProfile dot = norm_profile(g.omega.time_derivative().at(t), radii, sampler);
        for (std::size_t i = 0; i < radii.size(); ++i) worst[i] = std::max(worst[i], inv.values[i] * dot.values[i]);
    }
    const GrowthFit fit = check_growth(radii, worst, GrowthModel::log_Clogr);
    Check lg = check_true("log_growth_constant_finite", std::isfinite(fit.constant), false);
    lg.value = fit.constant;
    lg.relation = "finite";
    s.add(lg);
    s.artifacts.emplace_back("growth_fit", to_json(fit));
    s.timings.emplace_back("growth", sw.lap());
    return s;
}

// ---------------------------------------------------------------------------

/// Conformal and perturbed contact families on R³.
inline SuiteResult run_contact_suite(const SuiteConfig& cfg = {}) {
    detail::Stopwatch sw;
    SuiteResult s;
    s.name = "contact";
    const auto pts = ball_points(3, 2.0, {cfg.sampler.seed, 50});
    const auto times = unit_time_grid(11);
    GrayOptions go;
    go.integrator = cfg.integrator;
    go.threads = cfg.threads;

    const ContactFamily conf = conformal_contact_family();
    const TimeVectorField Xc = contact_moser_field(conf);
    double xmax = 0.0;
    for (double t : times)
        for (const auto& x : pts) xmax = std::max(xmax, Xc(t, x).cwiseAbs().maxCoeff());
    s.add(check_le("conformal_field_max", xmax, 1e-14));
    const GrayReport gc = verify_contact_isotopy(conf, pts, times, 1e-12, go);
    double ferr = 0.0;
    for (const auto& row : gc.factors)
        for (std::size_t j = 0; j < times.size(); ++j) ferr = std::max(ferr, std::abs(row[j] / std::exp(times[j]) - 1.0));
    s.add(check_le("conformal_collinearity", gc.max_residual, 1e-12));
    s.add(check_le("conformal_factor_rel_error", ferr, 1e-12));
    s.artifacts.emplace_back("conformal", to_json(gc));

    const ContactFamily pert = perturbed_contact_family();
    const TimeVectorField Xp = contact_moser_field(pert);
    double reeb_norm = 0.0, reeb_kernel = 0.0, in_kernel = 0.0, defining = 0.0;
    for (double t : times)
        for (const auto& x : pts) {
            const Vector R = reeb_field(pert, t, x);
            const Vector th = pert.theta().eval(t, x), dth = pert.dtheta().eval(t, x);
            reeb_norm = std::max(reeb_norm, std::abs(th.dot(R) - 1.0));
            reeb_kernel = std::max(reeb_kernel, values::contract(R, dth, 2, 3).cwiseAbs().maxCoeff());
            const Vector X = Xp(t, x);
            in_kernel = std::max(in_kernel, std::abs(th.dot(X)));
            const Vector thd = pert.theta_dot().eval(t, x);
            defining = std::max(defining, (values::contract(X, dth, 2, 3) + thd - thd.dot(R) * th).cwiseAbs().maxCoeff());
        }
    s.add(check_le("reeb_normalization", reeb_norm, 1e-12));
    s.add(check_le("reeb_kernel", reeb_kernel, 1e-12));
    s.add(check_le("field_in_contact_kernel", in_kernel, 1e-12));
    s.add(check_le("defining_equation_residual", defining, 1e-12));
    const GrayReport gp = verify_contact_isotopy(pert, pts, times, 1e-6, go);
    s.add(check_le("perturbed_collinearity", gp.max_residual, 1e-6));
    s.add(check_ge("perturbed_min_factor", gp.min_factor, std::numeric_limits<double>::min()));
    s.add(check_le("perturbed_rate_error", gp.max_rate_error, 1e-4));
    s.add(check_true("perturbed_verdict", gp.pass));
    s.artifacts.emplace_back("perturbed", to_json(gp));
    s.timings.emplace_back("contact", sw.lap());
    return s;
}

} // namespace moser

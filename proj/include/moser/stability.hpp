#pragma once

// Log-variation LogVar(ω, β) = sup_{r ≥ 1} r⁻¹‖ω⁻¹‖_r‖β‖_r, its t-integral along a
// family, growth-model fits and the linear-family and straight-path criteria.

#include "moser/norms.hpp"
#include "moser/quadrature.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace moser {

struct LogVarOptions {
    NormKind norm_kind = NormKind::l1_operator;
    RadialChart chart = RadialChart::euclidean;
    double r_max = 64.0;
    double tol_singular = kDefaultSingularTol;
};

/// Per-radius terms at one time.
struct LogVarReport {
    double t = 0.0;
    std::vector<double> radii;     // grid ∩ [1, r_max]
    std::vector<double> norm_inv;  // ‖ω⁻¹‖_r
    std::vector<double> norm_beta; // ‖β‖_r
    std::vector<double> product;   // ‖ω⁻¹‖_r‖β‖_r
    std::vector<double> term;      // r⁻¹‖ω⁻¹‖_r‖β‖_r
    double sup = 0.0;
    double argmax_radius = 0.0;
    double r_max = 0.0;
    NormKind norm_kind = NormKind::l1_operator;
    RadialChart chart = RadialChart::euclidean;
};

/// Log-variation of a family: per-t reports and the Simpson total.
struct TotalLogVarReport {
    std::vector<double> times;
    std::vector<double> weights;
    std::vector<LogVarReport> per_time;
    double total = 0.0;
    double r_max = 0.0;
};

inline std::vector<double> truncate_grid(const std::vector<double>& radii, double r_max) {
    validate_radii(radii);
    if (!(r_max >= 1.0)) throw Error("truncation radius must be at least 1");
    std::vector<double> out;
    for (double r : radii)
        if (r >= 1.0 && r <= r_max) out.push_back(r);
    if (out.empty()) throw Error("radius grid has no point in [1, r_max]");
    return out;
}

inline LogVarReport log_variation(const KForm& omega, const KForm& beta, const std::vector<double>& radii,
                                  const SamplerSpec& sampler, const LogVarOptions& opt = {}) {
    if (omega.degree() != 2) throw DegreeError("log-variation needs a 2-form ω");
    detail::require_dim(omega.dim(), beta.dim(), "log_variation");
    LogVarReport rep;
    rep.radii = truncate_grid(radii, opt.r_max);
    rep.r_max = opt.r_max;
    rep.norm_kind = opt.norm_kind;
    rep.chart = opt.chart;
    for (double r : rep.radii) {
        const double ni = sup_inverse_norm_on_sphere(omega, r, sampler, opt.norm_kind, opt.chart, opt.tol_singular);
        const double nb = sup_norm_on_sphere(beta, r, sampler, opt.norm_kind, opt.chart);
        rep.norm_inv.push_back(ni);
        rep.norm_beta.push_back(nb);
        rep.product.push_back(ni * nb);
        rep.term.push_back(ni * nb / r);
        if (rep.term.back() > rep.sup || rep.term.size() == 1) {
            rep.sup = rep.term.back();
            rep.argmax_radius = r;
        }
    }
    return rep;
}

/// ∫_0^1 LogVar(ω_t, ω̇_t) dt by composite Simpson on `t_nodes` (odd) nodes.
inline TotalLogVarReport total_log_variation(const TimeForm& omega, const std::vector<double>& radii,
                                             const SamplerSpec& sampler, const LogVarOptions& opt = {},
                                             int t_nodes = 33) {
    const TimeForm omega_dot = omega.time_derivative();
    TotalLogVarReport rep;
    rep.weights = simpson_weights(t_nodes);
    rep.r_max = opt.r_max;
    for (int i = 0; i < t_nodes; ++i) {
        const double t = static_cast<double>(i) / (t_nodes - 1);
        rep.times.push_back(t);
        LogVarReport lv = log_variation(omega.at(t), omega_dot.at(t), radii, sampler, opt);
        lv.t = t;
        rep.per_time.push_back(std::move(lv));
    }
    // Pairing i with n-1-i makes the sum invariant under t ↦ 1 − t.
    const int n = t_nodes;
    for (int i = 0; i < n / 2; ++i)
        rep.total += rep.weights[i] * rep.per_time[i].sup + rep.weights[n - 1 - i] * rep.per_time[n - 1 - i].sup;
    if (n % 2 == 1) rep.total += rep.weights[n / 2] * rep.per_time[n / 2].sup;
    return rep;
}

/// Total of an existing family report restricted to radii ≤ r_max (same pairing as the full total).
inline double truncated_total(const TotalLogVarReport& rep, double r_max) {
    const int n = static_cast<int>(rep.per_time.size());
    std::vector<double> sups(static_cast<std::size_t>(n), 0.0);
    bool any = false;
    for (int i = 0; i < n; ++i) {
        const auto& lv = rep.per_time[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < lv.radii.size(); ++j)
            if (lv.radii[j] <= r_max) {
                sups[static_cast<std::size_t>(i)] = std::max(sups[static_cast<std::size_t>(i)], lv.term[j]);
                any = true;
            }
    }
    if (!any) throw Error("no radius of the report lies below the truncation radius");
    double total = 0.0;
    for (int i = 0; i < n / 2; ++i) total += rep.weights[i] * sups[i] + rep.weights[n - 1 - i] * sups[n - 1 - i];
    if (n % 2 == 1) total += rep.weights[n / 2] * sups[n / 2];
    return total;
}

// ---------------------------------------------------------------------------

enum class GrowthModel { linear_Cr, log_Clogr, power_rp };

inline std::string to_string(GrowthModel m) {
    switch (m) {
    case GrowthModel::linear_Cr: return "linear_Cr";
    case GrowthModel::log_Clogr: return "log_Clogr";
    case GrowthModel::power_rp: return "power_rp";
    }
    return "?";
}

inline GrowthModel parse_growth_model(const std::string& s) {
    if (s == "linear_Cr" || s == "linear") return GrowthModel::linear_Cr;
    if (s == "log_Clogr" || s == "log") return GrowthModel::log_Clogr;
    if (s == "power_rp" || s == "power") return GrowthModel::power_rp;
    throw Error("unknown growth model '" + s + "'");
}

/// Fit of a per-radius profile v(r) to C·g(r) (g = r or log r) or C·r^p.
struct GrowthFit {
    GrowthModel model = GrowthModel::linear_Cr;
    double constant = 0.0;       // envelope max v/g; for power_rp exp(intercept)
    double lsq_constant = 0.0;   // least-squares C; for power_rp exp(intercept)
    double exponent = 1.0;       // fitted p for power_rp, 1 otherwise
    double residual = 0.0;       // RMS of the least-squares fit (log-space for power_rp)
    std::vector<double> ratios;  // v / (constant·g)
    double max_ratio = 0.0;
    double r_min = 0.0, r_max = 0.0;
};

inline GrowthFit check_growth(const std::vector<double>& radii, const std::vector<double>& values, GrowthModel model) {
    const std::size_t n = radii.size();
    if (values.size() != n) throw Error("profile radii and values differ in length");
    if (n < 4) throw Error("growth fit needs a profile on at least 4 radii");
    if (*std::max_element(radii.begin(), radii.end()) == *std::min_element(radii.begin(), radii.end()))
        throw Error("degenerate growth fit: all radii equal");
    GrowthFit fit;
    fit.model = model;
    fit.r_min = *std::min_element(radii.begin(), radii.end());
    fit.r_max = *std::max_element(radii.begin(), radii.end());
    if (model == GrowthModel::power_rp) {
        for (std::size_t i = 0; i < n; ++i)
            if (!(values[i] > 0.0) || !(radii[i] > 0.0)) throw Error("power fit needs positive radii and values");
        fit.exponent = loglog_slope(radii, values);
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += std::log(radii[i]);
            my += std::log(values[i]);
        }
        mx /= n;
        my /= n;
        const double intercept = my - fit.exponent * mx;
        fit.lsq_constant = fit.constant = std::exp(intercept);
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::log(values[i]) - (intercept + fit.exponent * std::log(radii[i]));
            ss += e * e;
            fit.ratios.push_back(values[i] / (fit.constant * std::pow(radii[i], fit.exponent)));
        }
        fit.residual = std::sqrt(ss / n);
    } else {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = model == GrowthModel::linear_Cr ? radii[i] : std::log(radii[i]);
            if (!(g[i] > 0.0)) throw Error("growth model is not positive on the window (log model needs r > 1)");
        }
        double sgv = 0, sgg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sgv += g[i] * values[i];
            sgg += g[i] * g[i];
            fit.constant = std::max(fit.constant, values[i] / g[i]);
        }
        fit.lsq_constant = sgv / sgg;
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = values[i] - fit.lsq_constant * g[i];
            ss += e * e;
            fit.ratios.push_back(fit.constant > 0.0 ? values[i] / (fit.constant * g[i]) : 0.0);
        }
        fit.residual = std::sqrt(ss / n);
    }
    fit.max_ratio = *std::max_element(fit.ratios.begin(), fit.ratios.end());
    return fit;
}

// ---------------------------------------------------------------------------

struct LinearFamilyReport {
    double A = 0.0; // sup_r ‖ω⁻¹‖_r‖dσ‖_r
    std::vector<double> radii;
    std::vector<double> products;
    bool contraction = false;   // A < 1
    bool nondegenerate = false; // ω + t dσ invertible at every sampled (t, x)
    double min_margin = 0.0;    // smallest singular value seen along the family
    std::optional<double> total_bound; // A/(1−A) when A < 1
    bool pass = false;
};

/// Criterion for ω + t dσ: A = sup ‖ω⁻¹‖_r‖dσ‖_r < 1 bounds the total log-variation by A/(1−A).
inline LinearFamilyReport linear_family_check(const KForm& omega, const KForm& sigma, const std::vector<double>& radii,
                                              const SamplerSpec& sampler, const LogVarOptions& opt = {},
                                              int t_nodes = 11) {
    if (omega.degree() != 2 || sigma.degree() != 1) throw DegreeError("linear family needs a 2-form and a 1-form");
    validate_radii(radii);
    const KForm dsigma = exterior_derivative(
        sigma, sigma.has_jacobian() || sigma.is_symbolic() ? DerivativeScheme::exact() : DerivativeScheme::central());
    LinearFamilyReport rep;
    rep.radii = radii;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (double r : radii) {
        const double ni = sup_inverse_norm_on_sphere(omega, r, sampler, opt.norm_kind, opt.chart, opt.tol_singular);
        const double nd = sup_norm_on_sphere(dsigma, r, sampler, opt.norm_kind, opt.chart);
        rep.products.push_back(ni * nd);
        rep.A = std::max(rep.A, ni * nd);
    }
    rep.contraction = rep.A < 1.0;
    if (rep.contraction) rep.total_bound = rep.A / (1.0 - rep.A);
    const int m = omega.dim();
    rep.nondegenerate = true;
    for (double r : radii) {
        const double rho = chart_radius(opt.chart, r);
        for (const auto& u : sphere_points(m, sampler)) {
            const Point x = rho * u;
            const Matrix w = values::two_form_matrix(omega.eval(x), m);
            const Matrix dw = values::two_form_matrix(dsigma.eval(x), m);
            for (int i = 0; i < t_nodes; ++i) {
                const double t = static_cast<double>(i) / (t_nodes - 1);
                const double margin = values::nondegeneracy_margin(w + t * dw);
                rep.min_margin = std::min(rep.min_margin, margin);
                if (!(margin >= opt.tol_singular)) rep.nondegenerate = false;
            }
        }
    }
    rep.pass = rep.contraction && rep.nondegenerate;
    return rep;
}

// ---------------------------------------------------------------------------

struct PseudometricReport {
    bool finite = false; // false: the straight path degenerates somewhere (no bound)
    double bound = std::numeric_limits<double>::infinity();
    std::vector<double> times;
    std::vector<double> per_time; // LogVar at each node
    std::string reason;
};

/// Total log-variation of the straight path (1−t)ω_a + tω_b, an upper bound for the pseudometric.
/// Nodes are dyadic and the sum pairs t with 1 − t, so swapping a and b gives a bitwise equal result.
inline PseudometricReport pseudometric_upper_bound(const KForm& a, const KForm& b, const std::vector<double>& radii,
                                                   const SamplerSpec& sampler, const LogVarOptions& opt = {},
                                                   int t_nodes = 33) {
    if (a.degree() != 2 || b.degree() != 2) throw DegreeError("pseudometric needs two 2-forms");
    detail::require_dim(a.dim(), b.dim(), "pseudometric_upper_bound");
    const int m = a.dim();
    PseudometricReport rep;
    const auto w = simpson_weights(t_nodes);
    const KForm diff(m, 2, [a, b](const Point& x) { return Vector(b.eval(x) - a.eval(x)); });
    try {
        for (int i = 0; i < t_nodes; ++i) {
            const double t = static_cast<double>(i) / (t_nodes - 1);
            const double s = static_cast<double>(t_nodes - 1 - i) / (t_nodes - 1);
            const KForm path(m, 2, [a, b, s, t](const Point& x) { return Vector(s * a.eval(x) + t * b.eval(x)); });
            rep.times.push_back(t);
            rep.per_time.push_back(log_variation(path, diff, radii, sampler, opt).sup);
        }
    } catch (const SingularForm& e) {
        rep.reason = e.what();
        return rep;
    }
    double total = 0.0;
    const int n = t_nodes;
    for (int i = 0; i < n / 2; ++i) total += w[i] * rep.per_time[i] + w[n - 1 - i] * rep.per_time[n - 1 - i];
    if (n % 2 == 1) total += w[n / 2] * rep.per_time[n / 2];
    rep.finite = true;
    rep.bound = total;
    return rep;
}

} // namespace moser

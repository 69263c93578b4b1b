#pragma once

// Pointwise norms of forms and bivectors, and their suprema over spheres.

#include "moser/form.hpp"
#include "moser/parallel.hpp"
#include "moser/sampling.hpp"

#include <string>
#include <vector>

namespace moser {

enum class NormKind {
    l1_operator,  // max_i Σ_j |q_ij| of the coefficient matrix
    l2_frobenius, // Frobenius norm of the full antisymmetric tensor
    l2_operator,  // spectral norm; used by the Euclidean length bound
};

inline std::string to_string(NormKind k) {
    switch (k) {
    case NormKind::l1_operator: return "l1_operator";
    case NormKind::l2_frobenius: return "l2_frobenius";
    case NormKind::l2_operator: return "l2_operator";
    }
    return "?";
}

inline NormKind parse_norm_kind(const std::string& s) {
    if (s == "l1_operator" || s == "l1") return NormKind::l1_operator;
    if (s == "l2_frobenius" || s == "l2" || s == "frobenius") return NormKind::l2_frobenius;
    if (s == "l2_operator" || s == "spectral") return NormKind::l2_operator;
    throw Error("unknown norm kind '" + s + "'");
}

/// How the radial coordinate r of a norm profile sits in the chart, and which metric
/// measures the pointwise norm.
enum class RadialChart {
    euclidean,       // sphere |x| = r, Euclidean metric
    cylindrical_log, // sphere |x| = e^r, cylinder metric dr² + g_{S^{m-1}} = |x|⁻² g_Euclid
};

inline std::string to_string(RadialChart c) { return c == RadialChart::euclidean ? "euclidean" : "cylindrical_log"; }

inline double chart_radius(RadialChart c, double r) { return c == RadialChart::euclidean ? r : std::exp(r); }

/// Conformal weight of a degree-`k` tensor under the cylinder metric (negative k: bivectors).
inline double metric_weight(RadialChart c, const Point& x, int k) {
    if (c == RadialChart::euclidean) return 1.0;
    return std::pow(x.norm(), k);
}

inline double matrix_norm(const Matrix& q, NormKind kind) {
    switch (kind) {
    case NormKind::l1_operator: return q.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::l2_frobenius: return q.norm();
    case NormKind::l2_operator: {
        Eigen::JacobiSVD<Matrix> svd(q);
        return svd.singularValues().maxCoeff();
    }
    }
    return 0.0;
}

/// Pointwise norm of a k-form value. Degree 1 is the 1×m row matrix, degree 2 the
/// antisymmetric coefficient matrix; higher degrees flatten the last k-1 slots.
inline double form_value_norm(const Vector& a, int k, int m, NormKind kind) {
    if (k == 0) return std::abs(a[0]);
    if (k == 1) {
        switch (kind) {
        case NormKind::l1_operator: return a.cwiseAbs().sum();
        default: return a.norm();
        }
    }
    if (k == 2) return matrix_norm(values::two_form_matrix(a, m), kind);
    const auto& b = basis(m, k);
    double fact = 1.0;
    for (int i = 2; i < k; ++i) fact *= i; // (k-1)!
    if (kind == NormKind::l1_operator) {
        Vector rows = Vector::Zero(m);
        for (std::size_t r = 0; r < b.size(); ++r)
            for (std::uint32_t rest = b.masks[r]; rest; rest &= rest - 1)
                rows[std::countr_zero(rest)] += std::abs(a[static_cast<Eigen::Index>(r)]);
        return fact * rows.maxCoeff();
    }
    return std::sqrt(fact * k) * a.norm();
}

// ---------------------------------------------------------------------------

/// Sup of a pointwise quantity over the sampled sphere of chart radius r.
struct SphereSup {
    double value = 0.0;
    Point argmax;
};

inline SphereSup sup_on_sphere(int m, double r, const SamplerSpec& sampler, RadialChart chart,
                               const std::function<double(const Point&)>& pointwise) {
    if (!(r > 0.0) && chart == RadialChart::euclidean) throw Error("sphere radius must be positive");
    const double rho = chart_radius(chart, r);
    const auto dirs = sphere_points(m, sampler);
    std::vector<double> vals(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) { vals[i] = pointwise(rho * dirs[i]); });
    SphereSup out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (!(vals[i] == vals[i])) throw EvaluationError("pointwise norm is NaN at " + detail::format_point(rho * dirs[i]), rho * dirs[i]);
        if (vals[i] > vals[best]) best = i;
    }
    out.value = vals[best];
    out.argmax = rho * dirs[best];
    return out;
}

/// ‖a‖_r: sup over the sampled sphere of the pointwise norm of a.
inline double sup_norm_on_sphere(const KForm& a, double r, const SamplerSpec& sampler,
                                 NormKind kind = NormKind::l1_operator, RadialChart chart = RadialChart::euclidean) {
    const int m = a.dim(), k = a.degree();
    return sup_on_sphere(m, r, sampler, chart, [&](const Point& x) {
               const Vector v = a.eval(x);
               detail::require_finite(v, x, "form coefficient");
               return metric_weight(chart, x, k) * form_value_norm(v, k, m, kind);
           }).value;
}

/// ‖ω⁻¹‖_r for a 2-form ω.
inline double sup_inverse_norm_on_sphere(const KForm& omega, double r, const SamplerSpec& sampler,
                                         NormKind kind = NormKind::l1_operator, RadialChart chart = RadialChart::euclidean,
                                         double tol_singular = kDefaultSingularTol) {
    const int m = omega.dim();
    return sup_on_sphere(m, r, sampler, chart, [&](const Point& x) {
               return metric_weight(chart, x, -2) * matrix_norm(two_form_inverse(omega, x, tol_singular), kind);
           }).value;
}

struct NormProfile {
    std::vector<double> radii;
    std::vector<double> values;
    NormKind norm_kind = NormKind::l1_operator;
    SamplerSpec sampler;
    RadialChart chart = RadialChart::euclidean;
    bool inverse = false; // values are ‖ω⁻¹‖_r rather than ‖a‖_r
};

inline void validate_radii(const std::vector<double>& radii) {
    if (radii.empty()) throw Error("empty radius grid");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw Error("radii must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1])) throw Error("radii must be strictly increasing");
    }
}

inline NormProfile norm_profile(const KForm& a, const std::vector<double>& radii, const SamplerSpec& sampler,
                                NormKind kind = NormKind::l1_operator, RadialChart chart = RadialChart::euclidean) {
    validate_radii(radii);
    NormProfile p{radii, {}, kind, sampler, chart, false};
    for (double r : radii) p.values.push_back(sup_norm_on_sphere(a, r, sampler, kind, chart));
    return p;
}

inline NormProfile inverse_norm_profile(const KForm& omega, const std::vector<double>& radii, const SamplerSpec& sampler,
                                        NormKind kind = NormKind::l1_operator, RadialChart chart = RadialChart::euclidean) {
    validate_radii(radii);
    NormProfile p{radii, {}, kind, sampler, chart, true};
    for (double r : radii) p.values.push_back(sup_inverse_norm_on_sphere(omega, r, sampler, kind, chart));
    return p;
}

/// Least-squares slope of log(values) against log(radii).
inline double loglog_slope(const std::vector<double>& radii, const std::vector<double>& values) {
    const std::size_t n = radii.size();
    if (n < 2 || values.size() != n) throw Error("slope fit needs at least two matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(radii[i]), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw Error("degenerate slope fit: all radii equal");
    return (n * sxy - sx * sy) / den;
}

} // namespace moser

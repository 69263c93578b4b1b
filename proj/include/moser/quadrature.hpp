#pragma once

#include "moser/core.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace moser {

struct QuadratureSpec {
    int nodes = 32;          // Gauss–Legendre node count, ≥ 2
    bool adaptive = true;    // bisect until halves agree with the whole
    int max_depth = 12;
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;

    void validate() const {
        if (nodes < 2) throw Error("quadrature node count must be at least 2");
        if (max_depth < 0 || !(rel_tol > 0.0) || !(abs_tol >= 0.0)) throw Error("invalid quadrature tolerances");
    }
};

/// Nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline GaussLegendre compute_gauss_legendre(int n) {
    GaussLegendre gl;
    gl.nodes.resize(static_cast<std::size_t>(n));
    gl.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[static_cast<std::size_t>(i)] = -x;
        gl.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        gl.weights[static_cast<std::size_t>(i)] = w;
        gl.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) gl.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return gl;
}

} // namespace detail

/// Cached rule; safe to call concurrently.
inline const GaussLegendre& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
    return it->second;
}

using VectorIntegrand = std::function<Vector(double)>;

namespace detail {

inline Vector gl_panel(const VectorIntegrand& f, double a, double b, const GaussLegendre& gl) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    Vector acc;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        Vector v = f(mid + half * gl.nodes[i]);
        if (i == 0) acc = gl.weights[i] * v;
        else acc += gl.weights[i] * v;
    }
    return half * acc;
}

inline Vector adaptive_panel(const VectorIntegrand& f, double a, double b, const Vector& whole, const GaussLegendre& gl,
                             const QuadratureSpec& q, int depth) {
    const double mid = 0.5 * (a + b);
    const Vector left = gl_panel(f, a, mid, gl);
    const Vector right = gl_panel(f, mid, b, gl);
    const Vector both = left + right;
    const double err = (both - whole).cwiseAbs().maxCoeff();
    const double scale = both.size() ? both.cwiseAbs().maxCoeff() : 0.0;
    if (!(err == err)) throw QuadratureError("quadrature produced a non-finite value");
    if (err <= q.rel_tol * scale + q.abs_tol) return both;
    if (depth >= q.max_depth)
        throw QuadratureError("adaptive quadrature did not converge within depth " + std::to_string(q.max_depth) +
                              " (error estimate " + std::to_string(err) + ")");
    return adaptive_panel(f, a, mid, left, gl, q, depth + 1) + adaptive_panel(f, mid, b, right, gl, q, depth + 1);
}

} // namespace detail

/// ∫_a^b f for vector-valued f.
inline Vector integrate(const VectorIntegrand& f, double a, double b, const QuadratureSpec& q = {}) {
    const auto& gl = gauss_legendre(q.nodes);
    const Vector whole = detail::gl_panel(f, a, b, gl);
    if (!whole.allFinite()) throw QuadratureError("quadrature produced a non-finite value");
    if (!q.adaptive) return whole;
    return detail::adaptive_panel(f, a, b, whole, gl, q, 0);
}

inline double integrate_scalar(const std::function<double(double)>& f, double a, double b, const QuadratureSpec& q = {}) {
    return integrate([&f](double s) { return Vector::Constant(1, f(s)); }, a, b, q)[0];
}

/// Composite Simpson weights for `n` (odd, ≥ 3) equispaced nodes on [a, b].
inline std::vector<double> simpson_weights(int n, double a = 0.0, double b = 1.0) {
    if (n < 3 || n % 2 == 0) throw Error("composite Simpson needs an odd node count ≥ 3");
    const double h = (b - a) / (n - 1);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (auto& x : w) x *= h / 3.0;
    return w;
}

} // namespace moser

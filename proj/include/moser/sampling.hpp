#pragma once

// Deterministic low-discrepancy point sets on spheres, balls and annuli.

#include "moser/core.hpp"

#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace moser {

struct SamplerSpec {
    std::uint64_t seed = 1;
    std::size_t count = 4096;

    void validate() const {
        if (count < 2) throw Error("sampler point count must be at least 2");
    }

    /// Same seed, count doubled `level` times.
    SamplerSpec refined(int level) const { return {seed, count << level}; }
};

namespace detail {

/// Generalized golden-ratio (R_d) Kronecker sequence with a seeded Cranley–Patterson shift.
class KroneckerSequence {
public:
    KroneckerSequence(int dims, std::uint64_t seed) : alpha_(static_cast<std::size_t>(dims)), shift_(alpha_.size()) {
        // φ_d is the positive root of x^{d+1} = x + 1.
        double phi = 2.0;
        for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / (dims + 1));
        for (int j = 0; j < dims; ++j) alpha_[static_cast<std::size_t>(j)] = std::fmod(std::pow(1.0 / phi, j + 1), 1.0);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& s : shift_) s = u(rng);
    }

    double coord(std::size_t n, std::size_t j) const {
        const double v = shift_[j] + static_cast<double>(n + 1) * alpha_[j];
        return v - std::floor(v);
    }

    std::size_t dims() const { return alpha_.size(); }

private:
    std::vector<double> alpha_;
    std::vector<double> shift_;
};

/// Box–Muller on consecutive coordinate pairs, normalized onto S^{m-1}.
inline Point unit_direction(const KroneckerSequence& seq, std::size_t n, int m) {
    Point g(m);
    for (int j = 0; j < m; j += 2) {
        const double u1 = 1.0 - seq.coord(n, static_cast<std::size_t>(j));     // (0, 1]
        const double u2 = seq.coord(n, static_cast<std::size_t>(j + 1));
        const double rad = std::sqrt(-2.0 * std::log(u1));
        g[j] = rad * std::cos(2.0 * std::numbers::pi * u2);
        if (j + 1 < m) g[j + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
    }
    const double nrm = g.norm();
    if (nrm == 0.0) {
        g.setZero();
        g[0] = 1.0;
        return g;
    }
    return g / nrm;
}

inline int even_up(int m) { return m + (m % 2); }

} // namespace detail

/// `spec.count` points on the unit sphere S^{m-1} ⊂ R^m.
inline std::vector<Point> sphere_points(int m, const SamplerSpec& spec) {
    spec.validate();
    if (m < 1) throw DimensionMismatch("sphere dimension must be positive");
    if (m == 1) {
        std::vector<Point> pts;
        for (std::size_t i = 0; i < spec.count; ++i) pts.push_back(Point::Constant(1, i % 2 ? -1.0 : 1.0));
        return pts;
    }
    detail::KroneckerSequence seq(detail::even_up(m), spec.seed);
    std::vector<Point> pts;
    pts.reserve(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) pts.push_back(detail::unit_direction(seq, i, m));
    return pts;
}

/// Points uniformly distributed (by volume) in the shell r_inner ≤ |x| ≤ r_outer.
inline std::vector<Point> shell_points(int m, double r_inner, double r_outer, const SamplerSpec& spec) {
    spec.validate();
    if (!(r_inner >= 0.0) || !(r_outer >= r_inner) || !(r_outer > 0.0)) throw Error("invalid shell radii");
    detail::KroneckerSequence seq(detail::even_up(m) + 1, spec.seed);
    const double lo = std::pow(r_inner, m), hi = std::pow(r_outer, m);
    std::vector<Point> pts;
    pts.reserve(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) {
        const double u = seq.coord(i, static_cast<std::size_t>(detail::even_up(m)));
        const double r = std::pow(lo + u * (hi - lo), 1.0 / m);
        pts.push_back(r * detail::unit_direction(seq, i, m));
    }
    return pts;
}

inline std::vector<Point> ball_points(int m, double radius, const SamplerSpec& spec) {
    return shell_points(m, 0.0, radius, spec);
}

} // namespace moser

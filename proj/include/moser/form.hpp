#pragma once

// Differential forms on coordinate charts of R^m and their algebra.
//
// A k-form is stored as a map from chart points to its C(m, k) coefficients in
// the lexicographic basis dx_I, I strictly increasing. Coefficients may come from
// closures (optionally with an exact coefficient Jacobian) or from symbolic
// expressions, in which case derivatives of every order are exact.

#include "moser/core.hpp"
#include "moser/expr.hpp"
#include "moser/multi_index.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace moser {

using CoeffFn = std::function<Vector(const Point&)>;
/// Rows index coefficients, columns index partial derivatives ∂/∂x_j.
using CoeffJacFn = std::function<Matrix(const Point&)>;
using TimeCoeffFn = std::function<Vector(double, const Point&)>;
using TimeCoeffJacFn = std::function<Matrix(double, const Point&)>;

/// Default spatial central-difference step: 1e-6 · max(1, |x|).
inline double default_fd_step(const Point& x) { return 1e-6 * std::max(1.0, x.norm()); }
inline constexpr double kDefaultTimeStep = 1e-6;

/// Central-difference Jacobian of a vector-valued map; `step <= 0` selects the default.
inline Matrix central_jacobian(const std::function<Vector(const Point&)>& f, const Point& x, double step = 0.0) {
    const double h = step > 0.0 ? step : default_fd_step(x);
    Point xp = x, xm = x;
    Matrix jac;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const Vector d = (f(xp) - f(xm)) / (2.0 * h);
        if (j == 0) jac.resize(d.size(), x.size());
        jac.col(j) = d;
        xp[j] = xm[j] = x[j];
    }
    return jac;
}

/// Symbolic coefficient table: expressions over (t, x1..xm).
struct SymbolicCoeffs {
    std::vector<Expr> coeffs;
    std::vector<std::vector<Expr>> partials; // partials[c][j] = ∂coeff_c/∂x_{j+1}

    SymbolicCoeffs(std::vector<Expr> c, int dim) : coeffs(std::move(c)) {
        partials.resize(coeffs.size());
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            for (int j = 1; j <= dim; ++j) partials[i].push_back(coeffs[i].diff(j));
    }
};

namespace detail {

inline std::vector<double> make_vars(double t, const Point& x) {
    std::vector<double> v(static_cast<std::size_t>(x.size()) + 1);
    v[0] = t;
    for (Eigen::Index i = 0; i < x.size(); ++i) v[static_cast<std::size_t>(i) + 1] = x[i];
    return v;
}

inline Vector eval_symbolic(const SymbolicCoeffs& s, double t, const Point& x) {
    const auto vars = make_vars(t, x);
    Vector out(static_cast<Eigen::Index>(s.coeffs.size()));
    for (std::size_t i = 0; i < s.coeffs.size(); ++i) out[static_cast<Eigen::Index>(i)] = s.coeffs[i].eval(vars);
    return out;
}

inline Matrix eval_symbolic_jacobian(const SymbolicCoeffs& s, double t, const Point& x) {
    const auto vars = make_vars(t, x);
    Matrix out(static_cast<Eigen::Index>(s.coeffs.size()), x.size());
    for (std::size_t i = 0; i < s.coeffs.size(); ++i)
        for (std::size_t j = 0; j < s.partials[i].size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.partials[i][j].eval(vars);
    return out;
}

} // namespace detail

/// A degree-k differential form field on R^m.
class KForm {
public:
    KForm() = default;

    KForm(int dim, int degree, CoeffFn coeff, CoeffJacFn jacobian = {})
        : dim_(dim), degree_(degree), size_(basis(dim, degree).size()), coeff_(std::move(coeff)),
          jac_(std::move(jacobian)) {}

    /// Coefficients given symbolically over (t, x1..xm), evaluated at the fixed time `t`.
    static KForm symbolic(int dim, int degree, std::vector<Expr> coeffs, double t = 0.0) {
        if (coeffs.size() != basis(dim, degree).size())
            throw DimensionMismatch("symbolic form needs exactly C(m,k) coefficients");
        auto sym = std::make_shared<const SymbolicCoeffs>(std::move(coeffs), dim);
        KForm f(
            dim, degree, [sym, t](const Point& x) { return detail::eval_symbolic(*sym, t, x); },
            [sym, t](const Point& x) { return detail::eval_symbolic_jacobian(*sym, t, x); });
        f.symbolic_ = sym;
        f.symbolic_time_ = t;
        return f;
    }

    static KForm constant(int dim, int degree, Vector coeffs) {
        if (static_cast<std::size_t>(coeffs.size()) != basis(dim, degree).size())
            throw DimensionMismatch("constant form needs exactly C(m,k) coefficients");
        std::vector<Expr> exprs;
        for (Eigen::Index i = 0; i < coeffs.size(); ++i) exprs.push_back(Expr::constant(coeffs[i]));
        return symbolic(dim, degree, std::move(exprs));
    }

    static KForm zero(int dim, int degree) {
        return constant(dim, degree, Vector::Zero(static_cast<Eigen::Index>(basis(dim, degree).size())));
    }

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    std::size_t size() const { return size_; }

    Vector operator()(const Point& x) const { return eval(x); }

    Vector eval(const Point& x) const {
        detail::require_dim(dim_, static_cast<int>(x.size()), "form evaluation");
        return coeff_(x);
    }

    bool has_jacobian() const { return static_cast<bool>(jac_); }

    /// Exact coefficient Jacobian when available, else central differences.
    Matrix jacobian(const Point& x, double step = 0.0) const {
        if (jac_) return jac_(x);
        return central_jacobian(coeff_, x, step);
    }

    bool is_symbolic() const { return static_cast<bool>(symbolic_); }
    const SymbolicCoeffs& symbolic_coeffs() const { return *symbolic_; }
    double symbolic_time() const { return symbolic_time_; }

    const CoeffFn& coeff_fn() const { return coeff_; }
    const CoeffJacFn& jacobian_fn() const { return jac_; }

private:
    int dim_ = 0;
    int degree_ = 0;
    std::size_t size_ = 0;
    CoeffFn coeff_;
    CoeffJacFn jac_;
    std::shared_ptr<const SymbolicCoeffs> symbolic_;
    double symbolic_time_ = 0.0;
};

/// A one-parameter family of k-forms ω_t, t ∈ [0, 1].
class TimeForm {
public:
    TimeForm() = default;

    TimeForm(int dim, int degree, TimeCoeffFn coeff, TimeCoeffJacFn jacobian = {},
             std::shared_ptr<const TimeForm> time_derivative = nullptr)
        : dim_(dim), degree_(degree), coeff_(std::move(coeff)), jac_(std::move(jacobian)),
          derivative_(std::move(time_derivative)) {
        (void)basis(dim, degree);
    }

    /// Symbolic family; ∂t is symbolic as well.
    static TimeForm symbolic(int dim, int degree, std::vector<Expr> coeffs) {
        if (coeffs.size() != basis(dim, degree).size())
            throw DimensionMismatch("symbolic family needs exactly C(m,k) coefficients");
        auto sym = std::make_shared<const SymbolicCoeffs>(std::move(coeffs), dim);
        TimeForm f(
            dim, degree, [sym](double t, const Point& x) { return detail::eval_symbolic(*sym, t, x); },
            [sym](double t, const Point& x) { return detail::eval_symbolic_jacobian(*sym, t, x); });
        f.symbolic_ = sym;
        return f;
    }

    /// The constant family t ↦ a.
    static TimeForm constant(const KForm& a) {
        if (a.is_symbolic()) {
            // Re-express over (t, x) with t unused; keeps exact derivatives of every order.
            const auto& s = a.symbolic_coeffs();
            const double t0 = a.symbolic_time();
            std::vector<Expr> c;
            for (const auto& e : s.coeffs) c.push_back(e.max_variable() >= 0 ? substitute_time(e, t0) : e);
            return symbolic(a.dim(), a.degree(), std::move(c));
        }
        CoeffJacFn jac = a.jacobian_fn();
        TimeCoeffJacFn tj;
        if (jac) tj = [jac](double, const Point& x) { return jac(x); };
        const KForm zero = KForm::zero(a.dim(), a.degree());
        return TimeForm(
            a.dim(), a.degree(), [a](double, const Point& x) { return a.eval(x); }, tj,
            std::make_shared<const TimeForm>(constant(zero)));
    }

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    std::size_t size() const { return basis(dim_, degree_).size(); }

    Vector eval(double t, const Point& x) const {
        detail::require_dim(dim_, static_cast<int>(x.size()), "family evaluation");
        return coeff_(t, x);
    }

    bool has_jacobian() const { return static_cast<bool>(jac_); }

    Matrix jacobian(double t, const Point& x, double step = 0.0) const {
        if (jac_) return jac_(t, x);
        const auto& c = coeff_;
        return central_jacobian([&c, t](const Point& y) { return c(t, y); }, x, step);
    }

    bool is_symbolic() const { return static_cast<bool>(symbolic_); }
    const SymbolicCoeffs& symbolic_coeffs() const { return *symbolic_; }

    /// True when ω̇ is known exactly (symbolic or user-supplied).
    bool has_exact_time_derivative() const { return is_symbolic() || static_cast<bool>(derivative_); }

    /// ω̇_t: symbolic, user-supplied, or central differences with step h_t.
    TimeForm time_derivative(double h_t = kDefaultTimeStep) const {
        if (symbolic_) {
            std::vector<Expr> d;
            for (const auto& e : symbolic_->coeffs) d.push_back(e.diff(0));
            return symbolic(dim_, degree_, std::move(d));
        }
        if (derivative_) return *derivative_;
        const auto c = coeff_;
        return TimeForm(dim_, degree_, [c, h_t](double t, const Point& x) {
            return Vector((c(t + h_t, x) - c(t - h_t, x)) / (2.0 * h_t));
        });
    }

    /// ω_t at a fixed time as a KForm.
    KForm at(double t) const {
        if (symbolic_) return KForm::symbolic(dim_, degree_, symbolic_->coeffs, t);
        const auto c = coeff_;
        CoeffJacFn j;
        if (jac_) {
            const auto jj = jac_;
            j = [jj, t](const Point& x) { return jj(t, x); };
        }
        return KForm(dim_, degree_, [c, t](const Point& x) { return c(t, x); }, j);
    }

    const TimeCoeffFn& coeff_fn() const { return coeff_; }
    const TimeCoeffJacFn& jacobian_fn() const { return jac_; }

private:
    static Expr substitute_time(const Expr& e, double t0) {
        const ExprNode& n = e.node();
        if (n.op == Op::variable) return n.var == 0 ? Expr::constant(t0) : e;
        if (n.args.empty()) return e;
        std::vector<Expr> args;
        for (const auto& a : n.args) args.push_back(substitute_time(a, t0));
        return detail::make_node(n.op, std::move(args), n.value, n.var);
    }

    int dim_ = 0;
    int degree_ = 0;
    TimeCoeffFn coeff_;
    TimeCoeffJacFn jac_;
    std::shared_ptr<const TimeForm> derivative_;
    std::shared_ptr<const SymbolicCoeffs> symbolic_;
};

/// Tangent vector field on R^m.
struct VectorField {
    int dim = 0;
    std::function<Vector(const Point&)> eval;
    std::function<Matrix(const Point&)> jacobian; // optional

    Vector operator()(const Point& x) const { return eval(x); }

    /// E(x) = Σ x_i ∂x_i.
    static VectorField euler(int dim) {
        return {dim, [](const Point& x) { return Vector(x); },
                [dim](const Point&) { return Matrix(Matrix::Identity(dim, dim)); }};
    }

    /// The coordinate field ∂x_i (0-based axis).
    static VectorField coordinate(int dim, int axis) {
        return {dim, [dim, axis](const Point&) { return Vector(Vector::Unit(dim, axis)); },
                [dim](const Point&) { return Matrix(Matrix::Zero(dim, dim)); }};
    }
};

/// Smooth map R^m → R^m with exact or finite-difference Jacobian.
struct SmoothMap {
    int dim = 0;
    std::function<Point(const Point&)> eval;
    std::function<Matrix(const Point&)> jac; // optional

    Point operator()(const Point& x) const { return eval(x); }

    Matrix jacobian(const Point& x, double step = 0.0) const {
        if (jac) return jac(x);
        return central_jacobian(eval, x, step);
    }

    static SmoothMap identity(int dim) {
        return {dim, [](const Point& x) { return Point(x); },
                [dim](const Point&) { return Matrix(Matrix::Identity(dim, dim)); }};
    }

    static SmoothMap scaling(int dim, double s) {
        return {dim, [s](const Point& x) { return Point(s * x); },
                [dim, s](const Point&) { return Matrix(s * Matrix::Identity(dim, dim)); }};
    }

    /// Linear map x ↦ A x.
    static SmoothMap linear(Matrix a) {
        const int dim = static_cast<int>(a.rows());
        return {dim, [a](const Point& x) { return Point(a * x); }, [a](const Point&) { return a; }};
    }

    /// Largest relative deviation between the supplied Jacobian and central differences.
    double jacobian_consistency(std::span<const Point> probes, double step = 1e-6) const {
        double worst = 0.0;
        for (const auto& x : probes) {
            const Matrix exact = jacobian(x);
            const Matrix fd = central_jacobian(eval, x, step * std::max(1.0, x.norm()));
            worst = std::max(worst, (exact - fd).cwiseAbs().maxCoeff() / std::max(1.0, exact.cwiseAbs().maxCoeff()));
        }
        return worst;
    }
};

/// φ ∘ ψ.
inline SmoothMap compose(const SmoothMap& phi, const SmoothMap& psi) {
    detail::require_dim(phi.dim, psi.dim, "compose");
    return {phi.dim, [phi, psi](const Point& x) { return phi(psi(x)); },
            [phi, psi](const Point& x) { return Matrix(phi.jacobian(psi(x)) * psi.jacobian(x)); }};
}

// ---------------------------------------------------------------------------
// Pointwise (value-level) algebra on coefficient vectors.

namespace values {

inline Vector wedge(const Vector& a, int ka, const Vector& b, int kb, int m) {
    const auto& ba = basis(m, ka);
    const auto& bb = basis(m, kb);
    const auto& bc = basis(m, ka + kb);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(bc.size()));
    for (std::size_t i = 0; i < ba.size(); ++i) {
        const double ai = a[static_cast<Eigen::Index>(i)];
        if (ai == 0.0) continue;
        for (std::size_t j = 0; j < bb.size(); ++j) {
            const int s = merge_sign(ba.masks[i], bb.masks[j]);
            if (s == 0) continue;
            out[bc.rank(ba.masks[i] | bb.masks[j])] += s * ai * b[static_cast<Eigen::Index>(j)];
        }
    }
    return out;
}

/// v ⌟ a for a k-form value a, k ≥ 1.
inline Vector contract(const Vector& v, const Vector& a, int k, int m) {
    const auto& src = basis(m, k);
    const auto& dst = basis(m, k - 1);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dst.size()));
    for (std::size_t r = 0; r < src.size(); ++r) {
        const double ar = a[static_cast<Eigen::Index>(r)];
        if (ar == 0.0) continue;
        const std::uint32_t mask = src.masks[r];
        for (std::uint32_t rest = mask; rest; rest &= rest - 1) {
            const int i = std::countr_zero(rest);
            const std::uint32_t tail = mask & ~(1u << i);
            out[dst.rank(tail)] += merge_sign(1u << i, tail) * v[i] * ar;
        }
    }
    return out;
}

/// Coefficients of da from the coefficient Jacobian of a (rows: coefficients, cols: ∂_j).
inline Vector exterior_derivative(const Matrix& jac, int k, int m) {
    const auto& src = basis(m, k);
    const auto& dst = basis(m, k + 1);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dst.size()));
    for (std::size_t r = 0; r < dst.size(); ++r) {
        const std::uint32_t mask = dst.masks[r];
        double acc = 0.0;
        for (std::uint32_t rest = mask; rest; rest &= rest - 1) {
            const int i = std::countr_zero(rest);
            const std::uint32_t tail = mask & ~(1u << i);
            acc += merge_sign(1u << i, tail) * jac(src.rank(tail), i);
        }
        out[static_cast<Eigen::Index>(r)] = acc;
    }
    return out;
}

/// Antisymmetric coefficient matrix W_ij = a(e_i, e_j) of a 2-form value.
inline Matrix two_form_matrix(const Vector& a, int m) {
    const auto& b = basis(m, 2);
    Matrix w = Matrix::Zero(m, m);
    for (std::size_t r = 0; r < b.size(); ++r) {
        const int i = std::countr_zero(b.masks[r]);
        const int j = 31 - std::countl_zero(b.masks[r]);
        w(i, j) = a[static_cast<Eigen::Index>(r)];
        w(j, i) = -a[static_cast<Eigen::Index>(r)];
    }
    return w;
}

/// Inverse of two_form_matrix (upper triangle read off).
inline Vector two_form_from_matrix(const Matrix& w) {
    const int m = static_cast<int>(w.rows());
    const auto& b = basis(m, 2);
    Vector a(static_cast<Eigen::Index>(b.size()));
    for (std::size_t r = 0; r < b.size(); ++r) {
        const int i = std::countr_zero(b.masks[r]);
        const int j = 31 - std::countl_zero(b.masks[r]);
        a[static_cast<Eigen::Index>(r)] = w(i, j);
    }
    return a;
}

/// Pullback of a k-form value at φ(x) through the Jacobian J of φ at x.
inline Vector pullback(const Vector& a, const Matrix& J, int k, int m) {
    const auto& b = basis(m, k);
    if (k == 0) return a;
    if (k == 1) return J.transpose() * a;
    if (k == 2) return two_form_from_matrix(J.transpose() * two_form_matrix(a, m) * J);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(b.size()));
    Matrix minor(k, k);
    for (std::size_t I = 0; I < b.size(); ++I) {
        const auto cols = MultiIndex::from_mask(b.masks[I]).axes();
        double acc = 0.0;
        for (std::size_t Jr = 0; Jr < b.size(); ++Jr) {
            const double aj = a[static_cast<Eigen::Index>(Jr)];
            if (aj == 0.0) continue;
            const auto rows = MultiIndex::from_mask(b.masks[Jr]).axes();
            for (int p = 0; p < k; ++p)
                for (int q = 0; q < k; ++q) minor(p, q) = J(rows[static_cast<std::size_t>(p)], cols[static_cast<std::size_t>(q)]);
            acc += aj * minor.determinant();
        }
        out[static_cast<Eigen::Index>(I)] = acc;
    }
    return out;
}

/// Smallest singular value of the coefficient matrix.
inline double nondegeneracy_margin(const Matrix& w) {
    Eigen::JacobiSVD<Matrix> svd(w);
    return svd.singularValues().minCoeff();
}

} // namespace values

// ---------------------------------------------------------------------------
// Form-level operations.

namespace detail {

inline void require_finite(const Vector& v, const Point& x, const char* what) {
    if (!v.allFinite()) throw EvaluationError(std::string(what) + " is not finite at " + format_point(x), x);
}

inline std::vector<Expr> symbolic_wedge(const std::vector<Expr>& a, int ka, const std::vector<Expr>& b, int kb, int m) {
    const auto& ba = basis(m, ka);
    const auto& bb = basis(m, kb);
    const auto& bc = basis(m, ka + kb);
    std::vector<Expr> out(bc.size(), Expr::constant(0.0));
    for (std::size_t i = 0; i < ba.size(); ++i)
        for (std::size_t j = 0; j < bb.size(); ++j) {
            const int s = merge_sign(ba.masks[i], bb.masks[j]);
            if (s == 0) continue;
            auto& slot = out[static_cast<std::size_t>(bc.rank(ba.masks[i] | bb.masks[j]))];
            const Expr term = a[i] * b[j];
            slot = s > 0 ? slot + term : slot - term;
        }
    return out;
}

inline std::vector<Expr> symbolic_d(const SymbolicCoeffs& s, int k, int m) {
    const auto& src = basis(m, k);
    const auto& dst = basis(m, k + 1);
    std::vector<Expr> out;
    for (std::size_t r = 0; r < dst.size(); ++r) {
        Expr acc = Expr::constant(0.0);
        const std::uint32_t mask = dst.masks[r];
        for (std::uint32_t rest = mask; rest; rest &= rest - 1) {
            const int i = std::countr_zero(rest);
            const std::uint32_t tail = mask & ~(1u << i);
            const Expr& p = s.partials[static_cast<std::size_t>(src.rank(tail))][static_cast<std::size_t>(i)];
            acc = merge_sign(1u << i, tail) > 0 ? acc + p : acc - p;
        }
        out.push_back(acc);
    }
    return out;
}

} // namespace detail

inline KForm operator+(const KForm& a, const KForm& b) {
    detail::require_dim(a.dim(), b.dim(), "form sum");
    if (a.degree() != b.degree()) throw DegreeError("cannot add forms of different degree");
    if (a.is_symbolic() && b.is_symbolic() && a.symbolic_time() == b.symbolic_time()) {
        std::vector<Expr> c;
        for (std::size_t i = 0; i < a.size(); ++i) c.push_back(a.symbolic_coeffs().coeffs[i] + b.symbolic_coeffs().coeffs[i]);
        return KForm::symbolic(a.dim(), a.degree(), std::move(c), a.symbolic_time());
    }
    CoeffJacFn jac;
    if (a.has_jacobian() && b.has_jacobian()) jac = [a, b](const Point& x) { return Matrix(a.jacobian(x) + b.jacobian(x)); };
    return KForm(a.dim(), a.degree(), [a, b](const Point& x) { return Vector(a.eval(x) + b.eval(x)); }, jac);
}

inline KForm operator*(double s, const KForm& a) {
    if (a.is_symbolic()) {
        std::vector<Expr> c;
        for (const auto& e : a.symbolic_coeffs().coeffs) c.push_back(Expr::constant(s) * e);
        return KForm::symbolic(a.dim(), a.degree(), std::move(c), a.symbolic_time());
    }
    CoeffJacFn jac;
    if (a.has_jacobian()) jac = [a, s](const Point& x) { return Matrix(s * a.jacobian(x)); };
    return KForm(a.dim(), a.degree(), [a, s](const Point& x) { return Vector(s * a.eval(x)); }, jac);
}

inline KForm operator-(const KForm& a, const KForm& b) { return a + (-1.0) * b; }

/// a ∧ b.
inline KForm wedge(const KForm& a, const KForm& b) {
    detail::require_dim(a.dim(), b.dim(), "wedge");
    const int m = a.dim(), ka = a.degree(), kb = b.degree();
    if (ka + kb > m) throw DegreeError("wedge degree " + std::to_string(ka + kb) + " exceeds dimension " + std::to_string(m));
    if (a.is_symbolic() && b.is_symbolic() && a.symbolic_time() == b.symbolic_time())
        return KForm::symbolic(m, ka + kb, detail::symbolic_wedge(a.symbolic_coeffs().coeffs, ka, b.symbolic_coeffs().coeffs, kb, m),
                               a.symbolic_time());
    CoeffJacFn jac;
    if (a.has_jacobian() && b.has_jacobian()) {
        jac = [a, b, m, ka, kb](const Point& x) {
            const Vector va = a.eval(x), vb = b.eval(x);
            const Matrix ja = a.jacobian(x), jb = b.jacobian(x);
            Matrix out(static_cast<Eigen::Index>(basis(m, ka + kb).size()), m);
            for (int j = 0; j < m; ++j)
                out.col(j) = values::wedge(ja.col(j), ka, vb, kb, m) + values::wedge(va, ka, jb.col(j), kb, m);
            return out;
        };
    }
    return KForm(m, ka + kb, [a, b, m, ka, kb](const Point& x) { return values::wedge(a.eval(x), ka, b.eval(x), kb, m); }, jac);
}

/// How exterior_derivative obtains partial derivatives.
struct DerivativeScheme {
    enum class Kind { exact, central } kind = Kind::exact;
    double step = 0.0; // central: absolute step, <= 0 selects 1e-6·max(1,|x|)

    static DerivativeScheme exact() { return {Kind::exact, 0.0}; }
    static DerivativeScheme central(double h = 0.0) { return {Kind::central, h}; }
};

/// da. Symbolic input yields symbolic output (exact derivatives of every order).
inline KForm exterior_derivative(const KForm& a, DerivativeScheme scheme = DerivativeScheme::exact()) {
    const int m = a.dim(), k = a.degree();
    if (k >= m) throw DegreeError("exterior derivative of a top-degree form");
    if (scheme.kind == DerivativeScheme::Kind::exact) {
        if (a.is_symbolic()) return KForm::symbolic(m, k + 1, detail::symbolic_d(a.symbolic_coeffs(), k, m), a.symbolic_time());
        if (!a.has_jacobian()) throw DegreeError("exact exterior derivative requested but the form has no coefficient Jacobian");
        return KForm(m, k + 1, [a, m, k](const Point& x) {
            Vector out = values::exterior_derivative(a.jacobian(x), k, m);
            detail::require_finite(out, x, "exterior derivative");
            return out;
        });
    }
    const double h = scheme.step;
    const CoeffFn c = a.coeff_fn();
    return KForm(m, k + 1, [c, m, k, h](const Point& x) {
        Vector out = values::exterior_derivative(central_jacobian(c, x, h), k, m);
        detail::require_finite(out, x, "exterior derivative");
        return out;
    });
}

/// dω_t for a family; symbolic families stay symbolic.
inline TimeForm exterior_derivative(const TimeForm& a, DerivativeScheme scheme = DerivativeScheme::exact()) {
    const int m = a.dim(), k = a.degree();
    if (k >= m) throw DegreeError("exterior derivative of a top-degree form");
    if (scheme.kind == DerivativeScheme::Kind::exact && a.is_symbolic())
        return TimeForm::symbolic(m, k + 1, detail::symbolic_d(a.symbolic_coeffs(), k, m));
    if (scheme.kind == DerivativeScheme::Kind::exact && !a.has_jacobian())
        throw DegreeError("exact exterior derivative requested but the family has no coefficient Jacobian");
    const double h = scheme.step;
    return TimeForm(m, k + 1, [a, m, k, h](double t, const Point& x) {
        return values::exterior_derivative(a.jacobian(t, x, h), k, m);
    });
}

/// X ⌟ a.
inline KForm interior_product(const VectorField& X, const KForm& a) {
    detail::require_dim(a.dim(), X.dim, "interior product");
    const int m = a.dim(), k = a.degree();
    if (k < 1) throw DegreeError("interior product of a 0-form");
    CoeffJacFn jac;
    if (a.has_jacobian() && X.jacobian) {
        jac = [X, a, m, k](const Point& x) {
            const Vector v = X(x), av = a.eval(x);
            const Matrix jx = X.jacobian(x), ja = a.jacobian(x);
            Matrix out(static_cast<Eigen::Index>(basis(m, k - 1).size()), m);
            for (int j = 0; j < m; ++j) out.col(j) = values::contract(jx.col(j), av, k, m) + values::contract(v, ja.col(j), k, m);
            return out;
        };
    }
    return KForm(m, k - 1, [X, a, m, k](const Point& x) { return values::contract(X(x), a.eval(x), k, m); }, jac);
}

/// φ* a: (φ*a)(x)(v_1..v_k) = a(φ(x))(J v_1, …, J v_k).
inline KForm pullback(const SmoothMap& phi, const KForm& a) {
    detail::require_dim(a.dim(), phi.dim, "pullback");
    const int m = a.dim(), k = a.degree();
    return KForm(m, k, [phi, a, m, k](const Point& x) {
        const Matrix J = phi.jacobian(x);
        if (!J.allFinite()) throw EvaluationError("map Jacobian is not finite at " + detail::format_point(x), x);
        return values::pullback(a.eval(phi(x)), J, k, m);
    });
}

/// Antisymmetric coefficient matrix of a 2-form at x.
inline Matrix two_form_matrix(const KForm& a, const Point& x) {
    if (a.degree() != 2) throw DegreeError("two_form_matrix needs a 2-form");
    return values::two_form_matrix(a.eval(x), a.dim());
}

inline constexpr double kDefaultSingularTol = 1e-9;

/// Inverse W⁻¹ of the coefficient matrix W (the bivector ω⁻¹); X = W⁻¹ s solves X⌟ω = −σ.
inline Matrix invert_two_form_matrix(const Matrix& w, const Point& x, double tol_singular = kDefaultSingularTol) {
    Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double margin = s.size() ? s.minCoeff() : 0.0;
    if (!(margin >= tol_singular))
        throw SingularForm("2-form is degenerate at " + detail::format_point(x) + " (smallest singular value " +
                               std::to_string(margin) + ")",
                           x, margin);
    return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

inline Matrix two_form_inverse(const KForm& a, const Point& x, double tol_singular = kDefaultSingularTol) {
    if (a.degree() != 2) throw DegreeError("two_form_inverse needs a 2-form");
    if (a.dim() % 2 != 0) throw DimensionMismatch("two_form_inverse needs an even-dimensional chart");
    return invert_two_form_matrix(two_form_matrix(a, x), x, tol_singular);
}

/// The standard symplectic form Σ dx_{2i-1}∧dx_{2i} on R^{2n}.
inline KForm standard_symplectic(int m) {
    if (m % 2 != 0) throw DimensionMismatch("standard symplectic form needs an even dimension");
    Vector c = Vector::Zero(static_cast<Eigen::Index>(basis(m, 2).size()));
    for (int i = 0; i < m; i += 2) c[basis(m, 2).rank((1u << i) | (1u << (i + 1)))] = 1.0;
    return KForm::constant(m, 2, c);
}

} // namespace moser

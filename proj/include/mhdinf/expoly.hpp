#pragma once

// Exponential polynomials  p(t) = Σ c · t^m · e^{-λ t}.
//
// The class is closed under addition, products, multiplication by e^{-μ t}
// and the Duhamel integral ∫₀ᵗ e^{-μ(t-τ)} p(τ) dτ, which makes it the time
// coefficient of every plane wave in the exact mode engine.  The coefficient
// type is either a scalar or a Vec3.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"

namespace mhdinf {

inline constexpr double kDefaultPruneTolerance = 1e-15;

/// e^{-x} with the hard underflow guard used throughout: exactly 0 for x > 745.
inline double guarded_exp_neg(double x) {
    if (x > 745.0) return 0.0;
    return std::exp(-x);
}

template <class Coef>
struct ExpTerm {
    Coef c{};
    int m = 0;
    double lambda = 0.0;
};

template <class Coef>
class BasicExpPoly {
public:
    using coef_type = Coef;
    using term_type = ExpTerm<Coef>;

    BasicExpPoly() = default;

    static BasicExpPoly exponential(const Coef& c, double lambda, int m = 0) {
        BasicExpPoly p;
        p.terms_.push_back({c, m, lambda});
        p.canonicalize();
        return p;
    }
    static BasicExpPoly constant(const Coef& c) { return exponential(c, 0.0); }

    const std::vector<term_type>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    /// Appends a raw term; call canonicalize() before relying on invariants.
    void push_raw(const Coef& c, int m, double lambda) { terms_.push_back({c, m, lambda}); }
    void append_raw(const BasicExpPoly& o) { terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end()); }

    /// Merges equal (m, λ) pairs, drops zero terms and prunes negligible ones.
    ///
    /// A term is pruned when its coefficient is below `tol` times the largest
    /// coefficient among terms that decay no faster than it does, so that a
    /// slowly decaying small term is never dropped in favour of a large
    /// transient.
    void canonicalize(double tol = kDefaultPruneTolerance) {
        std::sort(terms_.begin(), terms_.end(), [](const term_type& a, const term_type& b) {
            if (a.lambda != b.lambda) return a.lambda < b.lambda;
            return a.m < b.m;
        });
        std::vector<term_type> merged;
        merged.reserve(terms_.size());
        for (const auto& t : terms_) {
            if (!merged.empty() && merged.back().lambda == t.lambda && merged.back().m == t.m) {
                merged.back().c += t.c;
            } else {
                merged.push_back(t);
            }
        }
        std::vector<term_type> kept;
        kept.reserve(merged.size());
        double running_max = 0.0;
        std::size_t i = 0;
        while (i < merged.size()) {
            std::size_t j = i;
            double group_max = running_max;
            while (j < merged.size() && merged[j].lambda == merged[i].lambda) {
                group_max = std::max(group_max, norm(merged[j].c));
                ++j;
            }
            running_max = group_max;
            for (std::size_t q = i; q < j; ++q) {
                const double a = norm(merged[q].c);
                if (a == 0.0 || a < tol * running_max) continue;
                kept.push_back(merged[q]);
            }
            i = j;
        }
        terms_ = std::move(kept);
    }

    Coef operator()(double t) const {
        Coef acc{};
        if (t == 0.0) {
            for (const auto& term : terms_)
                if (term.m == 0) acc += term.c;
            return acc;
        }
        for (const auto& term : terms_) {
            const double decay = guarded_exp_neg(term.lambda * t);
            if (decay == 0.0) continue;
            double f = decay;
            if (term.m > 0) f *= std::pow(t, term.m);
            acc += term.c * f;
        }
        return acc;
    }

    /// Exact time derivative.
    BasicExpPoly derivative() const {
        BasicExpPoly d;
        for (const auto& term : terms_) {
            if (std::isinf(term.lambda)) continue;
            if (term.m > 0) d.push_raw(term.c * static_cast<double>(term.m), term.m - 1, term.lambda);
            if (term.lambda != 0.0) d.push_raw(term.c * (-term.lambda), term.m, term.lambda);
        }
        d.canonicalize(0.0);
        return d;
    }

    /// Multiplication by e^{-μ t}.
    BasicExpPoly shifted(double mu) const {
        BasicExpPoly p = *this;
        for (auto& term : p.terms_) term.lambda += mu;
        return p;
    }

    BasicExpPoly& operator+=(const BasicExpPoly& o) {
        append_raw(o);
        canonicalize();
        return *this;
    }
    BasicExpPoly& operator-=(const BasicExpPoly& o) {
        for (const auto& term : o.terms_) terms_.push_back({term.c * -1.0, term.m, term.lambda});
        canonicalize();
        return *this;
    }
    BasicExpPoly& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& term : terms_) term.c *= s;
        return *this;
    }
    friend BasicExpPoly operator+(BasicExpPoly a, const BasicExpPoly& b) { return a += b; }
    friend BasicExpPoly operator-(BasicExpPoly a, const BasicExpPoly& b) { return a -= b; }
    friend BasicExpPoly operator*(BasicExpPoly a, double s) { return a *= s; }
    friend BasicExpPoly operator*(double s, BasicExpPoly a) { return a *= s; }

    double max_coefficient() const {
        double m = 0.0;
        for (const auto& term : terms_) m = std::max(m, norm(term.c));
        return m;
    }

    friend bool operator==(const BasicExpPoly& a, const BasicExpPoly& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        for (std::size_t i = 0; i < a.terms_.size(); ++i) {
            const auto& x = a.terms_[i];
            const auto& y = b.terms_[i];
            if (!(x.c == y.c) || x.m != y.m || x.lambda != y.lambda) return false;
        }
        return true;
    }

private:
    std::vector<term_type> terms_;
};

using ExpPoly = BasicExpPoly<double>;
using VecExpPoly = BasicExpPoly<Vec3>;

namespace detail {
inline double mul(double a, double b) { return a * b; }
inline Vec3 mul(double a, const Vec3& b) { return b * a; }
inline Vec3 mul(const Vec3& a, double b) { return a * b; }
}  // namespace detail

/// Product of two exponential polynomials (scalar·scalar or scalar·vector).
template <class A, class B>
auto multiply(const BasicExpPoly<A>& p, const BasicExpPoly<B>& q, double tol = kDefaultPruneTolerance) {
    using C = decltype(detail::mul(A{}, B{}));
    BasicExpPoly<C> out;
    for (const auto& a : p.terms())
        for (const auto& b : q.terms())
            out.push_raw(detail::mul(a.c, b.c), a.m + b.m, a.lambda + b.lambda);
    out.canonicalize(tol);
    return out;
}

/// Scalar polynomial k·V(t).
inline ExpPoly dot(const VecExpPoly& p, const Vec3& k) {
    ExpPoly out;
    for (const auto& t : p.terms()) out.push_raw(dot(t.c, k), t.m, t.lambda);
    out.canonicalize(0.0);
    return out;
}

/// Scalar polynomial U(t)·V(t).
inline ExpPoly dot(const VecExpPoly& p, const VecExpPoly& q, double tol = 0.0) {
    ExpPoly out;
    for (const auto& a : p.terms())
        for (const auto& b : q.terms()) out.push_raw(dot(a.c, b.c), a.m + b.m, a.lambda + b.lambda);
    out.canonicalize(tol);
    return out;
}

inline VecExpPoly outer(const ExpPoly& p, const Vec3& a) {
    VecExpPoly out;
    for (const auto& t : p.terms()) out.push_raw(a * t.c, t.m, t.lambda);
    out.canonicalize(0.0);
    return out;
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// ∫₀ᵗ e^{-μ(t-τ)} p(τ) dτ in closed form.
///
/// For a term c τ^m e^{-λτ} with d = λ - μ ≠ 0,
///   e^{-μt} ∫₀ᵗ τ^m e^{-dτ} dτ = c m!/d^{m+1} e^{-μt} - c Σ_j m!/(j! d^{m+1-j}) t^j e^{-λt};
/// the resonant case d = 0 gives c t^{m+1}/(m+1) e^{-μt}.  Terms with λ = ∞
/// vanish for t > 0 and therefore integrate to zero.  The two halves of the
/// non-resonant form cancel to O(c m!/|d|^{m+1}·eps) near t = 0, which is
/// harmless for integer decay rates (|d| ≥ 1) but not for nearly resonant ones.
template <class Coef>
BasicExpPoly<Coef> expoly_duhamel(const BasicExpPoly<Coef>& p, double mu) {
    require(mu >= 0.0, "expoly_duhamel: decay rate must be nonnegative");
    BasicExpPoly<Coef> out;
    for (const auto& term : p.terms()) {
        if (std::isinf(term.lambda)) continue;
        const double d = term.lambda - mu;
        if (d == 0.0) {
            out.push_raw(term.c * (1.0 / (term.m + 1)), term.m + 1, mu);
            continue;
        }
        const double mf = factorial(term.m);
        if (!std::isinf(mu)) out.push_raw(term.c * (mf / std::pow(d, term.m + 1)), 0, mu);
        double jf = 1.0;
        for (int j = 0; j <= term.m; ++j) {
            if (j > 0) jf *= j;
            out.push_raw(term.c * (-(mf / jf) / std::pow(d, term.m + 1 - j)), j, term.lambda);
        }
    }
    out.canonicalize();
    return out;
}

/// ∫_a^b t^m e^{-λt} dt for 0 ≤ a ≤ b.
inline double integrate_term(int m, double lambda, double a, double b) {
    if (b <= a) return 0.0;
    if (std::isinf(lambda)) return 0.0;
    if (lambda == 0.0) return (std::pow(b, m + 1) - std::pow(a, m + 1)) / (m + 1);
    if (m == 0) return guarded_exp_neg(lambda * a) * (-std::expm1(-lambda * (b - a))) / lambda;
    const double la = lambda * a;
    const double lb = lambda * b;
    const double scale = std::exp(std::lgamma(m + 1.0) - (m + 1) * std::log(lambda));
    double diff;
    if (la > m + 1.0) {
        diff = boost::math::gamma_q(m + 1.0, la) - boost::math::gamma_q(m + 1.0, lb);
    } else {
        diff = boost::math::gamma_p(m + 1.0, lb) - boost::math::gamma_p(m + 1.0, la);
    }
    return scale * diff;
}

template <class Coef>
Coef integrate(const BasicExpPoly<Coef>& p, double a, double b) {
    Coef acc{};
    for (const auto& t : p.terms()) acc += t.c * integrate_term(t.m, t.lambda, a, b);
    return acc;
}

}  // namespace mhdinf

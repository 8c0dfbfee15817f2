#pragma once

// Exact algebra of finite plane-wave sums on the 2π-periodic torus.
//
// A ModeField is Σ_modes  f_p(k·x) C_{k,p}(t)  with f_cos = cos, f_sin = sin,
// integer k ≠ 0 and a vector-valued exponential polynomial C.  Keys are kept
// in canonical orientation (first nonzero component of k positive); the sign
// of a flipped sine wave is absorbed into its coefficient.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "expoly.hpp"

namespace mhdinf {

enum class Parity : std::uint8_t { cos = 0, sin = 1 };

inline const char* to_string(Parity p) { return p == Parity::cos ? "cos" : "sin"; }
inline Parity flip(Parity p) { return p == Parity::cos ? Parity::sin : Parity::cos; }
inline double trig(Parity p, double phase) { return p == Parity::cos ? std::cos(phase) : std::sin(phase); }

struct ModeKey {
    IVec3 k{};
    Parity parity = Parity::cos;
    friend auto operator<=>(const ModeKey&, const ModeKey&) = default;
};

/// True when the first nonzero component of k is positive.
inline bool is_canonical(const IVec3& k) {
    for (auto c : k) {
        if (c > 0) return true;
        if (c < 0) return false;
    }
    return false;
}

/// Canonical orientation of (k, parity) and the sign picked up by the flip.
inline std::pair<ModeKey, double> canonical_key(const IVec3& k, Parity p) {
    if (is_canonical(k)) return {{k, p}, 1.0};
    return {{-k, p}, p == Parity::sin ? -1.0 : 1.0};
}

struct ModeFieldOptions {
    double prune_tol = kDefaultPruneTolerance;
    std::size_t mode_cap = 200000;
};

struct TrigMode {
    IVec3 k{};
    Parity parity = Parity::cos;
    VecExpPoly coeff;
};

class ModeField {
public:
    using Map = std::map<ModeKey, VecExpPoly>;

    ModeField() = default;
    explicit ModeField(ModeFieldOptions opts) : opts_(opts) {}

    static ModeField plane_wave(const IVec3& k, Parity p, const Vec3& a, const ExpPoly& coeff = ExpPoly::constant(1.0)) {
        ModeField f;
        f.add(k, p, outer(coeff, a));
        f.divergence_free_ = std::abs(dot(k, a)) <= 1e-14 * std::sqrt(norm2(k)) * norm(a);
        return f;
    }

    const ModeFieldOptions& options() const { return opts_; }
    void set_options(ModeFieldOptions o) { opts_ = o; }

    const Map& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    bool empty() const { return modes_.empty(); }

    bool divergence_free() const { return divergence_free_; }
    void set_divergence_free(bool claim) { divergence_free_ = claim; }

    /// Adds c·f_p(k·x); k = 0 is rejected for cosines and dropped for sines.
    void add(const IVec3& k, Parity p, const VecExpPoly& c) {
        if (is_zero(k)) {
            if (p == Parity::sin || c.empty()) return;
            throw PreconditionError("ModeField: zero-frequency mode with nonzero coefficient");
        }
        auto [key, sign] = canonical_key(k, p);
        auto& slot = modes_[key];
        for (const auto& t : c.terms()) slot.push_raw(t.c * sign, t.m, t.lambda);
        slot.canonicalize(opts_.prune_tol);
        if (slot.empty()) modes_.erase(key);
        check_cap();
    }

    /// Inserts an already canonical coefficient; used by accumulators.
    void emplace_canonical(const ModeKey& key, VecExpPoly&& c) {
        if (c.empty()) return;
        modes_[key] = std::move(c);
        check_cap();
    }

    ModeField& operator+=(const ModeField& o) {
        for (const auto& [key, c] : o.modes_) add(key.k, key.parity, c);
        divergence_free_ = divergence_free_ && o.divergence_free_;
        return *this;
    }
    ModeField& operator-=(const ModeField& o) {
        for (const auto& [key, c] : o.modes_) add(key.k, key.parity, c * -1.0);
        divergence_free_ = divergence_free_ && o.divergence_free_;
        return *this;
    }
    ModeField& operator*=(double s) {
        if (s == 0.0) {
            modes_.clear();
            return *this;
        }
        for (auto& [key, c] : modes_) c *= s;
        return *this;
    }
    friend ModeField operator+(ModeField a, const ModeField& b) { return a += b; }
    friend ModeField operator-(ModeField a, const ModeField& b) { return a -= b; }
    friend ModeField operator*(ModeField a, double s) { return a *= s; }
    friend ModeField operator*(double s, ModeField a) { return a *= s; }

    Vec3 eval(const Vec3& x, double t) const {
        Vec3 acc;
        for (const auto& [key, c] : modes_) {
            const double phase = static_cast<double>(key.k[0]) * x[0] + static_cast<double>(key.k[1]) * x[1] +
                                 static_cast<double>(key.k[2]) * x[2];
            acc += c(t) * trig(key.parity, phase);
        }
        return acc;
    }

    /// Snapshot at time t: every coefficient frozen to its value C(t).
    ModeField at_time(double t) const {
        ModeField out(opts_);
        for (const auto& [key, c] : modes_) {
            const Vec3 a = c(t);
            if (a == Vec3{}) continue;
            out.modes_[key] = VecExpPoly::constant(a);
        }
        out.divergence_free_ = divergence_free_;
        return out;
    }

    /// max over modes and terms of |k·c| / (|k| |c|).
    double divergence_defect() const {
        double worst = 0.0;
        for (const auto& [key, c] : modes_) {
            const Vec3 kv = to_vec(key.k);
            const double kn = norm(kv);
            for (const auto& t : c.terms()) {
                const double cn = norm(t.c);
                if (cn == 0.0) continue;
                worst = std::max(worst, std::abs(dot(kv, t.c)) / (kn * cn));
            }
        }
        return worst;
    }

    /// Largest |k_i| over all modes, per axis.
    IVec3 max_wavenumber() const {
        IVec3 m{0, 0, 0};
        for (const auto& [key, c] : modes_)
            for (int i = 0; i < 3; ++i) m[i] = std::max<std::int64_t>(m[i], key.k[i] < 0 ? -key.k[i] : key.k[i]);
        return m;
    }

    double max_coefficient() const {
        double m = 0.0;
        for (const auto& [key, c] : modes_) m = std::max(m, c.max_coefficient());
        return m;
    }

    std::size_t term_count() const {
        std::size_t n = 0;
        for (const auto& [key, c] : modes_) n += c.size();
        return n;
    }

    friend bool operator==(const ModeField& a, const ModeField& b) {
        return a.divergence_free_ == b.divergence_free_ && a.modes_ == b.modes_;
    }

private:
    void check_cap() const {
        if (modes_.size() > opts_.mode_cap)
            throw ModeCapExceeded("ModeField: mode cap of " + std::to_string(opts_.mode_cap) + " exceeded");
    }

    ModeFieldOptions opts_{};
    Map modes_;
    bool divergence_free_ = false;
};

/// Collects raw terms per canonical key and canonicalizes once at the end.
class ModeAccumulator {
public:
    explicit ModeAccumulator(ModeFieldOptions opts = {}) : opts_(opts) {}

    void add(const IVec3& k, Parity p, const VecExpPoly& c, double sign) {
        if (is_zero(k)) {
            if (p == Parity::sin) return;
            for (const auto& t : c.terms()) mean_.push_raw(t.c * sign, t.m, t.lambda);
            return;
        }
        auto [key, flip_sign] = canonical_key(k, p);
        auto& slot = raw_[key];
        const double s = sign * flip_sign;
        for (const auto& t : c.terms()) slot.push_raw(t.c * s, t.m, t.lambda);
    }

    std::pair<ModeField, VecExpPoly> finish() && {
        ModeField out(opts_);
        if (raw_.size() > opts_.mode_cap)
            throw ModeCapExceeded("ModeField: mode cap of " + std::to_string(opts_.mode_cap) + " exceeded");
        for (auto& [key, c] : raw_) {
            c.canonicalize(opts_.prune_tol);
            out.emplace_canonical(key, std::move(c));
        }
        mean_.canonicalize(opts_.prune_tol);
        return {std::move(out), std::move(mean_)};
    }

private:
    ModeFieldOptions opts_;
    std::map<ModeKey, VecExpPoly> raw_;
    VecExpPoly mean_;
};

// ---------------------------------------------------------------------------
// Product-to-sum

/// One output wave of a trigonometric product; the overall factor ½ is implied.
struct TrigTerm {
    IVec3 k{};
    Parity parity = Parity::cos;
    double sign = 1.0;
};

/// f_pa(A)·f_pb(B) = ½ Σ sign · f_parity(k·x) with A = ka·x, B = kb·x.
inline std::array<TrigTerm, 2> trig_product(const IVec3& ka, Parity pa, const IVec3& kb, Parity pb) {
    const IVec3 diff = ka - kb;
    const IVec3 sum = ka + kb;
    if (pa == Parity::cos && pb == Parity::cos) return {{{diff, Parity::cos, 1.0}, {sum, Parity::cos, 1.0}}};
    if (pa == Parity::sin && pb == Parity::cos) return {{{diff, Parity::sin, 1.0}, {sum, Parity::sin, 1.0}}};
    if (pa == Parity::cos && pb == Parity::sin) return {{{diff, Parity::sin, -1.0}, {sum, Parity::sin, 1.0}}};
    return {{{diff, Parity::cos, 1.0}, {sum, Parity::cos, -1.0}}};
}

struct ScalarWave {
    IVec3 k{};
    Parity parity = Parity::cos;
    ExpPoly coeff;

    double eval(const Vec3& x, double t) const { return coeff(t) * trig(parity, dot(k, x)); }
};

struct ProductExpansion {
    std::vector<ScalarWave> waves;  ///< canonical, nonzero k
    ExpPoly mean;                   ///< zero-frequency part
};

inline ProductExpansion mode_product(const ScalarWave& f, const ScalarWave& g) {
    ProductExpansion out;
    const ExpPoly c = multiply(f.coeff, g.coeff) * 0.5;
    for (const auto& term : trig_product(f.k, f.parity, g.k, g.parity)) {
        if (is_zero(term.k)) {
            if (term.parity == Parity::cos) out.mean += c * term.sign;
            continue;
        }
        auto [key, s] = canonical_key(term.k, term.parity);
        out.waves.push_back({key.k, key.parity, c * (term.sign * s)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Linear operators

/// e^{tΔ}: every coefficient is multiplied by e^{-|k|² t}.
inline ModeField heat_propagate(const ModeField& f) {
    ModeField out(f.options());
    for (const auto& [key, c] : f.modes()) out.emplace_canonical(key, c.shifted(norm2(key.k)));
    out.set_divergence_free(f.divergence_free());
    return out;
}

/// Leray projector: a ↦ a − k (k·a)/|k|² per mode and term.
inline ModeField leray_project(const ModeField& f) {
    ModeField out(f.options());
    for (const auto& [key, c] : f.modes()) {
        const Vec3 kv = to_vec(key.k);
        const double k2 = dot(kv, kv);
        VecExpPoly p;
        for (const auto& t : c.terms()) p.push_raw(t.c - kv * (dot(kv, t.c) / k2), t.m, t.lambda);
        p.canonicalize(f.options().prune_tol);
        out.emplace_canonical(key, std::move(p));
    }
    out.set_divergence_free(true);
    return out;
}

/// Per mode, C ↦ ∫₀ᵗ e^{-|k|²(t-τ)} C(τ) dτ.
inline ModeField duhamel_heat_integral(const ModeField& source) {
    ModeField out(source.options());
    for (const auto& [key, c] : source.modes()) out.emplace_canonical(key, expoly_duhamel(c, norm2(key.k)));
    out.set_divergence_free(source.divergence_free());
    return out;
}

// ---------------------------------------------------------------------------
// Advection

struct AdvectResult {
    ModeField field;
    VecExpPoly mean;  ///< zero-frequency residue
};

/// Exact expansion of (u·∇)v.
inline AdvectResult advect(const ModeField& u, const ModeField& v) {
    ModeFieldOptions opts = u.options();
    opts.mode_cap = std::min(u.options().mode_cap, v.options().mode_cap);
    const double tol = opts.prune_tol;
    ModeAccumulator acc(opts);
    for (const auto& [vkey, V] : v.modes()) {
        const Vec3 kv = to_vec(vkey.k);
        // ∇ cos(k·x) = −k sin(k·x),  ∇ sin(k·x) = k cos(k·x)
        const Parity dparity = flip(vkey.parity);
        const double dsign = vkey.parity == Parity::cos ? -1.0 : 1.0;
        for (const auto& [ukey, U] : u.modes()) {
            const ExpPoly s = dot(U, kv);
            if (s.empty()) continue;
            const VecExpPoly c = multiply(s, V, tol);
            if (c.empty()) continue;
            for (const auto& term : trig_product(ukey.k, ukey.parity, vkey.k, dparity))
                acc.add(term.k, term.parity, c, 0.5 * dsign * term.sign);
        }
    }
    auto [field, mean] = std::move(acc).finish();
    return {std::move(field), std::move(mean)};
}

/// Pointwise evaluation at a list of (x, t).
inline std::vector<Vec3> eval_field(const ModeField& f, std::span<const std::pair<Vec3, double>> points) {
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (const auto& [x, t] : points) out.push_back(f.eval(x, t));
    return out;
}

}  // namespace mhdinf

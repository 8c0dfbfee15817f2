#pragma once

// Plane-wave norm-inflation data: parameters, the cascade of wave pairs
// (k_s, k_s' = k_s − η) with amplitudes (v, v_s'), the initial data, the first
// Picard iterates in closed form and the time windows T_α = |k_{r_α}|^{-2}.
//
// Paper-law magnitudes m_s = 2^s k0 m_{s-1} outgrow 64 bits quickly; they are
// kept as exact big integers with log₂ alongside, and mode fields can only be
// built while every magnitude fits an int64.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "expoly.hpp"
#include "mode_field.hpp"

namespace mhdinf {

using BigInt = boost::multiprecision::cpp_int;

class MagnitudeOverflow : public Error {
public:
    using Error::Error;
};

enum class CascadeLaw { paper, tempered };

inline const char* to_string(CascadeLaw l) { return l == CascadeLaw::paper ? "paper" : "tempered"; }

inline CascadeLaw cascade_law_from_string(const std::string& s) {
    if (s == "paper") return CascadeLaw::paper;
    if (s == "tempered") return CascadeLaw::tempered;
    throw PreconditionError("unknown cascade law: " + s);
}

struct BPParams {
    double delta = 0.0;  ///< 0 when Q, r, k0 were given directly
    std::int64_t Q = 1;
    std::int64_t r = 1;
    std::int64_t k0_mag = 4;
    IVec3 eta{0, 1, 0};
    Vec3 v{0.0, 0.0, 1.0};
    CascadeLaw law = CascadeLaw::tempered;
    double T = 0.0;
};

/// Checks η, v and the positivity of Q, r, k0.
inline void validate_params(const BPParams& p) {
    require(p.Q >= 1 && p.r >= 1 && p.k0_mag >= 1, "BPParams: Q, r and k0_mag must be positive");
    require(norm2(p.eta) == 1.0 && p.eta[0] == 0, "BPParams: eta must be an integer unit vector orthogonal to e1");
    require(std::abs(norm(p.v) - 1.0) <= 1e-14, "BPParams: |v| must be 1");
    require(dot(p.eta, p.v) == 0.0 && p.v[0] == 0.0, "BPParams: v must be orthogonal to eta and e1");
}

/// Q²/r < Q^{-1/2} and Q²√T < Q^{-1/2}.
struct ChainChecks {
    bool amplitude = false;
    bool horizon = false;
    bool ok() const { return amplitude && horizon; }
};

inline ChainChecks chain_checks(const BPParams& p) {
    const double Q = double(p.Q), lim = 1.0 / std::sqrt(Q);
    return {Q * Q / double(p.r) < lim, Q * Q * std::sqrt(p.T) < lim};
}

/// |k_1| for a given k0: 2k0² (paper) or 2k0 (tempered).
inline double first_magnitude(std::int64_t k0, CascadeLaw law) {
    return law == CascadeLaw::paper ? 2.0 * double(k0) * double(k0) : 2.0 * double(k0);
}

/// δ → Q → (r, T) → k0.
inline BPParams resolve_parameters(double delta, CascadeLaw law) {
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("resolve_parameters: delta must lie in (0, 1)");
    BPParams p;
    p.delta = delta;
    p.law = law;
    p.Q = std::int64_t(std::ceil(std::pow(delta, -0.5) - 1e-12));
    const double Q = double(p.Q);
    const double bound = std::max(2.0 * std::pow(Q, 2.5), 2.0 * Q * Q / (delta * delta));
    const double beta = Q * Q * Q;
    p.r = std::int64_t(beta * std::ceil(bound / beta));
    p.T = 0.5 * std::min(delta, std::pow(Q, -5.0));
    p.k0_mag = std::int64_t(std::ceil(10.0 / std::sqrt(p.T) - 1e-9));
    while (double(p.k0_mag) < 10.0 / std::sqrt(p.T)) ++p.k0_mag;
    while (1.0 / (first_magnitude(p.k0_mag, law) * first_magnitude(p.k0_mag, law)) > p.T / 100.0) ++p.k0_mag;
    validate_params(p);
    if (!chain_checks(p).ok()) throw NumericalError("resolve_parameters: derived inequalities fail");
    return p;
}

struct WavePair {
    IVec3 k{};
    IVec3 kp{};
    Vec3 v;
    Vec3 vp;
};

struct WaveSystem {
    CascadeLaw law = CascadeLaw::tempered;
    IVec3 eta{0, 1, 0};
    Vec3 v{0.0, 0.0, 1.0};
    std::vector<BigInt> m;       ///< m_0 = k0, …, m_r (exact)
    std::vector<double> log2_m;  ///< log₂ m_s
    std::vector<WavePair> pairs; ///< s = 1..r, present only when every m_s fits an int64

    std::size_t r() const { return m.empty() ? 0 : m.size() - 1; }
    bool exact() const { return pairs.size() == r(); }
    /// m_s as a double; +inf beyond the double range.
    double magnitude(std::size_t s) const { return std::exp2(log2_m[s]); }
};

/// v_s' = (1/(2m)) e1 + ½ η + √(¾ − 1/(4m²)) (e1 × η).
inline Vec3 primed_amplitude(double m, const IVec3& eta) {
    const Vec3 e = to_vec(eta);
    const Vec3 w{0.0, -e[2], e[1]};  // e1 × η
    const double a = 0.5 / m;
    return Vec3{a, 0.0, 0.0} + e * 0.5 + w * std::sqrt(0.75 - a * a);
}

namespace detail {

inline WaveSystem assemble_wave_system(std::vector<BigInt> m, std::vector<double> log2_m, CascadeLaw law, const IVec3& eta, const Vec3& v) {
    WaveSystem ws;
    ws.law = law;
    ws.eta = eta;
    ws.v = v;
    ws.m = std::move(m);
    ws.log2_m = std::move(log2_m);
    const BigInt lim = BigInt(std::numeric_limits<std::int64_t>::max());
    bool fits = true;
    for (const auto& x : ws.m) fits = fits && x <= lim;
    if (fits)
        for (std::size_t s = 1; s < ws.m.size(); ++s) {
            const std::int64_t ms = ws.m[s].convert_to<std::int64_t>();
            const IVec3 k{ms, 0, 0};
            ws.pairs.push_back({k, k - eta, v, primed_amplitude(double(ms), eta)});
        }
    return ws;
}

}  // namespace detail

/// m_0 = k0; paper law m_s = 2^s k0 m_{s-1}, tempered m_s = 2^s k0.
inline WaveSystem build_wave_system(const BPParams& p, bool require_int64 = false) {
    validate_params(p);
    std::vector<BigInt> m{BigInt(p.k0_mag)};
    std::vector<double> lg{std::log2(double(p.k0_mag))};
    for (std::int64_t s = 1; s <= p.r; ++s) {
        const BigInt f = (BigInt(1) << unsigned(s)) * p.k0_mag;
        if (p.law == CascadeLaw::paper) {
            m.push_back(f * m.back());
            lg.push_back(double(s) + lg[0] + lg.back());
        } else {
            m.push_back(f);
            lg.push_back(double(s) + lg[0]);
        }
    }
    WaveSystem ws = detail::assemble_wave_system(std::move(m), std::move(lg), p.law, p.eta, p.v);
    if (require_int64 && !ws.exact())
        throw MagnitudeOverflow("build_wave_system: magnitudes exceed 64-bit integers (largest log2 = " + std::to_string(ws.log2_m.back()) + ")");
    return ws;
}

/// A system with prescribed magnitudes m_0..m_r, e.g. to exercise the validator.
inline WaveSystem wave_system_from_magnitudes(const std::vector<std::int64_t>& m, CascadeLaw law = CascadeLaw::tempered,
                                              const IVec3& eta = {0, 1, 0}, const Vec3& v = {0.0, 0.0, 1.0}) {
    require(!m.empty(), "wave_system_from_magnitudes: need m_0");
    std::vector<BigInt> big;
    std::vector<double> lg;
    for (auto x : m) {
        require(x >= 1, "wave_system_from_magnitudes: magnitudes must be positive");
        big.emplace_back(x);
        lg.push_back(std::log2(double(x)));
    }
    return detail::assemble_wave_system(std::move(big), std::move(lg), law, eta, v);
}

// ---------------------------------------------------------------------------
// Validation

struct Check {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
    bool applicable = true;
};

struct ValidationReport {
    std::vector<Check> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    const Check& get(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw PreconditionError("no check named " + name);
    }
};

/// √t Σ_{s=1}^r m_s e^{-m_s² t} evaluated in the log domain.
inline double cascade_envelope(const WaveSystem& ws, double t) {
    double acc = 0.0;
    for (std::size_t s = 1; s <= ws.r(); ++s) {
        const double lm = ws.log2_m[s] * std::log(2.0);
        const double e = lm - std::exp(2.0 * lm) * t;
        if (e > -745.0) acc += std::exp(e);
    }
    return std::sqrt(t) * acc;
}

/// sup_t of the envelope on a log grid with Brent polish.
inline double cascade_envelope_sup(const WaveSystem& ws, double* t_arg = nullptr) {
    if (ws.r() == 0) return 0.0;
    const double lo = std::log(1e-2) - 2.0 * ws.log2_m.back() * std::log(2.0);
    const double hi = std::log(10.0) - 2.0 * ws.log2_m[1] * std::log(2.0);
    const int n = std::max(400, int(40 * (hi - lo) / std::log(10.0)));
    double best = 0.0, arg = lo;
    for (int j = 0; j <= n; ++j) {
        const double s = lo + (hi - lo) * j / n;
        const double v = cascade_envelope(ws, std::exp(s));
        if (v > best) {
            best = v;
            arg = s;
        }
    }
    const double h = (hi - lo) / n;
    const auto [s, v] = boost::math::tools::brent_find_minima([&](double s) { return -cascade_envelope(ws, std::exp(s)); }, arg - h, arg + h, 40);
    if (-v > best) {
        best = -v;
        arg = s;
    }
    if (t_arg) *t_arg = std::exp(arg);
    return best;
}

/// (a) partial sums, (b) envelope ≤ √π, (c) orthogonality plus the primed-amplitude
/// constraints, (d) tail sum for paper law.
inline ValidationReport validate_wave_system(const WaveSystem& ws) {
    ValidationReport rep;
    const std::size_t r = ws.r();
    const double ln2 = std::log(2.0);

    // (a) Σ_{l<s} m_l ≤ 2 m_{s-1}
    double worst = 0.0;
    for (std::size_t s = 1; s <= r; ++s) {
        double sum = 0.0;
        for (std::size_t l = 0; l < s; ++l) sum += std::exp2(ws.log2_m[l] - ws.log2_m[s - 1]);
        worst = std::max(worst, sum);
    }
    rep.checks.push_back({"partial_sums", worst, 2.0, worst <= 2.0});

    // (b)
    const double env = cascade_envelope_sup(ws);
    rep.checks.push_back({"envelope", env, std::sqrt(pi), env <= std::sqrt(pi)});

    // (c) v·k_j = v·k_j' = v·η = 0 and k_s − k_s' = η, all exact
    const Vec3 e1{1.0, 0.0, 0.0};
    const Vec3 eta = to_vec(ws.eta);
    double ortho = std::max(std::abs(dot(ws.v, e1)), std::abs(dot(ws.v, eta)));
    bool exact_ok = true;
    for (const auto& p : ws.pairs) {
        exact_ok = exact_ok && p.k - p.kp == ws.eta;
        ortho = std::max({ortho, std::abs(dot(p.k, ws.v)), std::abs(dot(p.kp, ws.v))});
    }
    rep.checks.push_back({"orthogonality", ortho, 0.0, exact_ok && ortho == 0.0});

    // k_s'·v_s' = 0, η·v_s' = ½, |v_s'| = 1 in floating point
    double defect = 0.0;
    for (std::size_t s = 1; s <= r; ++s) {
        const double m = ws.magnitude(s);
        const Vec3 vp = ws.exact() ? ws.pairs[s - 1].vp : primed_amplitude(m, ws.eta);
        // k_s' = m e1 − η
        const double kv = ws.exact() ? dot(ws.pairs[s - 1].kp, vp) : m * vp[0] - dot(eta, vp);
        defect = std::max({defect, std::abs(kv) / m, std::abs(dot(eta, vp) - 0.5), std::abs(norm(vp) - 1.0)});
    }
    rep.checks.push_back({"primed_constraints", defect, 1e-14, defect <= 1e-14});

    // (d) Σ_i m_i e^{-m_i²/m_0²} ≤ 1
    if (ws.law == CascadeLaw::paper && ws.log2_m[0] >= 1.0) {
        double sum = 0.0;
        for (std::size_t s = 1; s <= r; ++s) {
            const double e = ws.log2_m[s] * ln2 - std::exp2(2.0 * (ws.log2_m[s] - ws.log2_m[0]));
            if (e > -745.0) sum += std::exp(e);
        }
        rep.checks.push_back({"tail_sum", sum, 1.0, sum <= 1.0});
    } else {
        rep.checks.push_back({"tail_sum", 0.0, 1.0, true, false});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Data and closed forms

struct InitialData {
    ModeField u0;
    ModeField b0;
};

inline void require_exact(const WaveSystem& ws) {
    if (!ws.exact()) throw MagnitudeOverflow("wave system magnitudes do not fit 64-bit wave vectors");
}

/// u0 = (Q/√r) Σ|k_s| v cos(k_s·x), b0 = (Q/√r) Σ|k_s'| v_s' cos(k_s'·x).
inline InitialData build_initial_data(const WaveSystem& ws, double Q, double r) {
    require_exact(ws);
    const double a = Q / std::sqrt(r);
    InitialData d;
    for (const auto& p : ws.pairs) {
        d.u0.add(p.k, Parity::cos, VecExpPoly::constant(p.v * (a * std::sqrt(norm2(p.k)))));
        d.b0.add(p.kp, Parity::cos, VecExpPoly::constant(p.vp * (a * std::sqrt(norm2(p.kp)))));
    }
    d.u0.set_divergence_free(true);
    d.b0.set_divergence_free(true);
    return d;
}

/// (e^{-λt} − e^{-μt})/(μ − λ), or t e^{-λt} at resonance: ∫₀ᵗ e^{-μ(t-τ)} e^{-λτ} dτ.
inline ExpPoly heat_response(double lambda, double mu) {
    if (lambda == mu) return ExpPoly::exponential(1.0, lambda, 1);
    ExpPoly p;
    p.push_raw(1.0 / (mu - lambda), 0, lambda);
    p.push_raw(-1.0 / (mu - lambda), 0, mu);
    p.canonicalize(0.0);
    return p;
}

inline Vec3 project_on(const IVec3& q, const Vec3& a) {
    const double q2 = norm2(q);
    return q2 == 0.0 ? a : a - to_vec(q) * (dot(q, a) / q2);
}

struct FirstIterates {
    ModeField u1;
    ModeField b1_0;  ///< the resonant η-mode
    ModeField b1_1;  ///< everything else
    ModeField b1() const { return b1_0 + b1_1; }
};

/// Explicit pairwise sums for u1 = B(hu,hu) − B(hb,hb) and b1 = B(hu,hb) − B(hb,hu),
/// hu, hb the heat flows of the initial data.  Along the cascade v·k = v·k' = 0,
/// so B(hu,hu) = 0 and B(hu,hb) = 0; the rest is
///   (a·∇)(c cos(k'·x)) with cos A·(−sin B) = ½ sin(A−B) − ½ sin(A+B).
inline FirstIterates closed_form_first_iterates(const WaveSystem& ws, double Q, double r) {
    require_exact(ws);
    const double amp = Q / std::sqrt(r);
    FirstIterates out;
    const auto& P = ws.pairs;
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = 0; j < P.size(); ++j) {
            const double ci = amp * std::sqrt(norm2(P[i].kp));
            {
                // −B(hb,hb): hb_i·∇ hb_j
                const double cj = amp * std::sqrt(norm2(P[j].kp));
                const double g = dot(P[j].kp, P[i].vp);
                if (g != 0.0) {
                    const double lam = norm2(P[i].kp) + norm2(P[j].kp);
                    const double w = -0.5 * ci * cj * g;
                    const IVec3 qm = P[i].kp - P[j].kp, qp = P[i].kp + P[j].kp;
                    if (!is_zero(qm)) out.u1.add(qm, Parity::sin, outer(heat_response(lam, norm2(qm)), project_on(qm, P[j].vp) * w));
                    out.u1.add(qp, Parity::sin, outer(heat_response(lam, norm2(qp)), project_on(qp, P[j].vp) * -w));
                }
            }
            {
                // −B(hb,hu): hb_i·∇ hu_j
                const double aj = amp * std::sqrt(norm2(P[j].k));
                const double g = dot(P[j].k, P[i].vp);
                const double lam = norm2(P[i].kp) + norm2(P[j].k);
                const double w = -0.5 * ci * aj * g;
                const IVec3 qm = P[i].kp - P[j].k, qp = P[i].kp + P[j].k;
                ModeField& target = i == j ? out.b1_0 : out.b1_1;
                target.add(qm, Parity::sin, outer(heat_response(lam, norm2(qm)), project_on(qm, P[j].v) * w));
                out.b1_1.add(qp, Parity::sin, outer(heat_response(lam, norm2(qp)), project_on(qp, P[j].v) * -w));
            }
        }
    out.u1.set_divergence_free(true);
    out.b1_0.set_divergence_free(true);
    out.b1_1.set_divergence_free(true);
    return out;
}

/// Amplitude of b1_0 along v sin(η·x):
///   Q²/(4r) Σ |k_i||k_i'| (e^{-t} − e^{-(|k_i|²+|k_i'|²)t})/(|k_i|²+|k_i'|²−1),
/// from log₂ magnitudes, so valid far beyond 64-bit wave vectors.
inline double b10_amplitude(const WaveSystem& ws, double Q, double r, double t) {
    double acc = 0.0;
    for (std::size_t s = 1; s <= ws.r(); ++s) {
        const double m = ws.magnitude(s);
        const double m2 = m * m;  // |k|² = m², |k'|² = m² + 1
        double ratio, lam;
        if (std::isfinite(m2) && m2 < 1e30) {
            ratio = m * std::sqrt(m2 + 1.0) / (2.0 * m2);
            lam = 2.0 * m2 + 1.0;
        } else {
            ratio = 0.5;
            lam = std::numeric_limits<double>::infinity();
        }
        acc += ratio * (std::exp(-t) - (t > 0.0 ? guarded_exp_neg(lam * t) : 1.0));
    }
    return Q * Q / (4.0 * r) * acc;
}

struct TwoWave {
    ModeField u0;
    ModeField b0;
    ModeField b1_0;  ///< ¼ v₁ sin((k₁−k₂)·x) (e^{-|k₁−k₂|²t} − e^{-(|k₁|²+|k₂|²)t})/(2k₁·k₂)
    ModeField b1_1;  ///< ¼ v₁ sin((k₁+k₂)·x) (e^{-(|k₁|²+|k₂|²)t} − e^{-|k₁+k₂|²t})/(2k₁·k₂)
    ModeField b1() const { return b1_0 + b1_1; }
};

/// u0 = s v₁ cos(k₁·x), b0 = s v₂ cos(k₂·x) with k₁·v₁ = k₂·v₂ = k₂·v₁ = 0, k₁·v₂ = ½.
inline TwoWave two_wave_interaction(const IVec3& k1, const IVec3& k2, const Vec3& v1, const Vec3& v2, double scale = 1.0) {
    const double tol = 1e-14;
    auto near = [&](double a, double b, double s) { return std::abs(a - b) <= tol * std::max(1.0, s); };
    const double s1 = std::sqrt(norm2(k1)) * norm(v1), s2 = std::sqrt(norm2(k2)) * norm(v2);
    if (!(near(dot(k1, v1), 0.0, s1) && near(dot(k2, v2), 0.0, s2) && near(dot(k2, v1), 0.0, std::sqrt(norm2(k2)) * norm(v1)) &&
          near(dot(k1, v2), 0.5, std::sqrt(norm2(k1)) * norm(v2))))
        throw PreconditionError("two_wave_interaction: orthogonality constraints violated");
    TwoWave w;
    w.u0 = ModeField::plane_wave(k1, Parity::cos, v1 * scale);
    w.b0 = ModeField::plane_wave(k2, Parity::cos, v2 * scale);
    const double lam = norm2(k1) + norm2(k2);
    const double c = 0.25 * scale * scale;
    w.b1_0.add(k1 - k2, Parity::sin, outer(heat_response(lam, norm2(k1 - k2)), v1 * c));
    w.b1_1.add(k1 + k2, Parity::sin, outer(heat_response(lam, norm2(k1 + k2)), v1 * c));
    w.b1_0.set_divergence_free(true);
    w.b1_1.set_divergence_free(true);
    return w;
}

// ---------------------------------------------------------------------------
// Schedule

struct ScheduleEntry {
    std::int64_t alpha = 0;
    std::int64_t r_alpha = 0;
    double T_alpha = 0.0;
    double log2_T_alpha = 0.0;
};

struct TimeSchedule {
    std::int64_t beta = 0;
    double T0 = 0.0;  ///< |k_r|^{-2}, the start of the first window
    std::vector<ScheduleEntry> alphas;
};

/// β = Q³, r_α = r − α r/Q³, T_α = |k_{r_α}|^{-2}; r_β = 0 gives T_β = |k₀|^{-2}.
inline TimeSchedule build_schedule(const BPParams& p, const WaveSystem& ws) {
    const std::int64_t beta = p.Q * p.Q * p.Q;
    if (p.r % beta != 0) throw PreconditionError("build_schedule: r must be a multiple of Q^3");
    require(std::int64_t(ws.r()) == p.r, "build_schedule: wave system does not match r");
    TimeSchedule sch;
    sch.beta = beta;
    sch.T0 = std::exp2(-2.0 * ws.log2_m[p.r]);
    const std::int64_t step = p.r / beta;
    for (std::int64_t a = 1; a <= beta; ++a) {
        const std::int64_t ra = p.r - a * step;
        const double lg = -2.0 * ws.log2_m[std::size_t(ra)];
        sch.alphas.push_back({a, ra, std::exp2(lg), lg});
    }
    return sch;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const BPParams& p) {
    return {{"delta", p.delta}, {"Q", p.Q}, {"r", p.r}, {"k0_mag", p.k0_mag}, {"eta", {p.eta[0], p.eta[1], p.eta[2]}},
            {"v", {p.v[0], p.v[1], p.v[2]}}, {"law", to_string(p.law)}, {"T", p.T}};
}

inline BPParams params_from_json(const nlohmann::json& j) {
    BPParams p;
    p.delta = j.value("delta", 0.0);
    p.Q = j.value("Q", std::int64_t{1});
    p.r = j.value("r", std::int64_t{1});
    p.k0_mag = j.value("k0_mag", std::int64_t{4});
    if (j.contains("eta")) p.eta = {j["eta"][0].get<std::int64_t>(), j["eta"][1].get<std::int64_t>(), j["eta"][2].get<std::int64_t>()};
    if (j.contains("v")) p.v = {j["v"][0].get<double>(), j["v"][1].get<double>(), j["v"][2].get<double>()};
    p.law = cascade_law_from_string(j.value("law", std::string("tempered")));
    p.T = j.value("T", 0.0);
    validate_params(p);
    return p;
}

inline nlohmann::json to_json(const WaveSystem& ws) {
    nlohmann::json m = nlohmann::json::array(), lg = nlohmann::json::array(), pairs = nlohmann::json::array();
    for (const auto& x : ws.m) m.push_back(x.str());
    for (double x : ws.log2_m) lg.push_back(x);
    for (const auto& p : ws.pairs)
        pairs.push_back({{"k", {p.k[0], p.k[1], p.k[2]}}, {"kp", {p.kp[0], p.kp[1], p.kp[2]}}, {"v", {p.v[0], p.v[1], p.v[2]}},
                         {"vp", {p.vp[0], p.vp[1], p.vp[2]}}});
    return {{"law", to_string(ws.law)}, {"eta", {ws.eta[0], ws.eta[1], ws.eta[2]}}, {"v", {ws.v[0], ws.v[1], ws.v[2]}},
            {"magnitudes", m}, {"log2_magnitudes", lg}, {"pairs", pairs}};
}

inline nlohmann::json to_json(const ValidationReport& r) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& c : r.checks)
        a.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}, {"applicable", c.applicable}});
    return {{"checks", a}, {"all_pass", r.all_pass()}};
}

inline nlohmann::json to_json(const TimeSchedule& s) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : s.alphas) a.push_back({{"alpha", e.alpha}, {"r_alpha", e.r_alpha}, {"T_alpha", e.T_alpha}, {"log2_T_alpha", e.log2_T_alpha}});
    return {{"beta", s.beta}, {"T0", s.T0}, {"alphas", a}};
}

}  // namespace mhdinf

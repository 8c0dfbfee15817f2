#pragma once

// Caloric-extension norms of mode fields:
//   Besov B⁻¹,∞∞ (homogeneous: sup over t > 0, inhomogeneous: 0 < t ≤ 1) of
//   sup √t ‖e^{tΔ}f‖_∞, the X_T norm of a trajectory (sup part plus a
//   Carleson ball-average part) and BMO⁻¹.
//
// Suprema over continuous parameters are taken over explicit candidate sets
// and then polished by Brent's method: t on a log grid anchored at t = 1, x
// on a lattice plus coordinate search, ball centres on a tensor grid and R on
// a log grid.  Ball integrals of |u|² are evaluated in closed form from the
// product-to-sum expansion and ∫_{|z|<ρ} cos(q·z) dz = 4π(sin qρ − qρ cos qρ)/q³.
// Balls live on the torus, so radii are clamped at π.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <nlohmann/json.hpp>

#include "expoly.hpp"
#include "grid_field.hpp"
#include "mode_field.hpp"

namespace mhdinf {

struct FrozenMode {
    IVec3 k{};
    Parity parity = Parity::cos;
    Vec3 a;
};
using FrozenField = std::vector<FrozenMode>;

/// Coefficients evaluated at time t; vanishing modes are dropped.
inline FrozenField freeze(const ModeField& f, double t) {
    FrozenField out;
    out.reserve(f.size());
    for (const auto& [key, c] : f.modes()) {
        const Vec3 a = c(t);
        if (a == Vec3{}) continue;
        out.push_back({key.k, key.parity, a});
    }
    return out;
}

inline Vec3 eval(const FrozenField& f, const Vec3& x) {
    Vec3 acc;
    for (const auto& m : f) acc += m.a * trig(m.parity, dot(m.k, x));
    return acc;
}

// ---------------------------------------------------------------------------
// L∞ over x

struct LinfOptions {
    int lattice = 64;                  ///< points per non-trivial axis, at least
    int max_lattice = 512;             ///< per-axis cap when a mode needs finer sampling
    std::size_t max_points = 1u << 22; ///< cap on the lattice size
    int starts = 8;                    ///< lattice maxima used as starting points
    int max_sweeps = 20;
    bool refine = true;
};

struct LinfResult {
    double value = 0.0;
    Vec3 x;
};

namespace detail {

inline std::int64_t iabs(std::int64_t v) { return v < 0 ? -v : v; }

inline std::int64_t pos_mod(std::int64_t a, std::int64_t n) {
    const std::int64_t r = a % n;
    return r < 0 ? r + n : r;
}

}  // namespace detail

/// sup_x |f(x)| by lattice evaluation followed by coordinate-wise Brent search.
inline LinfResult linf_norm(const FrozenField& f, const LinfOptions& opt = {}) {
    LinfResult best;
    if (f.empty()) return best;

    std::array<std::int64_t, 3> kmax{0, 0, 0};
    for (const auto& m : f)
        for (int i = 0; i < 3; ++i) kmax[i] = std::max(kmax[i], detail::iabs(m.k[i]));
    std::array<int, 3> n{1, 1, 1};
    for (int i = 0; i < 3; ++i) {
        if (kmax[i] == 0) continue;
        n[i] = opt.lattice;
        while (n[i] < opt.max_lattice && std::int64_t(n[i]) < 4 * kmax[i]) n[i] *= 2;
    }
    while (std::size_t(n[0]) * n[1] * n[2] > opt.max_points) {
        int* big = &*std::max_element(n.begin(), n.end());
        *big /= 2;
    }
    const GridShape shape{n[0], n[1], n[2]};
    const std::size_t np = shape.physical_size();
    std::array<bool, 3> resolved{};
    bool fft = true;
    for (int i = 0; i < 3; ++i) {
        resolved[i] = 2 * kmax[i] < n[i];
        fft = fft && resolved[i];
    }

    // |f|² on the lattice x = 2π (i/n0, j/n1, l/n2)
    std::vector<double> mag2(np, 0.0);
    if (fft) {
        GridField g(shape);
        for (const auto& m : f) {
            const cplx wp = m.parity == Parity::cos ? cplx(0.5, 0.0) : cplx(0.0, -0.5);
            auto put = [&](const IVec3& q, cplx w) {
                if (q[2] < 0) return;
                const std::size_t idx = shape.spec_index(int(detail::pos_mod(q[0], n[0])), int(detail::pos_mod(q[1], n[1])), int(q[2]));
                for (int c = 0; c < 3; ++c) g.component(c)[idx] += w * m.a[c];
            };
            put(m.k, wp);
            put(-m.k, std::conj(wp));
        }
        const PhysicalField p = g.to_physical();
        for (std::size_t q = 0; q < np; ++q) mag2[q] = p[0][q] * p[0][q] + p[1][q] * p[1][q] + p[2][q] * p[2][q];
    } else {
        // Exact lattice phases: 2π Σ_i ((k_i mod n_i)·j_i mod n_i)/n_i.
        std::vector<Vec3> acc(np);
        for (const auto& m : f) {
            std::array<std::int64_t, 3> kr;
            for (int i = 0; i < 3; ++i) kr[i] = detail::pos_mod(m.k[i], n[i]);
            for (int i = 0; i < n[0]; ++i)
                for (int j = 0; j < n[1]; ++j)
                    for (int l = 0; l < n[2]; ++l) {
                        const double phase = 2.0 * pi *
                                             (double((kr[0] * i) % n[0]) / n[0] + double((kr[1] * j) % n[1]) / n[1] +
                                              double((kr[2] * l) % n[2]) / n[2]);
                        acc[shape.phys_index(i, j, l)] += m.a * trig(m.parity, phase);
                    }
        }
        for (std::size_t q = 0; q < np; ++q) mag2[q] = dot(acc[q], acc[q]);
    }

    // top-k lattice values, ties broken by index
    const std::size_t k = std::min<std::size_t>(std::max(1, opt.starts), np);
    std::vector<std::size_t> order;
    order.reserve(k + 1);
    for (std::size_t q = 0; q < np; ++q) {
        if (order.size() == k && mag2[q] <= mag2[order.back()]) continue;
        auto pos = std::find_if(order.begin(), order.end(), [&](std::size_t o) { return mag2[q] > mag2[o]; });
        order.insert(pos, q);
        if (order.size() > k) order.pop_back();
    }

    auto point_of = [&](std::size_t q) {
        const int l = int(q % n[2]);
        const int j = int((q / n[2]) % n[1]);
        const int i = int(q / (std::size_t(n[1]) * n[2]));
        return Vec3{2.0 * pi * i / n[0], 2.0 * pi * j / n[1], 2.0 * pi * l / n[2]};
    };

    best.value = std::sqrt(mag2[order[0]]);
    best.x = point_of(order[0]);
    if (!opt.refine) return best;

    for (std::size_t s = 0; s < k; ++s) {
        Vec3 x = point_of(order[s]);
        double v2 = mag2[order[s]];
        for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
            const double before = v2;
            for (int i = 0; i < 3; ++i) {
                if (kmax[i] == 0 || !resolved[i]) continue;
                const double h = 2.0 * pi / n[i];
                auto neg = [&](double d) {
                    Vec3 y = x;
                    y[i] += d;
                    const Vec3 v = eval(f, y);
                    return -dot(v, v);
                };
                const auto [d, val] = boost::math::tools::brent_find_minima(neg, -h, h, 40);
                if (-val > v2) {
                    v2 = -val;
                    x[i] += d;
                }
            }
            if (v2 <= before * (1.0 + 1e-13)) break;
        }
        if (std::sqrt(v2) > best.value) {
            best.value = std::sqrt(v2);
            best.x = x;
        }
    }
    return best;
}

inline LinfResult linf_norm(const ModeField& f, double t, const LinfOptions& opt = {}) {
    return linf_norm(freeze(f, t), opt);
}

// ---------------------------------------------------------------------------
// sup over t of √t ‖u(t)‖_∞

/// Log-spaced nodes t = 10^{j/ppd}, anchored so that t = 1 is a node.
struct TGridSpec {
    double t_min = 0.0;  ///< 0: chosen from the largest wave number
    double t_max = 0.0;  ///< 0: chosen from the smallest wave number (homogeneous) or 1
    int points_per_decade = 24;
    int min_points = 200;
};

inline std::vector<double> log_nodes(double lo, double hi, int ppd) {
    const double a = std::log10(lo), b = std::log10(hi);
    const long j0 = long(std::ceil(a * ppd - 1e-9)), j1 = long(std::floor(b * ppd + 1e-9));
    std::vector<double> out;
    if (j0 > j1) return {lo, hi};
    if (std::pow(10.0, double(j0) / ppd) > lo * (1 + 1e-12)) out.push_back(lo);
    for (long j = j0; j <= j1; ++j) out.push_back(std::pow(10.0, double(j) / ppd));
    if (out.back() < hi * (1 - 1e-12)) out.push_back(hi);
    return out;
}

/// Density raised until [lo, hi] holds at least `min_points` nodes.
inline int density_for(double lo, double hi, const TGridSpec& g) {
    const double decades = std::max(std::log10(hi / lo), 1e-3);
    return std::max(g.points_per_decade, int(std::ceil(g.min_points / decades)));
}

struct SupResult {
    double value = 0.0;
    double t = 0.0;
    Vec3 x;
};

namespace detail {

/// Brent refinement of g(ln t) on the bracket around node j, clipped to [lo, hi].
template <class G>
SupResult refine_in_log_t(G&& g, const std::vector<double>& nodes, std::size_t j, double lo, double hi, SupResult start) {
    const double a = std::log(std::max(lo, nodes[j > 0 ? j - 1 : 0]));
    const double b = std::log(std::min(hi, nodes[std::min(j + 1, nodes.size() - 1)]));
    if (!(b > a)) return start;
    SupResult best = start;
    auto neg = [&](double s) {
        const SupResult r = g(std::exp(s));
        if (r.value > best.value) best = r;
        return -r.value;
    };
    boost::math::tools::brent_find_minima(neg, a, b, 30);
    return best;
}

inline double max_k2(const ModeField& f) {
    double m = 0.0;
    for (const auto& [key, c] : f.modes()) m = std::max(m, norm2(key.k));
    return m;
}

inline double min_k2(const ModeField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [key, c] : f.modes()) m = std::min(m, norm2(key.k));
    return m;
}

}  // namespace detail

/// sup over t ∈ [lo, hi] of √t ‖traj(t)‖_∞ on the given node set, refined.
inline SupResult sup_sqrt_t_linf(const ModeField& traj, double lo, double hi, int ppd, const LinfOptions& lopt,
                                 bool refine = true) {
    SupResult best;
    if (traj.empty() || !(hi > 0.0) || hi < lo) return best;
    lo = std::max(lo, hi * 1e-300);
    auto g = [&](double t) {
        const LinfResult r = linf_norm(freeze(traj, t), lopt);
        return SupResult{std::sqrt(t) * r.value, t, r.x};
    };
    LinfOptions scan_opt = lopt;
    scan_opt.starts = 1;
    scan_opt.lattice = std::min(scan_opt.lattice, 16);
    const std::vector<double> nodes = log_nodes(lo, hi, ppd);
    std::size_t jbest = 0;
    double vbest = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double v = std::sqrt(nodes[j]) * linf_norm(freeze(traj, nodes[j]), scan_opt).value;
        if (v > vbest) {
            vbest = v;
            jbest = j;
        }
    }
    if (vbest == 0.0) return best;
    best = g(nodes[jbest]);
    if (refine && best.value > 0.0) best = detail::refine_in_log_t(g, nodes, jbest, lo, hi, best);
    return best;
}

// ---------------------------------------------------------------------------
// Besov B⁻¹,∞∞

enum class BesovVariant { homogeneous, inhomogeneous };

inline const char* to_string(BesovVariant v) { return v == BesovVariant::homogeneous ? "homogeneous" : "inhomogeneous"; }

struct BesovOptions {
    TGridSpec t;
    LinfOptions linf;
    double at = 0.0;  ///< the data is f frozen at this time
    bool refine = true;
};

struct BesovResult {
    double value = 0.0;
    double t = 0.0;
    Vec3 x;
    double t_min = 0.0, t_max = 0.0;
    int points_per_decade = 0;
};

struct BesovPair {
    BesovResult homogeneous;
    BesovResult inhomogeneous;
};

/// Both variants on one shared node set; the inhomogeneous candidate also
/// competes for the homogeneous value, so inhomogeneous ≤ homogeneous exactly.
inline BesovPair besov_pair(const ModeField& f, const BesovOptions& opt = {}, bool need_homogeneous = true) {
    BesovPair out;
    const ModeField data = f.at_time(opt.at);
    if (data.empty()) return out;
    const ModeField heat = heat_propagate(data);
    const double k2max = detail::max_k2(data), k2min = detail::min_k2(data);
    const double t_min = opt.t.t_min > 0.0 ? opt.t.t_min : std::min(1e-2 / k2max, 1e-2);
    const double t_max = opt.t.t_max > 0.0 ? opt.t.t_max : std::max(10.0 / k2min, 1.0);
    require(t_min < t_max, "besov: empty t range");
    if (need_homogeneous) {
        // √t Σ|a_k| e^{-|k|²t} must be decreasing at t_max.
        double slope = 0.0;
        for (const auto& m : freeze(data, 0.0))
            slope += norm(m.a) * guarded_exp_neg(norm2(m.k) * t_max) * (0.5 / t_max - norm2(m.k));
        if (slope > 0.0 || std::isnan(slope)) throw PreconditionError("besov: t_max too small for the homogeneous norm");
    }
    const double t_one = std::min(1.0, t_max);
    const int ppd = density_for(t_min, t_one, opt.t);
    const std::vector<double> all = log_nodes(t_min, t_max, ppd);

    // The scan uses a coarse lattice and one refinement start per node; the polish uses the full options.
    LinfOptions scan_opt = opt.linf;
    scan_opt.starts = 1;
    scan_opt.lattice = std::min(scan_opt.lattice, 16);
    auto scan = [&](double t) {
        const LinfResult r = linf_norm(freeze(heat, t), scan_opt);
        return SupResult{std::sqrt(t) * r.value, t, r.x};
    };
    auto g = [&](double t) {
        const LinfResult r = linf_norm(freeze(heat, t), opt.linf);
        return SupResult{std::sqrt(t) * r.value, t, r.x};
    };
    std::vector<SupResult> vals;
    std::size_t j_in = 0, j_all = 0;
    for (std::size_t j = 0; j < all.size(); ++j) {
        if (all[j] > t_one && !need_homogeneous) break;
        vals.push_back(scan(all[j]));
        if (all[j] <= t_one && vals[j].value > vals[j_in].value) j_in = j;
        if (vals[j].value > vals[j_all].value) j_all = j;
    }
    SupResult in = g(all[j_in]);
    if (opt.refine && in.value > 0.0) in = detail::refine_in_log_t(g, all, j_in, t_min, t_one, in);
    out.inhomogeneous = {in.value, in.t, in.x, t_min, t_one, ppd};
    if (need_homogeneous) {
        SupResult h = j_all == j_in ? in : g(all[j_all]);
        if (opt.refine && h.value > 0.0 && j_all != j_in) h = detail::refine_in_log_t(g, all, j_all, t_min, t_max, h);
        if (in.value > h.value) h = in;
        out.homogeneous = {h.value, h.t, h.x, t_min, t_max, ppd};
    }
    return out;
}

inline BesovResult besov_minus1_inf(const ModeField& f, BesovVariant v, const BesovOptions& opt = {}) {
    const bool homog = v == BesovVariant::homogeneous;
    const BesovPair p = besov_pair(f, opt, homog);
    return homog ? p.homogeneous : p.inhomogeneous;
}

// ---------------------------------------------------------------------------
// Ball averages of |u|²

/// ∫_{|z|<ρ} cos(q·z) dz for |q| = q.
inline double ball_cos_integral(double q, double rho) {
    const double x = q * rho;
    const double vol = 4.0 * pi * rho * rho * rho / 3.0;
    if (x < 0.05) {
        const double x2 = x * x;
        return vol * (1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0);
    }
    return 4.0 * pi * (std::sin(x) - x * std::cos(x)) / (q * q * q);
}

struct TimeWindow {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

struct CarlesonOptions {
    int centers = 16;               ///< per axis that the field depends on
    double r_min = 0.0;             ///< 0: 1e-2 / max|k|²
    int r_points_per_decade = 6;
    double tol = 1e-3;              ///< relative change allowed when the R grid is doubled
    int max_doublings = 4;
    bool refine = true;
    double radius_cap = pi;
};

struct CarlesonResult {
    double value = 0.0;
    Vec3 x0;
    double R = 0.0;
    int r_points_per_decade = 0;
    double last_change = 0.0;
    bool converged = true;
};

namespace detail {

/// |u|² = Σ_q E_q(t) f_p(q·x) collected by canonical (q, parity); q = 0 is the mean.
struct SquareExpansion {
    std::vector<ModeKey> keys;
    std::vector<ExpPoly> coeff;
    ExpPoly mean;
};

inline SquareExpansion square_expansion(const ModeField& u) {
    std::vector<std::pair<ModeKey, const VecExpPoly*>> modes;
    for (const auto& [key, c] : u.modes()) modes.emplace_back(key, &c);
    std::map<ModeKey, ExpPoly> acc;
    SquareExpansion out;
    for (std::size_t a = 0; a < modes.size(); ++a)
        for (std::size_t b = a; b < modes.size(); ++b) {
            ExpPoly d = dot(*modes[a].second, *modes[b].second);
            if (d.empty()) continue;
            const double w = a == b ? 0.5 : 1.0;  // ½ from product-to-sum, doubled off the diagonal
            for (const auto& term : trig_product(modes[a].first.k, modes[a].first.parity, modes[b].first.k, modes[b].first.parity)) {
                if (is_zero(term.k)) {
                    if (term.parity == Parity::cos)
                        for (const auto& t : d.terms()) out.mean.push_raw(t.c * w * term.sign, t.m, t.lambda);
                    continue;
                }
                auto [key, s] = canonical_key(term.k, term.parity);
                auto& slot = acc[key];
                for (const auto& t : d.terms()) slot.push_raw(t.c * w * term.sign * s, t.m, t.lambda);
            }
        }
    out.mean.canonicalize(0.0);
    for (auto& [key, e] : acc) {
        e.canonicalize(0.0);
        if (e.empty()) continue;
        out.keys.push_back(key);
        out.coeff.push_back(std::move(e));
    }
    return out;
}

inline std::vector<Vec3> center_grid(const std::vector<ModeKey>& keys, int n) {
    std::array<bool, 3> active{false, false, false};
    for (const auto& k : keys)
        for (int i = 0; i < 3; ++i) active[i] = active[i] || k.k[i] != 0;
    std::array<int, 3> m;
    for (int i = 0; i < 3; ++i) m[i] = active[i] ? n : 1;
    std::vector<Vec3> out;
    out.reserve(std::size_t(m[0]) * m[1] * m[2]);
    for (int i = 0; i < m[0]; ++i)
        for (int j = 0; j < m[1]; ++j)
            for (int l = 0; l < m[2]; ++l) out.push_back({2 * pi * i / m[0], 2 * pi * j / m[1], 2 * pi * l / m[2]});
    return out;
}

/// Evaluates max over centres of the ball-averaged ∫|u|² for given R.
class CarlesonEvaluator {
public:
    CarlesonEvaluator(const ModeField& u, TimeWindow w, const CarlesonOptions& opt)
        : sq_(square_expansion(u)), window_(w), cap_(opt.radius_cap) {
        centers_ = center_grid(sq_.keys, opt.centers);
        qnorm_.reserve(sq_.keys.size());
        for (const auto& k : sq_.keys) qnorm_.push_back(std::sqrt(norm2(k.k)));
        phase_.resize(centers_.size() * sq_.keys.size());
        for (std::size_t c = 0; c < centers_.size(); ++c)
            for (std::size_t q = 0; q < sq_.keys.size(); ++q)
                phase_[c * sq_.keys.size() + q] = trig(sq_.keys[q].parity, dot(sq_.keys[q].k, centers_[c]));
    }

    bool empty() const { return sq_.keys.empty() && sq_.mean.empty(); }
    const std::vector<Vec3>& centers() const { return centers_; }

    /// (value², best centre index) of the ball average for a given R.
    std::pair<double, std::size_t> best_over_centers(double R) const {
        const std::vector<double> w = weights(R);
        const double base = w.back();
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        const std::size_t nq = sq_.keys.size();
        for (std::size_t c = 0; c < centers_.size(); ++c) {
            double s = base;
            const double* ph = &phase_[c * nq];
            for (std::size_t q = 0; q < nq; ++q) s += w[q] * ph[q];
            if (s > best) {
                best = s;
                arg = c;
            }
        }
        return {best, arg};
    }

    double at(const Vec3& x0, double R) const {
        const std::vector<double> w = weights(R);
        double s = w.back();
        for (std::size_t q = 0; q < sq_.keys.size(); ++q) s += w[q] * trig(sq_.keys[q].parity, dot(sq_.keys[q].k, x0));
        return s;
    }

private:
    /// Per-q weights ∫E_q dt · S(|q|, ρ)/|B|, with the mean part appended last.
    std::vector<double> weights(double R) const {
        const double rho = std::min(std::sqrt(R), cap_);
        const double vol = 4.0 * pi * rho * rho * rho / 3.0;
        const double lo = std::max(0.0, window_.lo), hi = std::min(R, window_.hi);
        std::vector<double> w(sq_.keys.size() + 1, 0.0);
        if (!(hi > lo)) return w;
        for (std::size_t q = 0; q < sq_.keys.size(); ++q)
            w[q] = integrate(sq_.coeff[q], lo, hi) * ball_cos_integral(qnorm_[q], rho) / vol;
        w.back() = integrate(sq_.mean, lo, hi);
        return w;
    }

    SquareExpansion sq_;
    TimeWindow window_;
    double cap_;
    std::vector<Vec3> centers_;
    std::vector<double> qnorm_;
    std::vector<double> phase_;
};

}  // namespace detail

/// max over (x₀, R ≤ R_max) of (|B|⁻¹ ∫_{[0,R]∩window} ∫_B |u|²)^{1/2}.
inline CarlesonResult carleson_part(const ModeField& u, double R_max, TimeWindow window = {}, const CarlesonOptions& opt = {}) {
    require(opt.centers > 0 && opt.r_points_per_decade > 0, "carleson_part: empty candidate set");
    require(R_max > 0.0, "carleson_part: R_max must be positive");
    CarlesonResult out;
    if (u.empty()) return out;
    const detail::CarlesonEvaluator ev(u, window, opt);
    const double k2 = detail::max_k2(u);
    const double r_min = opt.r_min > 0.0 ? std::min(opt.r_min, R_max) : std::min(R_max, 1e-2 / k2);

    auto run = [&](int ppd) {
        CarlesonResult r;
        r.r_points_per_decade = ppd;
        const std::vector<double> Rs = log_nodes(r_min, R_max, ppd);
        double best = -1.0;
        std::size_t jbest = 0, cbest = 0;
        for (std::size_t j = 0; j < Rs.size(); ++j) {
            const auto [v, c] = ev.best_over_centers(Rs[j]);
            if (v > best) {
                best = v;
                jbest = j;
                cbest = c;
            }
        }
        r.R = Rs[jbest];
        r.x0 = ev.centers()[cbest];
        if (opt.refine && Rs.size() > 1) {
            const double a = std::log(Rs[jbest > 0 ? jbest - 1 : 0]);
            const double b = std::log(Rs[std::min(jbest + 1, Rs.size() - 1)]);
            auto neg = [&](double s) { return -ev.at(r.x0, std::exp(s)); };
            const auto [s, v] = boost::math::tools::brent_find_minima(neg, a, b, 30);
            if (-v > best) {
                best = -v;
                r.R = std::exp(s);
            }
        }
        r.value = std::sqrt(std::max(0.0, best));
        return r;
    };

    int ppd = opt.r_points_per_decade;
    out = run(ppd);
    out.converged = false;
    for (int d = 0; d < opt.max_doublings; ++d) {
        ppd *= 2;
        CarlesonResult next = run(ppd);
        const double change = std::abs(next.value - out.value) / std::max(next.value, 1e-300);
        next.last_change = change;
        out = next;
        if (change < opt.tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// X_T and BMO⁻¹

struct XTOptions {
    TGridSpec t;
    LinfOptions linf;
    CarlesonOptions carleson;
    bool refine = true;
};

struct XTResult {
    double sup_part = 0.0;
    double t_sup = 0.0;
    CarlesonResult carleson;
    double total() const { return sup_part + carleson.value; }
};

/// X_T norm of a mode trajectory, optionally restricted to a time window.
inline XTResult xT_norm(const ModeField& traj, double T, const XTOptions& opt = {}, TimeWindow window = {}) {
    require(T > 0.0, "xT_norm: horizon must be positive");
    XTResult out;
    if (traj.empty()) return out;
    const double hi = std::min(T, window.hi);
    const double k2 = detail::max_k2(traj);
    double lo = opt.t.t_min > 0.0 ? opt.t.t_min : std::min(hi, 1e-2 / k2);
    lo = std::max(lo, window.lo);
    if (hi > 0.0 && hi >= lo) {
        const int ppd = density_for(lo, std::max(hi, lo * 10.0), opt.t);
        const SupResult s = sup_sqrt_t_linf(traj, lo, hi, ppd, opt.linf, opt.refine);
        out.sup_part = s.value;
        out.t_sup = s.t;
    }
    out.carleson = carleson_part(traj, T, window, opt.carleson);
    if (!out.carleson.converged) throw ConvergenceError("xT_norm: Carleson sup did not settle under R-grid doubling");
    return out;
}

struct BmoOptions {
    CarlesonOptions carleson;
    double R_max = 1.0;
    double at = 0.0;
};

inline CarlesonResult bmo_inv(const ModeField& f, const BmoOptions& opt = {}) {
    const CarlesonResult r = carleson_part(heat_propagate(f.at_time(opt.at)), opt.R_max, {}, opt.carleson);
    if (!r.converged) throw ConvergenceError("bmo_inv: quadrature did not converge, last relative change " + std::to_string(r.last_change));
    return r;
}

// ---------------------------------------------------------------------------
// Sampled trajectories (e.g. grid snapshots)

struct SampledTrajectory {
    std::vector<double> t;
    std::vector<ModeField> snapshots;  ///< constant-coefficient fields
};

/// sup over samples in the window of √t ‖u(t)‖_∞.
inline SupResult sampled_sup_part(const SampledTrajectory& tr, TimeWindow window = {}, const LinfOptions& lopt = {}) {
    SupResult best;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        if (tr.t[i] < window.lo || tr.t[i] > window.hi || tr.t[i] <= 0.0) continue;
        const LinfResult r = linf_norm(tr.snapshots[i], 0.0, lopt);
        const double v = std::sqrt(tr.t[i]) * r.value;
        if (v > best.value) best = {v, tr.t[i], r.x};
    }
    return best;
}

struct SampledXTOptions {
    LinfOptions linf;
    int centers = 8;            ///< per active axis
    std::size_t max_modes = 24; ///< largest modes kept per snapshot for the ball averages
    double radius_cap = pi;
};

struct SampledXTResult {
    SupResult sup;
    double carleson = 0.0;
    double R = 0.0;
    Vec3 x0;
    double total() const { return sup.value + carleson; }
};

/// X-type norm of a sampled trajectory: sup part over the samples and a
/// Carleson part with trapezoidal time integrals, R running over sample times.
inline SampledXTResult sampled_xT_norm(const SampledTrajectory& tr, double T, TimeWindow window = {}, const SampledXTOptions& opt = {}) {
    require(tr.t.size() == tr.snapshots.size(), "sampled_xT_norm: ragged trajectory");
    require(std::is_sorted(tr.t.begin(), tr.t.end()), "sampled_xT_norm: sample times must be increasing");
    SampledXTResult out;
    TimeWindow w = window;
    w.hi = std::min(w.hi, T);
    out.sup = sampled_sup_part(tr, w, opt.linf);

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        if (tr.t[i] >= w.lo && tr.t[i] <= w.hi) idx.push_back(i);
    if (idx.size() < 2) return out;

    std::map<ModeKey, std::size_t> slot;
    std::vector<ModeKey> keys;
    std::vector<std::vector<double>> E(idx.size());
    std::vector<double> mean(idx.size(), 0.0);
    for (std::size_t s = 0; s < idx.size(); ++s) {
        const ModeField& f = tr.snapshots[idx[s]];
        std::vector<std::pair<double, ModeKey>> by_size;
        for (const auto& [key, c] : f.modes()) by_size.emplace_back(norm(c(0.0)), key);
        std::sort(by_size.begin(), by_size.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        if (by_size.size() > opt.max_modes) by_size.resize(opt.max_modes);
        ModeField kept;
        for (const auto& [m, key] : by_size) kept.add(key.k, key.parity, f.modes().at(key));
        const detail::SquareExpansion sq = detail::square_expansion(kept);
        mean[s] = sq.mean(0.0);
        for (std::size_t q = 0; q < sq.keys.size(); ++q) {
            auto [it, fresh] = slot.emplace(sq.keys[q], keys.size());
            if (fresh) keys.push_back(sq.keys[q]);
            if (E[s].size() <= it->second) E[s].resize(it->second + 1, 0.0);
            E[s][it->second] += sq.coeff[q](0.0);
        }
    }
    for (auto& e : E) e.resize(keys.size(), 0.0);
    const std::vector<Vec3> centers = detail::center_grid(keys, opt.centers);
    std::vector<double> qn(keys.size());
    for (std::size_t q = 0; q < keys.size(); ++q) qn[q] = std::sqrt(norm2(keys[q].k));

    double best = 0.0;
    std::vector<double> acc(keys.size());
    for (std::size_t j = 1; j < idx.size(); ++j) {
        const double R = tr.t[idx[j]];
        if (!(R > 0.0)) continue;
        std::fill(acc.begin(), acc.end(), 0.0);
        double base = 0.0;
        for (std::size_t s = 0; s < j; ++s) {
            const double h = 0.5 * (tr.t[idx[s + 1]] - tr.t[idx[s]]);
            for (std::size_t q = 0; q < keys.size(); ++q) acc[q] += h * (E[s][q] + E[s + 1][q]);
            base += h * (mean[s] + mean[s + 1]);
        }
        const double rho = std::min(std::sqrt(R), opt.radius_cap);
        const double vol = 4.0 * pi * rho * rho * rho / 3.0;
        for (std::size_t q = 0; q < keys.size(); ++q) acc[q] *= ball_cos_integral(qn[q], rho) / vol;
        for (const Vec3& x0 : centers) {
            double v = base;
            for (std::size_t q = 0; q < keys.size(); ++q) v += acc[q] * trig(keys[q].parity, dot(keys[q].k, x0));
            if (v > best) {
                best = v;
                out.R = R;
                out.x0 = x0;
            }
        }
    }
    out.carleson = std::sqrt(best);
    return out;
}

// ---------------------------------------------------------------------------
// Report

struct NormReport {
    BesovResult besov_homog;
    BesovResult besov_inhomog;
    XTResult xT;
    double xT_horizon = 0.0;
    CarlesonResult bmo;
};

/// All norms of one datum f; X_T is taken of its heat flow on (0, horizon].
inline NormReport norm_report(const ModeField& f, double horizon) {
    NormReport r;
    r.xT_horizon = horizon;
    if (f.empty()) return r;
    const ModeField data = f.at_time(0.0);
    const BesovPair b = besov_pair(data);
    r.besov_homog = b.homogeneous;
    r.besov_inhomog = b.inhomogeneous;
    r.xT = xT_norm(heat_propagate(data), horizon);
    r.bmo = bmo_inv(data);
    return r;
}

inline nlohmann::json to_json(const BesovResult& b) {
    return {{"value", b.value}, {"t", b.t}, {"x", {b.x[0], b.x[1], b.x[2]}}, {"t_min", b.t_min}, {"t_max", b.t_max},
            {"points_per_decade", b.points_per_decade}};
}

inline nlohmann::json to_json(const CarlesonResult& c) {
    return {{"value", c.value}, {"x0", {c.x0[0], c.x0[1], c.x0[2]}}, {"R", c.R}, {"r_points_per_decade", c.r_points_per_decade},
            {"last_change", c.last_change}, {"converged", c.converged}};
}

inline nlohmann::json to_json(const NormReport& r) {
    return {{"besov_homog", to_json(r.besov_homog)},
            {"besov_inhomog", to_json(r.besov_inhomog)},
            {"xT", {{"T", r.xT_horizon}, {"sup_part", r.xT.sup_part}, {"t_sup", r.xT.t_sup}, {"carleson_part", to_json(r.xT.carleson)}, {"total", r.xT.total()}}},
            {"bmo_inv", to_json(r.bmo)},
            {"ball_convention", "torus; ball radius sqrt(R) clamped at pi"}};
}

}  // namespace mhdinf

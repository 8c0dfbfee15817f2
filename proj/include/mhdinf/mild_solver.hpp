#pragma once

// Mild formulation: the bilinear Duhamel operator
//   B(u, v)(t) = ∫₀ᵗ e^{(t−τ)Δ} P[(u·∇)v](τ) dτ
// on both engines, Picard iteration for
//   u = e^{tΔ}u₀ − B(u,u) + B(b,b),   b = e^{tΔ}b₀ − B(u,b) + B(b,u),
// the remainder split u = e^{tΔ}u₀ − u₁ + y, b = e^{tΔ}b₀ − b₁ + z with its
// source groups, residual checks, pressure recovery and the cascade audits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "bp_construction.hpp"
#include "grid_field.hpp"
#include "grid_solver.hpp"
#include "mode_field.hpp"
#include "norms.hpp"

namespace mhdinf {

// ---------------------------------------------------------------------------
// Mode engine

/// B(u, v) exactly; the zero-frequency residue of (u·∇)v is dropped by P.
inline ModeField bilinear_B(const ModeField& u, const ModeField& v) {
    ModeField out = duhamel_heat_integral(leray_project(advect(u, v).field));
    out.set_divergence_free(true);
    return out;
}

/// Drops every term whose coefficient is below rel times the field's largest one.
inline ModeField prune_relative(const ModeField& f, double rel) {
    const double cut = rel * f.max_coefficient();
    if (cut == 0.0) return f;
    ModeField out(f.options());
    for (const auto& [key, c] : f.modes()) {
        VecExpPoly kept;
        for (const auto& t : c.terms())
            if (norm(t.c) >= cut) kept.push_raw(t.c, t.m, t.lambda);
        kept.canonicalize(0.0);
        out.emplace_canonical(key, std::move(kept));
    }
    out.set_divergence_free(f.divergence_free());
    return out;
}

inline ModeField time_derivative(const ModeField& f) {
    ModeField out(f.options());
    for (const auto& [key, c] : f.modes()) out.emplace_canonical(key, c.derivative());
    out.set_divergence_free(f.divergence_free());
    return out;
}

inline ModeField laplacian(const ModeField& f) {
    ModeField out(f.options());
    for (const auto& [key, c] : f.modes()) out.emplace_canonical(key, c * -norm2(key.k));
    out.set_divergence_free(f.divergence_free());
    return out;
}

struct FirstIteratePair {
    ModeField u1;
    ModeField b1;
};

/// u₁ = B(h_u,h_u) − B(h_b,h_b),  b₁ = B(h_u,h_b) − B(h_b,h_u), h = heat flow of the data.
inline FirstIteratePair first_iterates(const ModeField& u0, const ModeField& b0) {
    const ModeField hu = heat_propagate(u0), hb = heat_propagate(b0);
    return {bilinear_B(hu, hu) - bilinear_B(hb, hb), bilinear_B(hu, hb) - bilinear_B(hb, hu)};
}

// ---------------------------------------------------------------------------
// Picard iteration

struct PicardOptions {
    double T = 1.0;             ///< horizon of the X_T increments
    int depth = 3;              ///< maximal number of iterations
    double tol = 0.0;           ///< stop once the increment drops below; 0 disables
    double prune = 1e-15;       ///< relative, applied to every iterate
    bool record = true;         ///< compute X_T increments
    int divergence_window = 3;  ///< consecutive ratios ≥ 1 that abort
    XTOptions xt = [] {
        XTOptions o;
        o.linf.lattice = 32;
        return o;
    }();
};

struct PicardStep {
    int n = 0;
    double du = 0.0;  ///< ‖uⁿ − uⁿ⁻¹‖_X
    double db = 0.0;
    double increment() const { return du + db; }
    double ratio = 0.0;  ///< increment / previous increment (0 for n = 1)
};

struct PicardResult {
    ModeField u;
    ModeField b;
    int depth = 0;
    std::vector<PicardStep> record;
    bool converged = false;  ///< tol reached
};

class PicardDiverged : public ConvergenceError {
public:
    PicardDiverged(const std::string& what, std::vector<PicardStep> rec) : ConvergenceError(what), record(std::move(rec)) {}
    std::vector<PicardStep> record;
};

inline PicardResult picard_solve(const ModeField& u0, const ModeField& b0, const PicardOptions& opt = {}) {
    require(opt.T > 0.0 && opt.depth >= 0, "picard_solve: need T > 0 and depth >= 0");
    require(opt.tol == 0.0 || opt.record, "picard_solve: a tolerance needs the increment record");
    const ModeField hu = heat_propagate(u0), hb = heat_propagate(b0);
    PicardResult res{hu, hb, 0, {}, false};
    int streak = 0;
    for (int n = 1; n <= opt.depth; ++n) {
        const ModeField& u = res.u;
        const ModeField& b = res.b;
        ModeField un = prune_relative(hu - bilinear_B(u, u) + bilinear_B(b, b), opt.prune);
        ModeField bn = prune_relative(hb - bilinear_B(u, b) + bilinear_B(b, u), opt.prune);
        un.set_divergence_free(true);
        bn.set_divergence_free(true);
        PicardStep step;
        step.n = n;
        if (opt.record) {
            step.du = xT_norm(un - u, opt.T, opt.xt).total();
            step.db = xT_norm(bn - b, opt.T, opt.xt).total();
            if (!res.record.empty()) {
                const double prev = res.record.back().increment();
                step.ratio = prev > 0.0 ? step.increment() / prev : (step.increment() > 0.0 ? INFINITY : 0.0);
            }
        }
        res.u = std::move(un);
        res.b = std::move(bn);
        res.depth = n;
        res.record.push_back(step);
        if (opt.record && n > 1) {
            streak = step.ratio >= 1.0 ? streak + 1 : 0;
            if (streak >= opt.divergence_window)
                throw PicardDiverged("picard_solve: increments grew for " + std::to_string(streak) + " consecutive iterations", res.record);
        }
        if (opt.tol > 0.0 && step.increment() <= opt.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Grid engine

/// P[(u·∇)v] pseudo-spectrally in divergence form ∂_b(v_a u_b), dealiased.
inline GridField grid_advect(const GridField& u, const GridField& v) {
    const GridShape& s = u.shape();
    require(v.shape() == s, "grid_advect: shape mismatch");
    detail::check_band(u, "u");
    detail::check_band(v, "v");
    const PhysicalField up = u.to_physical();
    const PhysicalField vp = v.to_physical();
    const auto& plans = detail::plans_for(s);
    const std::size_t np = s.physical_size();
    const double inv = 1.0 / double(np);
    avector<double> prod(np);
    std::array<avector<cplx>, 9> T;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            for (std::size_t n = 0; n < np; ++n) prod[n] = vp[a][n] * up[b][n];
            auto& dst = T[3 * a + b];
            dst.assign(s.spectral_size(), cplx{});
            plans.forward(prod.data(), dst.data());
            for (auto& x : dst) x *= inv;
        }
    GridField out(s);
    detail::divergence_of_tensor(plans.table, out, [&](int a, int b, std::size_t n) { return T[3 * a + b][n]; });
    out *= -1.0;
    out.dealias();
    out.leray_project();
    return out;
}

using GridSource = std::function<GridField(double)>;

struct GridBOptions {
    double tol = 1e-9;             ///< relative change under subinterval doubling
    int initial_subintervals = 1;
    int max_subintervals = 1 << 12;
};

struct GridBResult {
    std::vector<double> t;
    std::vector<GridField> B;
    int max_subintervals = 0;
    double worst_change = 0.0;
};

/// B(u, v) at the requested times by composite 6-point Gauss–Legendre
/// quadrature of the integrating-factor form, interval by interval.
inline GridBResult bilinear_B(const GridSource& u, const GridSource& v, const GridShape& s, std::vector<double> times,
                              const GridBOptions& opt = {}) {
    require(std::is_sorted(times.begin(), times.end()) && (times.empty() || times.front() >= 0.0),
            "bilinear_B: times must be sorted and non-negative");
    require(opt.initial_subintervals >= 1, "bilinear_B: need at least one subinterval");
    using GL = boost::math::quadrature::gauss<double, 6>;
    std::vector<double> xs, ws;
    for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
        xs.push_back(GL::abscissa()[i]);
        ws.push_back(GL::weights()[i]);
        if (GL::abscissa()[i] != 0.0) {
            xs.push_back(-GL::abscissa()[i]);
            ws.push_back(GL::weights()[i]);
        }
    }

    auto quad = [&](double a, double b, int n) {
        GridField acc(s);
        const double h = (b - a) / n;
        for (int j = 0; j < n; ++j)
            for (std::size_t q = 0; q < xs.size(); ++q) {
                const double tau = a + h * (j + 0.5 * (xs[q] + 1.0));
                GridField f = grid_advect(u(tau), v(tau));
                f.heat(b - tau);
                acc.axpy(0.5 * h * ws[q], f);
            }
        return acc;
    };

    GridBResult out;
    GridField B(s);
    double now = 0.0;
    for (double t : times) {
        if (t > now) {
            int n = opt.initial_subintervals;
            GridField coarse = quad(now, t, n);
            for (;;) {
                if (2 * n > opt.max_subintervals)
                    throw ConvergenceError("bilinear_B: quadrature did not settle on [" + std::to_string(now) + ", " + std::to_string(t) + "]");
                GridField fine = quad(now, t, 2 * n);
                const double change = (fine - coarse).max_coefficient();
                const double scale = std::max(fine.max_coefficient(), B.max_coefficient());
                n *= 2;
                coarse = std::move(fine);
                if (change <= opt.tol * scale || scale == 0.0) {
                    out.worst_change = std::max(out.worst_change, scale > 0.0 ? change / scale : 0.0);
                    break;
                }
            }
            out.max_subintervals = std::max(out.max_subintervals, n);
            B.heat(t - now);
            B += coarse;
            now = t;
        }
        out.t.push_back(t);
        out.B.push_back(B);
    }
    return out;
}

/// Source callable sampling a mode trajectory onto a grid.
inline GridSource grid_source(const ModeField& f, const GridShape& s) {
    return [f, s](double t) { return sample(f, s, t); };
}

// ---------------------------------------------------------------------------
// Remainder decomposition

struct Decomposition {
    ModeField heat_u, heat_b;
    ModeField u1, b1;
    ModeField y, z;
};

/// y = u − e^{tΔ}u₀ + u₁,  z = b − e^{tΔ}b₀ + b₁ for a mode trajectory.
inline Decomposition decompose(const ModeField& u, const ModeField& b, const ModeField& u0, const ModeField& b0) {
    Decomposition d;
    d.heat_u = heat_propagate(u0);
    d.heat_b = heat_propagate(b0);
    auto [u1, b1] = first_iterates(u0, b0);
    d.u1 = std::move(u1);
    d.b1 = std::move(b1);
    d.y = u - d.heat_u + d.u1;
    d.z = b - d.heat_b + d.b1;
    d.y.set_divergence_free(true);
    d.z.set_divergence_free(true);
    return d;
}

struct GridDecomposition {
    ModeField heat_u, heat_b;
    ModeField u1, b1;
    std::vector<double> t;
    std::vector<GridField> y, z;
};

/// Same split for grid snapshots; u₁, b₁ must be resolvable on the grid.
inline GridDecomposition decompose(const GridTrajectory& tr, const ModeField& u0, const ModeField& b0) {
    require(!tr.t.empty(), "decompose: empty trajectory");
    GridDecomposition d;
    d.heat_u = heat_propagate(u0);
    d.heat_b = heat_propagate(b0);
    auto [u1, b1] = first_iterates(u0, b0);
    d.u1 = std::move(u1);
    d.b1 = std::move(b1);
    const GridShape& s = tr.u.front().shape();
    const ModeField lu = d.heat_u - d.u1, lb = d.heat_b - d.b1;
    d.t = tr.t;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        d.y.push_back(tr.u[i] - sample(lu, s, tr.t[i]));
        d.z.push_back(tr.b[i] - sample(lb, s, tr.t[i]));
    }
    return d;
}

template <class F>
struct SourceGroups {
    F G0, G1, G2;
    F K0, K1, K2;
    F G() const { return G0 + G1 + G2; }
    F K() const { return K0 + K1 + K2; }
};

using SourceTerms = SourceGroups<ModeField>;

namespace detail {

/// Groups of P[(u·∇)u − (b·∇)b] and P[(u·∇)b − (b·∇)u] minus their heat-flow parts.
template <class F, class Adv>
SourceGroups<F> source_groups(const F& hu, const F& hb, const F& u1, const F& b1, const F& y, const F& z, Adv&& A) {
    SourceGroups<F> g;
    g.G0 = (A(u1, u1) - A(hu, u1) - A(u1, hu)) - (A(b1, b1) - A(hb, b1) - A(b1, hb));
    g.G1 = (A(hu, y) + A(y, hu) - A(u1, y) - A(y, u1)) - (A(hb, z) + A(z, hb) - A(b1, z) - A(z, b1));
    g.G2 = A(y, y) - A(z, z);
    g.K0 = (A(u1, b1) - A(hu, b1) - A(u1, hb)) - (A(b1, u1) - A(hb, u1) - A(b1, hu));
    g.K1 = (A(hu, z) - A(u1, z) + A(y, hb) - A(y, b1)) - (A(hb, y) - A(b1, y) + A(z, hu) - A(z, u1));
    g.K2 = A(y, z) - A(z, y);
    return g;
}

}  // namespace detail

inline SourceTerms assemble_sources(const Decomposition& d) {
    auto A = [](const ModeField& a, const ModeField& b) { return leray_project(advect(a, b).field); };
    return detail::source_groups(d.heat_u, d.heat_b, d.u1, d.b1, d.y, d.z, A);
}

/// Source groups at sample i of a grid decomposition.
inline SourceGroups<GridField> assemble_sources(const GridDecomposition& d, std::size_t i) {
    require(i < d.t.size(), "assemble_sources: sample index out of range");
    const GridShape& s = d.y[i].shape();
    const double t = d.t[i];
    return detail::source_groups(sample(d.heat_u, s, t), sample(d.heat_b, s, t), sample(d.u1, s, t), sample(d.b1, s, t), d.y[i],
                                 d.z[i], grid_advect);
}

struct ResidualTerms {
    double dt = 0.0, lap = 0.0, s0 = 0.0, s1 = 0.0, s2 = 0.0;
    double total = 0.0;
    double scale() const { return std::max({dt, lap, s0, s1, s2}); }
    double relative() const { return scale() > 0.0 ? total / scale() : 0.0; }
};

struct ResidualReport {
    ResidualTerms y;  ///< ∂_t y − Δy + G₀ + G₁ + G₂
    ResidualTerms z;  ///< ∂_t z − Δz + K₀ + K₁ + K₂
    std::vector<double> t;
    double total() const { return std::max(y.total, z.total); }
};

/// Mode engine: derivatives in t are exact, sup over x by linf_norm at each sample time.
inline ResidualReport residual_check(const Decomposition& d, const SourceTerms& src, const std::vector<double>& times,
                                     const LinfOptions& lopt = {}) {
    ResidualReport rep;
    rep.t = times;
    const ModeField dy = time_derivative(d.y), ly = laplacian(d.y);
    const ModeField dz = time_derivative(d.z), lz = laplacian(d.z);
    const ModeField ry = dy - ly + src.G(), rz = dz - lz + src.K();
    auto sup = [&](const ModeField& f, double t) { return f.empty() ? 0.0 : linf_norm(f, t, lopt).value; };
    for (double t : times) {
        auto upd = [&](ResidualTerms& r, const ModeField& D, const ModeField& L, const ModeField& a, const ModeField& b,
                       const ModeField& c, const ModeField& R) {
            r.dt = std::max(r.dt, sup(D, t));
            r.lap = std::max(r.lap, sup(L, t));
            r.s0 = std::max(r.s0, sup(a, t));
            r.s1 = std::max(r.s1, sup(b, t));
            r.s2 = std::max(r.s2, sup(c, t));
            r.total = std::max(r.total, sup(R, t));
        };
        upd(rep.y, dy, ly, src.G0, src.G1, src.G2, ry);
        upd(rep.z, dz, lz, src.K0, src.K1, src.K2, rz);
    }
    return rep;
}

/// Grid engine: 5-point centred differences in t on uniformly spaced samples,
/// evaluated at every sample with two neighbours on each side.
inline ResidualReport residual_check(const GridDecomposition& d) {
    const std::size_t n = d.t.size();
    require(n >= 5, "residual_check: need at least five samples");
    const double h = d.t[1] - d.t[0];
    for (std::size_t i = 1; i < n; ++i)
        require(std::abs(d.t[i] - d.t[i - 1] - h) <= 1e-9 * h, "residual_check: samples must be uniformly spaced");
    ResidualReport rep;
    const GridShape& s = d.y.front().shape();
    const auto& k2 = spectral_table(s).k2;
    std::vector<double> neg_k2(k2.size());
    for (std::size_t m = 0; m < k2.size(); ++m) neg_k2[m] = -k2[m];
    auto sup = [](const GridField& f) { return grid_sup_norm(f.to_physical()); };
    for (std::size_t i = 2; i + 2 < n; ++i) {
        rep.t.push_back(d.t[i]);
        const SourceGroups<GridField> g = assemble_sources(d, i);
        auto one = [&](ResidualTerms& r, const std::vector<GridField>& w, const GridField& a, const GridField& b, const GridField& c) {
            GridField D = (w[i + 1] - w[i - 1]) * (8.0 / (12.0 * h)) - (w[i + 2] - w[i - 2]) * (1.0 / (12.0 * h));
            GridField L = w[i];
            L.scale_by(neg_k2);
            const GridField R = D - L + a + b + c;
            r.dt = std::max(r.dt, sup(D));
            r.lap = std::max(r.lap, sup(L));
            r.s0 = std::max(r.s0, sup(a));
            r.s1 = std::max(r.s1, sup(b));
            r.s2 = std::max(r.s2, sup(c));
            r.total = std::max(r.total, sup(R));
        };
        one(rep.y, d.y, g.G0, g.G1, g.G2);
        one(rep.z, d.z, g.K0, g.K1, g.K2);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Pressure

struct ScalarGrid {
    GridShape shape;
    avector<cplx> coef;

    avector<double> to_physical() const {
        avector<cplx> scratch = coef;
        avector<double> out(shape.physical_size());
        detail::plans_for(shape).backward(scratch.data(), out.data());
        return out;
    }

    double eval(const Vec3& x) const {
        const SpectralTable& t = spectral_table(shape);
        double acc = 0.0;
        for (std::size_t n = 0; n < coef.size(); ++n) {
            if (coef[n] == 0.0) continue;
            const auto& k = t.k[n];
            acc += t.weight[n] * (coef[n] * std::polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2])).real();
        }
        return acc;
    }

    /// ∇p as a vector field.
    GridField gradient() const {
        GridField g(shape);
        const auto& k = spectral_table(shape).k;
        for (std::size_t n = 0; n < coef.size(); ++n)
            for (int c = 0; c < 3; ++c) g.component(c)[n] = cplx(0.0, k[n][c]) * coef[n];
        return g;
    }
};

/// p̂ = −k_a k_b P̂_ab / |k|² with P_ab = u_a u_b − b_a b_b; mean zero, dealiased.
inline ScalarGrid recover_pressure(const GridField& u, const GridField& b) {
    const GridShape& s = u.shape();
    require(b.shape() == s, "recover_pressure: shape mismatch");
    detail::check_band(u, "u");
    detail::check_band(b, "b");
    const PhysicalField up = u.to_physical(), bp = b.to_physical();
    const auto& plans = detail::plans_for(s);
    const std::size_t np = s.physical_size();
    const double inv = 1.0 / double(np);
    ScalarGrid p{s, avector<cplx>(s.spectral_size(), cplx{})};
    avector<double> prod(np);
    avector<cplx> hat(s.spectral_size());
    for (int a = 0; a < 3; ++a)
        for (int c = a; c < 3; ++c) {
            for (std::size_t n = 0; n < np; ++n) prod[n] = up[a][n] * up[c][n] - bp[a][n] * bp[c][n];
            plans.forward(prod.data(), hat.data());
            const double mult = a == c ? 1.0 : 2.0;
            for (std::size_t n = 0; n < hat.size(); ++n) {
                const double k2 = plans.table.k2[n];
                if (k2 == 0.0 || !plans.table.in_band[n]) continue;
                p.coef[n] -= mult * plans.table.k[n][a] * plans.table.k[n][c] * hat[n] * inv / k2;
            }
        }
    return p;
}

/// (I − P)[(u·∇)u − (b·∇)b], the part that −∇p removes from the momentum equation.
inline GridField gradient_part(const GridField& u, const GridField& b) {
    const NonlinearResult r = nonlinear_rhs(u, b);  // −P[...]
    const GridShape& s = u.shape();
    // Unprojected (u·∇)u − (b·∇)b in divergence form, dealiased.
    const PhysicalField up = u.to_physical(), bp = b.to_physical();
    const auto& plans = detail::plans_for(s);
    const std::size_t np = s.physical_size();
    const double inv = 1.0 / double(np);
    avector<double> prod(np);
    std::array<avector<cplx>, 9> T;
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) {
            for (std::size_t n = 0; n < np; ++n) prod[n] = up[a][n] * up[c][n] - bp[a][n] * bp[c][n];
            auto& dst = T[3 * a + c];
            dst.assign(s.spectral_size(), cplx{});
            plans.forward(prod.data(), dst.data());
            for (auto& x : dst) x *= inv;
        }
    GridField full(s);
    detail::divergence_of_tensor(plans.table, full, [&](int a, int c, std::size_t n) { return T[3 * a + c][n]; });
    full *= -1.0;
    full.dealias();
    return full + r.du;
}

// ---------------------------------------------------------------------------
// Cascade audits

struct WindowRow {
    std::string label;
    double lo = 0.0, hi = 0.0;
    XTResult xt;
    double normalizer = 0.0;  ///< Q^{-1/2} inside the schedule, Q/√r for head and tail
    double ratio = 0.0;
    double high = 0.0, mid = 0.0, low = 0.0;  ///< X norms of the s-groups (schedule windows only)
};

struct WindowedAudit {
    std::vector<WindowRow> rows;
    double max_ratio = 0.0;
    double constant = 10.0;
    bool pass() const { return max_ratio <= constant; }
};

/// X norm of the heat flow of u₀ restricted to the schedule windows.
inline WindowedAudit audit_windowed_xT(const BPParams& p, const WaveSystem& ws, const TimeSchedule& sch, double T = 0.0,
                                       const XTOptions& xopt = {}) {
    require_exact(ws);
    const double horizon = T > 0.0 ? T : (p.T > 0.0 ? p.T : 1.0);
    const double Q = double(p.Q), r = double(p.r);
    const double a = Q / std::sqrt(r);
    auto group = [&](std::int64_t s_lo, std::int64_t s_hi) {  // s_lo < s ≤ s_hi
        ModeField f;
        for (std::int64_t s = std::max<std::int64_t>(s_lo + 1, 1); s <= s_hi; ++s) {
            const auto& w = ws.pairs[std::size_t(s - 1)];
            f.add(w.k, Parity::cos, VecExpPoly::constant(w.v * (a * std::sqrt(norm2(w.k)))));
        }
        f.set_divergence_free(true);
        return heat_propagate(f);
    };
    const ModeField h = group(0, p.r);
    WindowedAudit out;
    auto xt = [&](const ModeField& f, double lo, double hi) { return xT_norm(f, hi, xopt, {lo, hi}); };

    const double small = Q / std::sqrt(r), mid = 1.0 / std::sqrt(Q);
    out.rows.push_back({"head", 0.0, sch.T0, xt(h, 0.0, sch.T0), small});
    double lo = sch.T0;
    std::int64_t r_prev = p.r;
    for (const auto& e : sch.alphas) {
        WindowRow row{"alpha=" + std::to_string(e.alpha), lo, e.T_alpha, xt(h, lo, e.T_alpha), mid};
        row.high = xt(group(r_prev, p.r), lo, e.T_alpha).total();
        row.mid = xt(group(e.r_alpha, r_prev), lo, e.T_alpha).total();
        row.low = xt(group(0, e.r_alpha), lo, e.T_alpha).total();
        out.rows.push_back(row);
        lo = e.T_alpha;
        r_prev = e.r_alpha;
    }
    if (horizon > lo) out.rows.push_back({"tail", lo, horizon, xt(h, lo, horizon), small});
    for (auto& row : out.rows) {
        row.ratio = row.xt.total() / row.normalizer;
        out.max_ratio = std::max(out.max_ratio, row.ratio);
    }
    return out;
}

/// Remainders y, z as constant-coefficient snapshots.
struct SampledRemainder {
    std::vector<double> t;
    std::vector<ModeField> y, z;
};

inline SampledRemainder sample_remainder(const Decomposition& d, const std::vector<double>& times) {
    SampledRemainder s;
    s.t = times;
    for (double t : times) {
        s.y.push_back(d.y.at_time(t));
        s.z.push_back(d.z.at_time(t));
    }
    return s;
}

inline SampledRemainder sample_remainder(const GridDecomposition& d, double drop = 0.0) {
    SampledRemainder s;
    s.t = d.t;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        s.y.push_back(to_mode_field(d.y[i], drop));
        s.z.push_back(to_mode_field(d.z[i], drop));
    }
    return s;
}

struct GrowthRow {
    std::string label;
    double t_end = 0.0;
    double y_norm = 0.0, z_norm = 0.0;  ///< sampled X norms on [0, t_end]
    double y_linf = 0.0, z_linf = 0.0;  ///< at the last sample ≤ t_end
};

struct GrowthTable {
    std::vector<GrowthRow> rows;
    double first_window = 0.0;  ///< Q³ (1/r + √T_β)
    double iterated = 0.0;      ///< Q^{β+2} (1/r + √T_β)
    double final_x = 0.0;       ///< 4 Q⁴ T
    double final_linf = 0.0;    ///< 4 Q⁴ √T
    double b10_at_T = 0.0;
    double z_ratio = 0.0;       ///< ‖z(T)‖_∞ / b₁,₀ amplitude
    double yz_ratio = 0.0;      ///< (‖y(T)‖_∞ + ‖z(T)‖_∞) / b₁,₀ amplitude
    bool consistent() const { return yz_ratio <= 0.1; }
};

inline GrowthTable audit_growth(const SampledRemainder& rem, const BPParams& p, const WaveSystem& ws, const TimeSchedule& sch,
                                const SampledXTOptions& opt = {}) {
    require(!rem.t.empty(), "audit_growth: empty remainder");
    const double T = rem.t.back();
    const double Q = double(p.Q), r = double(p.r);
    GrowthTable g;
    const double Tb = sch.alphas.empty() ? sch.T0 : sch.alphas.back().T_alpha;
    g.first_window = std::pow(Q, 3.0) * (1.0 / r + std::sqrt(Tb));
    g.iterated = std::pow(Q, double(sch.beta) + 2.0) * (1.0 / r + std::sqrt(Tb));
    g.final_x = 4.0 * std::pow(Q, 4.0) * T;
    g.final_linf = 4.0 * std::pow(Q, 4.0) * std::sqrt(T);

    const SampledTrajectory ty{rem.t, rem.y}, tz{rem.t, rem.z};
    auto row_at = [&](const std::string& label, double t_end) {
        GrowthRow row{label, t_end};
        std::size_t last = 0;
        for (std::size_t i = 0; i < rem.t.size(); ++i)
            if (rem.t[i] <= t_end) last = i;
        row.y_norm = sampled_xT_norm(ty, t_end, {}, opt).total();
        row.z_norm = sampled_xT_norm(tz, t_end, {}, opt).total();
        row.y_linf = rem.y[last].empty() ? 0.0 : linf_norm(rem.y[last], 0.0, opt.linf).value;
        row.z_linf = rem.z[last].empty() ? 0.0 : linf_norm(rem.z[last], 0.0, opt.linf).value;
        return row;
    };
    for (const auto& e : sch.alphas)
        if (e.T_alpha < T && e.T_alpha >= rem.t.front()) g.rows.push_back(row_at("alpha=" + std::to_string(e.alpha), e.T_alpha));
    g.rows.push_back(row_at("T", T));

    g.b10_at_T = std::abs(b10_amplitude(ws, Q, r, T));
    const GrowthRow& fin = g.rows.back();
    g.z_ratio = g.b10_at_T > 0.0 ? fin.z_linf / g.b10_at_T : INFINITY;
    g.yz_ratio = g.b10_at_T > 0.0 ? (fin.y_linf + fin.z_linf) / g.b10_at_T : INFINITY;
    return g;
}

// ---------------------------------------------------------------------------
// Boundedness probe

struct BoundednessProbe {
    std::vector<double> ratios;
    double max_ratio = 0.0;
};

/// ‖B(u,v)‖_X / (‖u‖_X ‖v‖_X) over heat flows of random band-limited data.
inline BoundednessProbe probe_bilinear_boundedness(int samples, std::uint64_t seed, double T = 1.0, double amplitude = 1.0,
                                                   const XTOptions& xopt = [] {
                                                       XTOptions o;
                                                       o.linf.lattice = 32;
                                                       return o;
                                                   }()) {
    require(samples > 0, "probe_bilinear_boundedness: need at least one sample");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> kd(-2, 2);
    std::uniform_real_distribution<double> ad(-1.0, 1.0);
    auto field = [&] {
        ModeField f;
        while (f.size() < 3) {
            const IVec3 k{kd(rng), kd(rng), kd(rng)};
            const Vec3 a{ad(rng), ad(rng), ad(rng)};
            if (is_zero(k)) continue;
            f.add(k, rng() & 1 ? Parity::sin : Parity::cos, VecExpPoly::constant(a * amplitude));
        }
        return heat_propagate(leray_project(f));
    };
    BoundednessProbe out;
    for (int i = 0; i < samples; ++i) {
        const ModeField u = field(), v = field();
        const double nu = xT_norm(u, T, xopt).total(), nv = xT_norm(v, T, xopt).total();
        const double nb = xT_norm(bilinear_B(u, v), T, xopt).total();
        const double ratio = nb / (nu * nv);
        out.ratios.push_back(ratio);
        out.max_ratio = std::max(out.max_ratio, ratio);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const PicardStep& s) {
    return {{"n", s.n}, {"du", s.du}, {"db", s.db}, {"increment", s.increment()}, {"ratio", s.ratio}};
}

inline nlohmann::json to_json(const std::vector<PicardStep>& rec) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& s : rec) a.push_back(to_json(s));
    return a;
}

inline nlohmann::json to_json(const ResidualTerms& r) {
    return {{"dt", r.dt}, {"laplacian", r.lap}, {"group0", r.s0}, {"group1", r.s1}, {"group2", r.s2}, {"total", r.total},
            {"relative", r.relative()}};
}

inline nlohmann::json to_json(const ResidualReport& r) { return {{"y", to_json(r.y)}, {"z", to_json(r.z)}, {"t", r.t}}; }

inline nlohmann::json to_json(const WindowedAudit& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& w : a.rows)
        rows.push_back({{"window", w.label}, {"lo", w.lo}, {"hi", w.hi}, {"x_norm", w.xt.total()}, {"sup_part", w.xt.sup_part},
                        {"carleson", w.xt.carleson.value}, {"normalizer", w.normalizer}, {"ratio", w.ratio},
                        {"high", w.high}, {"mid", w.mid}, {"low", w.low}});
    return {{"rows", rows}, {"max_ratio", a.max_ratio}, {"constant", a.constant}, {"pass", a.pass()}};
}

inline nlohmann::json to_json(const GrowthTable& g) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& w : g.rows)
        rows.push_back({{"at", w.label}, {"t", w.t_end}, {"y_x", w.y_norm}, {"z_x", w.z_norm}, {"y_linf", w.y_linf}, {"z_linf", w.z_linf}});
    return {{"rows", rows},
            {"first_window", g.first_window},
            {"iterated", g.iterated},
            {"final_x", g.final_x},
            {"final_linf", g.final_linf},
            {"b10_at_T", g.b10_at_T},
            {"z_ratio", g.z_ratio},
            {"yz_ratio", g.yz_ratio},
            {"consistent", g.consistent()}};
}

inline nlohmann::json to_json(const BoundednessProbe& p) { return {{"ratios", p.ratios}, {"max_ratio", p.max_ratio}}; }

}  // namespace mhdinf

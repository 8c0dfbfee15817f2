#include <gtest/gtest.h>

#include "support.hpp"

using namespace mhdtest;

namespace {

BPParams explicit_params(std::int64_t Q, std::int64_t r, std::int64_t k0, CascadeLaw law) {
    BPParams p;
    p.Q = Q;
    p.r = r;
    p.k0_mag = k0;
    p.law = law;
    return p;
}

}  // namespace

TEST(ResolveParameters, QuarterDelta) {
    const BPParams p = resolve_parameters(0.25, CascadeLaw::paper);
    EXPECT_EQ(p.Q, 2);
    EXPECT_EQ(p.r, 128);
    EXPECT_EQ(p.T, 1.0 / 64.0);
    EXPECT_EQ(p.k0_mag, 80);
    EXPECT_TRUE(chain_checks(p).ok());
    // independent arithmetic: 2·2^{2.5} ≈ 11.3, 2·4/0.0625 = 128, multiple of 8
    EXPECT_EQ(p.r % 8, 0);
    EXPECT_GE(double(p.r), 128.0);
    EXPECT_LT(4.0 / 128.0, 1.0 / std::sqrt(2.0));
    EXPECT_LT(4.0 * std::sqrt(1.0 / 64.0), 1.0 / std::sqrt(2.0));
}

TEST(ResolveParameters, EdgeCases) {
    EXPECT_EQ(resolve_parameters(0.81, CascadeLaw::tempered).Q, 2);
    const BPParams one = resolve_parameters(1.0 - 1e-13, CascadeLaw::tempered);
    EXPECT_EQ(one.Q, 1);
    EXPECT_EQ(build_schedule(one, build_wave_system(one)).beta, 1);
    EXPECT_THROW(resolve_parameters(0.0, CascadeLaw::paper), PreconditionError);
    EXPECT_THROW(resolve_parameters(1.0, CascadeLaw::paper), PreconditionError);
    EXPECT_THROW(resolve_parameters(-0.5, CascadeLaw::paper), PreconditionError);
}

TEST(ResolveParameters, ChainHoldsAcrossDeltas) {
    std::int64_t lastQ = std::numeric_limits<std::int64_t>::max();
    for (double d : {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
        const BPParams p = resolve_parameters(d, CascadeLaw::tempered);
        EXPECT_TRUE(chain_checks(p).ok()) << d;
        EXPECT_LE(p.Q, lastQ);
        lastQ = p.Q;
        EXPECT_GE(double(p.Q * p.Q), 1.0 / d - 1e-9);
        EXPECT_LT(p.T, d);
        const double m1 = first_magnitude(p.k0_mag, p.law);
        EXPECT_LE(1.0 / (m1 * m1), p.T / 100.0);
        EXPECT_GE(double(p.k0_mag), 10.0 / std::sqrt(p.T));
    }
}

TEST(WaveSystem, PaperLawMagnitudes) {
    const WaveSystem ws = build_wave_system(explicit_params(1, 6, 4, CascadeLaw::paper));
    ASSERT_TRUE(ws.exact());
    // log2 m_s = 2(s+1) + s(s+1)/2 for k0 = 4
    const int expect[] = {2, 5, 9, 14, 20, 27, 35};
    for (int s = 0; s <= 6; ++s) {
        EXPECT_EQ(ws.log2_m[s], double(expect[s]));
        EXPECT_EQ(ws.m[s], BigInt(1) << expect[s]);
    }
    EXPECT_EQ(ws.pairs[0].k, (IVec3{32, 0, 0}));
    EXPECT_EQ(ws.pairs[0].kp, (IVec3{32, -1, 0}));
}

TEST(WaveSystem, PrimedAmplitudeExample) {
    const Vec3 vp = primed_amplitude(32.0, {0, 1, 0});
    EXPECT_EQ(vp[0], 0.015625);
    EXPECT_EQ(vp[1], 0.5);
    EXPECT_EQ(vp[2], std::sqrt(0.75 - 1.0 / 4096.0));
    EXPECT_NEAR(vp[2], 0.865884, 1e-6);
    EXPECT_EQ(32.0 * vp[0] - 0.5 * 1.0, 0.0);
    EXPECT_NEAR(norm(vp), 1.0, 1e-15);
}

TEST(WaveSystem, InvariantsForBothLaws) {
    for (auto law : {CascadeLaw::paper, CascadeLaw::tempered})
        for (std::int64_t k0 : {2, 3, 4, 7}) {
            const WaveSystem ws = build_wave_system(explicit_params(1, 5, k0, law));
            if (!ws.exact()) continue;
            for (const auto& p : ws.pairs) {
                EXPECT_EQ(p.k - p.kp, ws.eta);
                EXPECT_EQ(p.k[1], 0);
                EXPECT_EQ(p.k[2], 0);
                EXPECT_EQ(dot(p.k, p.v), 0.0);
                EXPECT_LE(std::abs(dot(p.kp, p.vp)), 1e-14 * std::sqrt(norm2(p.kp)));
                EXPECT_EQ(dot(to_vec(ws.eta), p.v), 0.0);
                EXPECT_EQ(dot(to_vec(ws.eta), p.vp), 0.5);
                EXPECT_LE(std::abs(norm(p.vp) - 1.0), 1e-14);
            }
            for (std::size_t s = 1; s < ws.m.size(); ++s) {
                EXPECT_GT(ws.m[s], ws.m[s - 1]);
                if (law == CascadeLaw::paper) EXPECT_LE(2 * ws.m[s - 1], ws.m[s]);
            }
        }
}

TEST(WaveSystem, OverflowIsReported) {
    const BPParams p = explicit_params(1, 10, 4, CascadeLaw::paper);
    const WaveSystem ws = build_wave_system(p);
    EXPECT_FALSE(ws.exact());
    EXPECT_EQ(ws.m[10], BigInt(1) << 77);  // 2·11 + 55
    EXPECT_THROW(build_wave_system(p, true), MagnitudeOverflow);
    EXPECT_THROW(build_initial_data(ws, 1.0, 10.0), MagnitudeOverflow);
}

TEST(Validate, PaperLawSmallSystemPasses) {
    const ValidationReport rep = validate_wave_system(build_wave_system(explicit_params(1, 3, 4, CascadeLaw::paper)));
    EXPECT_TRUE(rep.all_pass());
    EXPECT_EQ(rep.get("orthogonality").value, 0.0);
    EXPECT_LE(rep.get("primed_constraints").value, 1e-14);
    EXPECT_TRUE(rep.get("tail_sum").applicable);
}

TEST(Validate, EnvelopeAgainstDirectSummation) {
    for (int r = 1; r <= 6; ++r) {
        const WaveSystem ws = build_wave_system(explicit_params(1, r, 4, CascadeLaw::paper));
        double t_arg = 0.0;
        const double sup = cascade_envelope_sup(ws, &t_arg);
        // direct summation on a fine grid around each |k_s|^{-2}
        double ref = 0.0;
        for (int s = 1; s <= r; ++s) {
            const double m = ws.magnitude(s);
            for (int j = -400; j <= 400; ++j) {
                const double t = std::exp(j / 100.0) / (m * m);
                double acc = 0.0;
                for (int l = 1; l <= r; ++l) acc += ws.magnitude(l) * std::exp(-ws.magnitude(l) * ws.magnitude(l) * t);
                ref = std::max(ref, std::sqrt(t) * acc);
            }
        }
        EXPECT_GE(sup, ref * (1 - 1e-12));
        EXPECT_LE(sup, ref * (1 + 1e-4));
        EXPECT_LE(sup, std::sqrt(pi));
    }
}

TEST(Validate, NonDoublingSystemFailsPartialSums) {
    const ValidationReport rep = validate_wave_system(wave_system_from_magnitudes({1, 2, 3, 4, 5, 6}));
    EXPECT_FALSE(rep.get("partial_sums").pass);
    EXPECT_GT(rep.get("partial_sums").value, 2.0);
}

TEST(Validate, LargePaperLawFromLogs) {
    const ValidationReport rep = validate_wave_system(build_wave_system(explicit_params(1, 12, 4, CascadeLaw::paper)));
    EXPECT_TRUE(rep.all_pass());
}

TEST(InitialData, SingleModeAmplitude) {
    const WaveSystem ws = build_wave_system(explicit_params(3, 1, 4, CascadeLaw::tempered));
    const InitialData d = build_initial_data(ws, 3.0, 1.0);
    ASSERT_EQ(d.u0.size(), 1u);
    EXPECT_EQ(d.u0.eval({0, 0, 0}, 0.0), (Vec3{0, 0, 3.0 * 8.0}));
    EXPECT_TRUE(d.u0.divergence_free());
    EXPECT_EQ(d.u0.divergence_defect(), 0.0);
    EXPECT_LE(d.b0.divergence_defect(), 1e-14);
}

TEST(InitialData, BesovBoundPaperLaw) {
    for (int r = 1; r <= 6; ++r) {
        const double Q = 2.0;
        const WaveSystem ws = build_wave_system(explicit_params(2, r, 4, CascadeLaw::paper));
        const InitialData d = build_initial_data(ws, Q, r);
        const double b = besov_minus1_inf(d.u0, BesovVariant::homogeneous).value;
        const double scale = Q / std::sqrt(double(r));
        EXPECT_LE(b, scale * std::sqrt(pi)) << r;
        EXPECT_GE(b, 0.2 * scale);
        EXPECT_LE(b, 1.8 * scale);
    }
}

TEST(InitialData, GridSampleMatchesEvaluation) {
    const WaveSystem ws = build_wave_system(explicit_params(1, 2, 4, CascadeLaw::tempered));
    const InitialData d = build_initial_data(ws, 1.0, 2.0);
    const GridShape s = GridShape::cube(64);
    const PhysicalField p = sample(d.b0, s).to_physical();
    double worst = 0.0;
    for (int i = 0; i < 64; i += 3)
        for (int j = 0; j < 64; j += 7)
            for (int l = 0; l < 64; l += 11) {
                const Vec3 x{2 * pi * i / 64, 2 * pi * j / 64, 2 * pi * l / 64};
                const std::size_t n = s.phys_index(i, j, l);
                worst = std::max(worst, max_abs_diff(d.b0.eval(x, 0.0), {p[0][n], p[1][n], p[2][n]}));
            }
    EXPECT_LE(worst, 1e-12);
}

TEST(FirstIterates, ResonantPartHasCascadeStructure) {
    const double Q = 2.0, r = 3.0;
    const WaveSystem ws = build_wave_system(explicit_params(2, 3, 4, CascadeLaw::tempered));
    const FirstIterates it = closed_form_first_iterates(ws, Q, r);
    ASSERT_EQ(it.b1_0.size(), 1u);
    const auto& [key, c] = *it.b1_0.modes().begin();
    EXPECT_EQ(key.k, ws.eta);
    EXPECT_EQ(key.parity, Parity::sin);
    for (double t : {0.0, 0.01, 0.3, 1.0}) {
        const Vec3 a = c(t);
        EXPECT_EQ(a[0], 0.0);
        EXPECT_EQ(a[1], 0.0);
        double ref = 0.0;
        for (const auto& p : ws.pairs) {
            const double k2 = norm2(p.k), kp2 = norm2(p.kp);
            ref += std::sqrt(k2 * kp2) * (std::exp(-t) - std::exp(-(k2 + kp2) * t)) / (k2 + kp2 - 1.0);
        }
        ref *= Q * Q / (4.0 * r);
        EXPECT_NEAR(a[2], ref, 1e-15 + 1e-13 * ref);
        EXPECT_NEAR(b10_amplitude(ws, Q, r, t), ref, 1e-15 + 1e-13 * ref);
    }
}

TEST(FirstIterates, VanishAtTimeZeroAndDivergenceFree) {
    const WaveSystem ws = build_wave_system(explicit_params(1, 3, 8, CascadeLaw::tempered));
    const FirstIterates it = closed_form_first_iterates(ws, 1.0, 3.0);
    for (const ModeField* f : {&it.u1, &it.b1_0, &it.b1_1}) {
        EXPECT_LE(f->at_time(0.0).max_coefficient(), 1e-15 * f->max_coefficient());
        EXPECT_LE(f->divergence_defect(), 1e-14);
    }
}

TEST(FirstIterates, PlateauAmplitudeLaw) {
    const WaveSystem ws = build_wave_system(explicit_params(1, 2, 8, CascadeLaw::tempered));
    const double t = 0.05;  // 1/|k1|² = 1/256 ≪ t ≪ 1
    std::vector<double> amp;
    for (double Q : {1.0, 2.0, 4.0}) {
        const FirstIterates it = closed_form_first_iterates(ws, Q, 2.0);
        const double a = it.b1_0.eval({0, pi / 2, 0}, t)[2];
        EXPECT_LE(std::abs(a - Q * Q / 8.0) / (Q * Q / 8.0), 0.2) << Q;
        amp.push_back(a);
    }
    EXPECT_NEAR(amp[1] / amp[0], 4.0, 0.04);
    EXPECT_NEAR(amp[2] / amp[1], 4.0, 0.04);
}

TEST(FirstIterates, FullScaleAmplitudeFromLogs) {
    const WaveSystem ws = build_wave_system(explicit_params(2, 30, 4, CascadeLaw::paper));
    ASSERT_FALSE(ws.exact());
    const double t = 0.01;
    const double a = b10_amplitude(ws, 2.0, 30.0, t);
    // summands ½√(1 + 1/m²)(e^{-t} − e^{-(2m²+1)t}); only m₁ = 32 is not negligible in the correction
    long double ref = 0.0L;
    for (int s = 1; s <= 30; ++s) {
        const long double m = std::exp2l((long double)ws.log2_m[s]);
        ref += 0.5L * std::sqrt(1.0L + 1.0L / (m * m)) * (std::exp(-(long double)t) - std::exp(-(2.0L * m * m + 1.0L) * t));
    }
    ref *= 4.0L / 120.0L;
    EXPECT_NEAR(a, double(ref), 1e-14);
    EXPECT_NEAR(a, 0.5 * std::exp(-t), 1e-4);
    EXPECT_TRUE(std::isfinite(b10_amplitude(ws, 2.0, 30.0, 0.0)));
    EXPECT_EQ(b10_amplitude(ws, 2.0, 30.0, 0.0), 0.0);
}

TEST(TwoWave, ResonantCoefficientAtHalf) {
    const TwoWave w = two_wave_interaction({2, 0, 0}, {2, -1, 0}, {0, 0, 1}, {0.25, 0.5, std::sqrt(11.0) / 4.0});
    ASSERT_EQ(w.b1_0.size(), 1u);
    const auto& [key, c] = *w.b1_0.modes().begin();
    EXPECT_EQ(key.k, (IVec3{0, 1, 0}));
    // ∫₀^{1/2} e^{-(1/2-τ)} e^{-9τ} dτ / 4
    const double oracle = quad([](double tau) { return std::exp(-(0.5 - tau)) * std::exp(-9.0 * tau); }, 0.0, 0.5) / 4.0;
    EXPECT_NEAR(c(0.5)[2], oracle, 1e-12);
    EXPECT_NEAR(c(0.5)[2], 0.0186069, 1e-7);
    EXPECT_NEAR(c(0.5)[2], (std::exp(-0.5) - std::exp(-4.5)) / 32.0, 1e-16);
    EXPECT_EQ(w.b1().at_time(0.0).max_coefficient(), 0.0);
}

TEST(TwoWave, ViolatedConstraintIsAnError) {
    EXPECT_THROW(two_wave_interaction({2, 0, 0}, {2, -1, 0}, {0, 1, 0}, {0.25, 0.5, std::sqrt(11.0) / 4.0}), PreconditionError);
    EXPECT_THROW(two_wave_interaction({2, 0, 0}, {2, -1, 0}, {0, 0, 1}, {0.3, 0.5, 0.8}), PreconditionError);
}

TEST(TwoWave, OrthogonalWavesUseResonantBranch) {
    // k₁·k₂ = 0: k₁ = (0,0,1)... needs k₁·v₂ = ½ with v₂ ⟂ k₂
    const IVec3 k1{1, 0, 0}, k2{0, 1, 0};
    const Vec3 v1{0, 0, 1}, v2{0.5, 0, std::sqrt(0.75)};
    const TwoWave w = two_wave_interaction(k1, k2, v1, v2);
    const auto& c = w.b1_0.modes().begin()->second;
    for (double t : {0.1, 0.7}) {
        const double ref = quad([&](double tau) { return std::exp(-2.0 * (t - tau)) * std::exp(-2.0 * tau); }, 0.0, t) / 4.0;
        EXPECT_NEAR(std::abs(c(t)[2]), ref, 1e-14);
    }
}

TEST(Schedule, Examples) {
    {
        const BPParams p = explicit_params(1, 4, 4, CascadeLaw::tempered);
        const TimeSchedule s = build_schedule(p, build_wave_system(p));
        ASSERT_EQ(s.beta, 1);
        ASSERT_EQ(s.alphas.size(), 1u);
        EXPECT_EQ(s.alphas[0].r_alpha, 0);
        EXPECT_EQ(s.alphas[0].T_alpha, 1.0 / 16.0);
    }
    {
        const BPParams p = explicit_params(2, 8, 4, CascadeLaw::paper);
        const WaveSystem ws = build_wave_system(p);
        const TimeSchedule s = build_schedule(p, ws);
        ASSERT_EQ(s.beta, 8);
        for (std::size_t a = 0; a < 8; ++a) {
            EXPECT_EQ(s.alphas[a].r_alpha, std::int64_t(7 - a));
            EXPECT_EQ(s.alphas[a].log2_T_alpha, -2.0 * ws.log2_m[7 - a]);
            if (a > 0) EXPECT_GT(s.alphas[a].T_alpha, s.alphas[a - 1].T_alpha);
        }
        EXPECT_EQ(s.alphas.back().T_alpha, 1.0 / 16.0);
    }
    const BPParams bad = explicit_params(2, 12, 4, CascadeLaw::tempered);
    EXPECT_THROW(build_schedule(bad, build_wave_system(bad)), PreconditionError);
}

TEST(Json, ParamsRoundTrip) {
    const BPParams p = resolve_parameters(0.3, CascadeLaw::paper);
    const BPParams q = params_from_json(to_json(p));
    EXPECT_EQ(to_json(p), to_json(q));
    const nlohmann::json ws = to_json(build_wave_system(explicit_params(1, 10, 4, CascadeLaw::paper)));
    EXPECT_EQ(ws["magnitudes"][10].get<std::string>(), (BigInt(1) << 77).str());
}

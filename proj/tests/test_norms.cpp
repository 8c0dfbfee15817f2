#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>

#include "support.hpp"

using namespace mhdtest;

namespace {

ModeField wave(IVec3 k, Vec3 a, Parity p = Parity::cos) { return ModeField::plane_wave(k, p, a); }

/// sup_t √t e^{-k²t} by brute-force scan, the plane-wave oracle.
double plane_wave_oracle(double k2) {
    double best = 0.0;
    for (int j = 0; j <= 200000; ++j) {
        const double t = std::pow(10.0, -6.0 + 8.0 * j / 200000.0);
        best = std::max(best, std::sqrt(t) * std::exp(-k2 * t));
    }
    return best;
}

/// ∫_{|z|<ρ} g(x₀+z) dz by a Gauss product rule in spherical coordinates.
template <class G>
double ball_quadrature(G&& g, const Vec3& x0, double rho) {
    using GL = boost::math::quadrature::gauss<double, 30>;
    const int nphi = 64;
    return GL::integrate([&](double r) {
        return GL::integrate([&](double c) {
            const double s = std::sqrt(1.0 - c * c);
            double acc = 0.0;
            for (int i = 0; i < nphi; ++i) {
                const double phi = 2.0 * pi * (i + 0.5) / nphi;
                acc += g(x0 + Vec3{r * s * std::cos(phi), r * s * std::sin(phi), r * c});
            }
            return acc * (2.0 * pi / nphi) * r * r;
        }, -1.0, 1.0);
    }, 0.0, rho);
}

}  // namespace

TEST(Besov, PlaneWaveUnitFrequency) {
    const BesovResult r = besov_minus1_inf(wave({1, 0, 0}, {0, 0, 1}), BesovVariant::homogeneous);
    EXPECT_NEAR(r.value, 0.428882, 1e-6);
    EXPECT_NEAR(r.value, std::exp(-0.5) / std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(r.t, 0.5, 1e-4);
    EXPECT_NEAR(plane_wave_oracle(1.0), r.value, 1e-9);
}

TEST(Besov, PlaneWaveFrequencyTwo) {
    const BesovResult r = besov_minus1_inf(wave({0, 2, 0}, {1, 0, 0}, Parity::sin), BesovVariant::homogeneous);
    EXPECT_NEAR(r.value, 0.214441, 1e-6);
    EXPECT_NEAR(r.t, 0.125, 1e-4);
}

TEST(Besov, PlaneWaveMatchesClosedFormForSeveralFrequencies) {
    for (int k : {1, 2, 4}) {
        const double exact = std::exp(-0.5) / (std::sqrt(2.0) * k);
        EXPECT_NEAR(plane_wave_oracle(double(k * k)), exact, 1e-9);
        for (auto v : {BesovVariant::homogeneous, BesovVariant::inhomogeneous}) {
            const BesovResult r = besov_minus1_inf(wave({0, 0, k}, {0.6, 0.8, 0}), v);
            EXPECT_LE(std::abs(r.value - exact), 1e-6) << k;
        }
    }
}

TEST(Besov, VariantsAgreeWhenPeakIsEarly) {
    // for |k| = 1 the maximizing t = 1/2 lies in (0, 1], so both variants agree
    const ModeField f = wave({1, 0, 0}, {0, 1, 0});
    const BesovPair p = besov_pair(f);
    EXPECT_DOUBLE_EQ(p.homogeneous.value, p.inhomogeneous.value);
    EXPECT_LE(p.inhomogeneous.t, 1.0);
}

TEST(Besov, Homogeneity) {
    Gen g(41);
    const ModeField f = g.field(4, 3).at_time(0.0);
    BesovOptions o;
    o.linf.lattice = 32;
    const double base = besov_minus1_inf(f, BesovVariant::homogeneous, o).value;
    for (double c : {0.0, 0.5, 3.0}) {
        const double v = besov_minus1_inf(f * c, BesovVariant::homogeneous, o).value;
        EXPECT_NEAR(v, c * base, 1e-12 * base);
    }
}

TEST(Besov, InadequateTmaxIsAnError) {
    BesovOptions o;
    o.t.t_max = 0.1;
    EXPECT_THROW(besov_minus1_inf(wave({1, 0, 0}, {0, 0, 1}), BesovVariant::homogeneous, o), PreconditionError);
    EXPECT_NO_THROW(besov_minus1_inf(wave({1, 0, 0}, {0, 0, 1}), BesovVariant::inhomogeneous, o));
}

TEST(Besov, EmbeddingOnRandomFields) {
    Gen g(42);
    BesovOptions o;
    o.linf.lattice = 16;
    o.linf.starts = 2;
    o.t.min_points = 200;
    for (int trial = 0; trial < 100; ++trial) {
        const ModeField f = g.field(g.integer(1, 4), 2).at_time(0.0) * g.uniform(0.1, 3.0);
        const BesovPair p = besov_pair(f, o);
        EXPECT_LE(p.inhomogeneous.value, p.homogeneous.value) << trial;
        EXPECT_GE(p.inhomogeneous.value, 0.0);
        EXPECT_TRUE(std::isfinite(p.homogeneous.value));
    }
}

TEST(Besov, InhomogeneousBoundedBySupNorm) {
    Gen g(43);
    for (int trial = 0; trial < 10; ++trial) {
        const ModeField f = g.field(5, 3).at_time(0.0);
        const double sup = linf_norm(f, 0.0).value;
        const double b = besov_minus1_inf(f, BesovVariant::inhomogeneous).value;
        EXPECT_LE(b, sup * (1.0 + 1e-4));
    }
}

TEST(Besov, DecreasesAlongHeatFlow) {
    Gen g(44);
    BesovOptions o;
    o.linf.lattice = 32;
    for (int trial = 0; trial < 5; ++trial) {
        const ModeField heat = heat_propagate(g.field(4, 3).at_time(0.0));
        double last = std::numeric_limits<double>::infinity();
        for (double t0 : {0.0, 0.05, 0.2, 1.0}) {
            const double v = besov_minus1_inf(heat.at_time(t0), BesovVariant::homogeneous, o).value;
            EXPECT_LE(v, last * (1.0 + 1e-9));
            last = v;
        }
    }
}

TEST(Linf, AgreesWithRandomSearchAndIsAttained) {
    Gen g(45);
    for (int trial = 0; trial < 6; ++trial) {
        const ModeField f = g.field(6, 4).at_time(0.0);
        const LinfResult r = linf_norm(f, 0.0);
        EXPECT_NEAR(norm(f.eval(r.x, 0.0)), r.value, 1e-12 * r.value);
        double probe = 0.0;
        for (int i = 0; i < 20000; ++i) probe = std::max(probe, norm(f.eval(g.point(), 0.0)));
        EXPECT_GE(r.value, probe * (1.0 - 1e-4));
    }
}

TEST(Linf, HugeCommensurateFrequencies) {
    // All crests meet at x = 0, which is a lattice node.
    ModeField f;
    const double c[] = {1.0, 0.5, 0.25, 2.0};
    const std::int64_t m[] = {std::int64_t(1) << 5, std::int64_t(1) << 9, std::int64_t(1) << 14, std::int64_t(1) << 35};
    for (int s = 0; s < 4; ++s) f += wave({m[s], 0, 0}, {0, 0, c[s]});
    EXPECT_EQ(linf_norm(f, 0.0).value, 3.75);
}

TEST(Linf, ZeroField) { EXPECT_EQ(linf_norm(ModeField{}, 0.0).value, 0.0); }

TEST(BallIntegral, MatchesGaussProductRule) {
    Gen g(46);
    for (double q : {0.0, 1e-3, 0.3, 1.0, 2.2360679774997896, 5.0}) {
        for (double rho : {0.05, 0.4, 1.0}) {
            const Vec3 dir = [&] {
                const Vec3 v = g.vec();
                return v * (1.0 / norm(v));
            }();
            const double ref = ball_quadrature([&](const Vec3& y) { return std::cos(q * dot(dir, y)); }, {0, 0, 0}, rho);
            EXPECT_NEAR(ball_cos_integral(q, rho), ref, 1e-12 * std::abs(ref) + 1e-15) << q << " " << rho;
        }
    }
}

TEST(Carleson, BallAverageMatchesQuadrature) {
    Gen g(47);
    for (int trial = 0; trial < 3; ++trial) {
        const ModeField u = heat_propagate(g.field(3, 2).at_time(0.0));
        const detail::CarlesonEvaluator ev(u, {}, CarlesonOptions{});
        const Vec3 x0 = g.point();
        const double R = g.uniform(0.05, 0.8);
        const double rho = std::sqrt(R);
        using GL = boost::math::quadrature::gauss<double, 20>;
        const double integral = GL::integrate([&](double t) {
            return ball_quadrature([&](const Vec3& y) {
                const Vec3 v = u.eval(y, t);
                return dot(v, v);
            }, x0, rho);
        }, 0.0, R);
        const double ref = integral / (4.0 * pi * rho * rho * rho / 3.0);
        EXPECT_NEAR(ev.at(x0, R), ref, 1e-10 * ref);
    }
}

TEST(XT, HeatFlowOfFrequencyFourWave) {
    const ModeField u = heat_propagate(wave({0, 4, 0}, {0, 0, 1}));
    const XTResult r = xT_norm(u, 1.0);
    EXPECT_NEAR(r.sup_part, 0.107220, 1e-6);
    EXPECT_GT(r.carleson.value, 0.0);
    EXPECT_NEAR(r.total(), r.sup_part + r.carleson.value, 0.0);
}

TEST(XT, ConstantInTimeField) {
    const double c = 1.7;
    for (double T : {0.01, 0.1, 1.0}) {
        const XTResult r = xT_norm(wave({0, 1, 0}, {0, 0, c}, Parity::sin), T);
        EXPECT_NEAR(r.sup_part, c * std::sqrt(T), 1e-9 * c);
        EXPECT_LE(r.carleson.value, c * std::sqrt(T) * (1.0 + 1e-12));
        EXPECT_GT(r.carleson.value, 0.5 * c * std::sqrt(T));
    }
}

TEST(XT, ZeroField) {
    const XTResult r = xT_norm(ModeField{}, 1.0);
    EXPECT_EQ(r.sup_part, 0.0);
    EXPECT_EQ(r.carleson.value, 0.0);
}

TEST(XT, WindowLimitsTime) {
    const double c = 0.8;
    const ModeField u = wave({1, 0, 0}, {0, c, 0}, Parity::sin);
    const XTResult r = xT_norm(u, 1.0, {}, {0.2, 0.5});
    EXPECT_NEAR(r.sup_part, c * std::sqrt(0.5), 1e-9);
    // the time integral sees at most 0.3 of sup|u|²
    EXPECT_LE(r.carleson.value, c * std::sqrt(0.3) * (1.0 + 1e-12));
    const XTResult empty = xT_norm(u, 0.1, {}, {0.2, 0.5});
    EXPECT_EQ(empty.carleson.value, 0.0);
}

TEST(XT, EmptyCandidateSetIsAnError) {
    XTOptions o;
    o.carleson.centers = 0;
    EXPECT_THROW(xT_norm(wave({1, 0, 0}, {0, 1, 0}), 1.0, o), PreconditionError);
}

TEST(BmoInv, ScalesLikeInverseFrequency) {
    std::vector<double> scaled;
    for (int k : {1, 2, 4}) {
        const CarlesonResult r = bmo_inv(wave({k, 0, 0}, {0, 1, 0}));
        EXPECT_TRUE(r.converged);
        EXPECT_TRUE(std::isfinite(r.value));
        scaled.push_back(r.value * k);
    }
    for (double s : scaled) EXPECT_LE(std::abs(s - scaled.back()) / scaled.back(), 0.10) << s;
}

TEST(BmoInv, HomogeneityAndZero) {
    Gen g(48);
    const ModeField f = g.field(3, 2).at_time(0.0);
    const double base = bmo_inv(f).value;
    EXPECT_NEAR(bmo_inv(f * 2.5).value, 2.5 * base, 1e-10 * base);
    EXPECT_EQ(bmo_inv(ModeField{}).value, 0.0);
}

TEST(NormReport, JsonCarriesConvention) {
    NormReport r;
    r.besov_homog = besov_minus1_inf(wave({1, 0, 0}, {0, 0, 1}), BesovVariant::homogeneous);
    const nlohmann::json j = to_json(r);
    EXPECT_EQ(j["besov_homog"]["value"].get<double>(), r.besov_homog.value);
    EXPECT_TRUE(j.contains("ball_convention"));
}

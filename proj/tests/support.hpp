#pragma once

// Hand-rolled generators and small oracles shared by the test binaries.

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mhdinf/mhdinf.hpp"

namespace mhdtest {

using namespace mhdinf;

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
    Vec3 vec(double a = -1.0, double b = 1.0) { return {uniform(a, b), uniform(a, b), uniform(a, b)}; }
    Vec3 point() { return vec(0.0, 2.0 * pi); }

    IVec3 wave(int kmax) {
        IVec3 k{};
        do {
            k = {integer(-kmax, kmax), integer(-kmax, kmax), integer(-kmax, kmax)};
        } while (is_zero(k));
        return k;
    }

    Parity parity() { return integer(0, 1) == 0 ? Parity::cos : Parity::sin; }

    ExpPoly expoly(int terms = 2, int max_m = 1, double max_lambda = 2.0) {
        ExpPoly p;
        for (int i = 0; i < terms; ++i) p.push_raw(uniform(-1.0, 1.0), integer(0, max_m), uniform(0.0, max_lambda));
        p.canonicalize();
        return p;
    }

    /// Decay rates on the integers, as they arise from sums of |k|².
    ExpPoly lattice_expoly(int terms = 2, int max_m = 1, int max_lambda = 6) {
        ExpPoly p;
        for (int i = 0; i < terms; ++i) p.push_raw(uniform(-1.0, 1.0), integer(0, max_m), integer(0, max_lambda));
        p.canonicalize();
        return p;
    }

    /// Random field with `modes` waves, |k_i| ≤ kmax, optionally projected.
    ModeField field(int modes, int kmax, bool solenoidal = true, int terms = 1, int max_m = 0) {
        ModeField f;
        for (int i = 0; i < modes; ++i) {
            const IVec3 k = wave(kmax);
            VecExpPoly c;
            for (int j = 0; j < terms; ++j) c.push_raw(vec(), integer(0, max_m), integer(0, 3));
            c.canonicalize();
            f.add(k, parity(), c);
        }
        return solenoidal ? leray_project(f) : f;
    }
};

/// Adaptive Gauss–Kronrod quadrature on [a, b].
template <class F>
double quad(F&& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

inline double max_abs_diff(const Vec3& a, const Vec3& b) {
    return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

}  // namespace mhdtest

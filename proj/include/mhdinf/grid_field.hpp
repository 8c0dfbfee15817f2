#pragma once

// Spectral vector fields on a periodic nx × ny × nz grid of [0,2π)³.
//
// Coefficients are stored in FFTW's r2c half-complex layout (last axis
// truncated to nz/2+1) with normalisation û = FFT(u)/(nx ny nz), so a mode
// a cos(k·x) shows up as ½a at ±k.  Dealiasing is the 2/3 rule: a wave vector
// is resolvable when 3|k_i| < n_i on every axis.
//
// Plans use FFTW_ESTIMATE only: measured plans may pick different
// algorithms from run to run, and outputs have to be reproducible bit for bit.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <string>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "core.hpp"
#include "mode_field.hpp"

namespace mhdinf {

using cplx = std::complex<double>;

/// 64-byte aligned storage, so every buffer meets FFTW's SIMD alignment.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t align{64};
    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) {}
    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), align)); }
    void deallocate(T* p, std::size_t) { ::operator delete(p, align); }
    template <class U>
    bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <class T>
using avector = std::vector<T, AlignedAllocator<T>>;

struct GridShape {
    int nx = 32, ny = 32, nz = 32;

    static GridShape cube(int n) { return {n, n, n}; }

    std::size_t physical_size() const { return std::size_t(nx) * ny * nz; }
    int nzh() const { return nz / 2 + 1; }
    std::size_t spectral_size() const { return std::size_t(nx) * ny * nzh(); }

    std::size_t spec_index(int i, int j, int l) const { return (std::size_t(i) * ny + j) * nzh() + l; }
    std::size_t phys_index(int i, int j, int l) const { return (std::size_t(i) * ny + j) * nz + l; }

    static int wavenumber(int idx, int n) { return idx <= (n - 1) / 2 ? idx : idx - n; }
    std::array<int, 3> k_of(int i, int j, int l) const { return {wavenumber(i, nx), wavenumber(j, ny), l}; }

    bool resolvable(const IVec3& k) const {
        return 3 * std::abs(k[0]) < nx && 3 * std::abs(k[1]) < ny && 3 * std::abs(k[2]) < nz;
    }
    bool resolvable(int kx, int ky, int kz) const { return resolvable(IVec3{kx, ky, kz}); }

    double min_spacing() const { return 2.0 * pi / std::max({nx, ny, nz}); }

    friend auto operator<=>(const GridShape&, const GridShape&) = default;
};

/// Per-shape wave vector table in storage order.
struct SpectralTable {
    std::vector<std::array<double, 3>> k;
    std::vector<double> k2;
    std::vector<std::uint8_t> in_band;
    std::vector<std::uint8_t> weight;  ///< 1 in the self-conjugate planes, 2 elsewhere

    explicit SpectralTable(const GridShape& s) {
        const std::size_t n = s.spectral_size();
        k.resize(n);
        k2.resize(n);
        in_band.resize(n);
        weight.resize(n);
        for (int i = 0; i < s.nx; ++i)
            for (int j = 0; j < s.ny; ++j)
                for (int l = 0; l < s.nzh(); ++l) {
                    const auto q = s.k_of(i, j, l);
                    const std::size_t m = s.spec_index(i, j, l);
                    k[m] = {double(q[0]), double(q[1]), double(q[2])};
                    k2[m] = k[m][0] * k[m][0] + k[m][1] * k[m][1] + k[m][2] * k[m][2];
                    in_band[m] = s.resolvable(q[0], q[1], q[2]) ? 1 : 0;
                    weight[m] = (l == 0 || 2 * l == s.nz) ? 1 : 2;
                }
    }
};

namespace detail {

/// Forward/backward FFTW plans for one shape, created once and reused.
class FftPlans {
public:
    explicit FftPlans(const GridShape& s) : table(s) {
        avector<double> re(s.physical_size());
        avector<cplx> sp(s.spectral_size());
        auto* cp = reinterpret_cast<fftw_complex*>(sp.data());
        r2c_ = fftw_plan_dft_r2c_3d(s.nx, s.ny, s.nz, re.data(), cp, FFTW_ESTIMATE);
        c2r_ = fftw_plan_dft_c2r_3d(s.nx, s.ny, s.nz, cp, re.data(), FFTW_ESTIMATE);
        if (r2c_ == nullptr || c2r_ == nullptr) throw NumericalError("FFTW plan creation failed");
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
    ~FftPlans() {
        fftw_destroy_plan(r2c_);
        fftw_destroy_plan(c2r_);
    }

    void forward(double* in, cplx* out) const { fftw_execute_dft_r2c(r2c_, in, reinterpret_cast<fftw_complex*>(out)); }
    /// Destroys `in`.
    void backward(cplx* in, double* out) const { fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(in), out); }

    SpectralTable table;

private:
    fftw_plan r2c_ = nullptr;
    fftw_plan c2r_ = nullptr;
};

inline const FftPlans& plans_for(const GridShape& s) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, std::unique_ptr<FftPlans>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{s.nx, s.ny, s.nz}];
    if (!slot) slot = std::make_unique<FftPlans>(s);
    return *slot;
}

}  // namespace detail

inline const SpectralTable& spectral_table(const GridShape& s) { return detail::plans_for(s).table; }

using PhysicalField = std::array<avector<double>, 3>;

class GridField {
public:
    GridField() = default;
    explicit GridField(GridShape s) : shape_(s) {
        for (auto& c : comp_) c.assign(s.spectral_size(), cplx{});
    }

    const GridShape& shape() const { return shape_; }
    avector<cplx>& component(int c) { return comp_[c]; }
    const avector<cplx>& component(int c) const { return comp_[c]; }

    GridField& operator+=(const GridField& o) {
        axpy(1.0, o);
        return *this;
    }
    GridField& operator-=(const GridField& o) {
        axpy(-1.0, o);
        return *this;
    }
    GridField& operator*=(double s) {
        for (auto& c : comp_)
            for (auto& x : c) x *= s;
        return *this;
    }
    friend GridField operator+(GridField a, const GridField& b) { return a += b; }
    friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
    friend GridField operator*(GridField a, double s) { return a *= s; }
    friend GridField operator*(double s, GridField a) { return a *= s; }

    /// this += s·o
    void axpy(double s, const GridField& o) {
        for (int c = 0; c < 3; ++c) {
            cplx* x = comp_[c].data();
            const cplx* y = o.comp_[c].data();
            for (std::size_t n = 0, e = comp_[c].size(); n < e; ++n) x[n] += s * y[n];
        }
    }

    /// Multiplies coefficient n of every component by f[n].
    void scale_by(const std::vector<double>& f) {
        for (auto& c : comp_)
            for (std::size_t n = 0; n < c.size(); ++n) c[n] *= f[n];
    }

    /// Multiplies every coefficient by e^{-|k|² h}.
    void heat(double h) {
        const auto& k2 = spectral_table(shape_).k2;
        for (std::size_t n = 0; n < k2.size(); ++n) {
            const double f = std::exp(-k2[n] * h);
            for (auto& c : comp_) c[n] *= f;
        }
    }

    void dealias() {
        const auto& band = spectral_table(shape_).in_band;
        for (std::size_t n = 0; n < band.size(); ++n)
            if (!band[n])
                for (auto& c : comp_) c[n] = 0.0;
    }

    /// Largest coefficient modulus outside the dealias band.
    double out_of_band() const {
        const auto& band = spectral_table(shape_).in_band;
        double m = 0.0;
        for (std::size_t n = 0; n < band.size(); ++n)
            if (!band[n])
                for (const auto& c : comp_) m = std::max(m, std::norm(c[n]));
        return std::sqrt(m);
    }

    double max_coefficient() const {
        double m = 0.0;
        for (const auto& c : comp_)
            for (const auto& x : c) m = std::max(m, std::norm(x));
        return std::sqrt(m);
    }

    /// max_k |k·û(k)|
    double divergence_max() const {
        const auto& k = spectral_table(shape_).k;
        double m = 0.0;
        for (std::size_t n = 0; n < k.size(); ++n) {
            const cplx d = k[n][0] * comp_[0][n] + k[n][1] * comp_[1][n] + k[n][2] * comp_[2][n];
            m = std::max(m, std::norm(d));
        }
        return std::sqrt(m);
    }

    /// Applies I − k kᵀ/|k|² and zeroes the mean.
    void leray_project() {
        const SpectralTable& t = spectral_table(shape_);
        for (std::size_t n = 0; n < t.k.size(); ++n) {
            if (t.k2[n] == 0.0) {
                for (auto& c : comp_) c[n] = 0.0;
                continue;
            }
            const auto& k = t.k[n];
            const cplx d = (k[0] * comp_[0][n] + k[1] * comp_[1][n] + k[2] * comp_[2][n]) / t.k2[n];
            for (int c = 0; c < 3; ++c) comp_[c][n] -= k[c] * d;
        }
    }

    /// Physical values on the grid x_{ijl} = 2π (i/nx, j/ny, l/nz).
    PhysicalField to_physical() const {
        const auto& p = detail::plans_for(shape_);
        PhysicalField out;
        avector<cplx> scratch;
        for (int c = 0; c < 3; ++c) {
            scratch = comp_[c];
            out[c].assign(shape_.physical_size(), 0.0);
            p.backward(scratch.data(), out[c].data());
        }
        return out;
    }

    static GridField from_physical(const PhysicalField& f, const GridShape& s) {
        const auto& p = detail::plans_for(s);
        GridField g(s);
        avector<double> scratch;
        const double inv = 1.0 / double(s.physical_size());
        for (int c = 0; c < 3; ++c) {
            scratch = f[c];
            p.forward(scratch.data(), g.comp_[c].data());
            for (auto& x : g.comp_[c]) x *= inv;
        }
        return g;
    }

    /// Value at an arbitrary point by direct summation over stored coefficients.
    Vec3 eval(const Vec3& x) const {
        const SpectralTable& t = spectral_table(shape_);
        Vec3 acc;
        for (std::size_t n = 0; n < t.k.size(); ++n) {
            if (comp_[0][n] == 0.0 && comp_[1][n] == 0.0 && comp_[2][n] == 0.0) continue;
            const auto& k = t.k[n];
            const cplx e = std::polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            for (int c = 0; c < 3; ++c) acc[c] += t.weight[n] * (comp_[c][n] * e).real();
        }
        return acc;
    }

    friend bool operator==(const GridField&, const GridField&) = default;

private:
    GridShape shape_{};
    std::array<avector<cplx>, 3> comp_;
};

/// |k|² for every stored coefficient, in storage order.
inline std::vector<double> k2_table(const GridShape& s) { return spectral_table(s).k2; }

/// Exact injection of a mode field, frozen at time t, into spectral coefficients.
inline GridField sample(const ModeField& f, const GridShape& s, double t = 0.0) {
    GridField g(s);
    for (const auto& [key, c] : f.modes()) {
        const IVec3& k = key.k;
        if (!s.resolvable(k))
            throw ResolutionError("sample: mode (" + std::to_string(k[0]) + "," + std::to_string(k[1]) + "," +
                                  std::to_string(k[2]) + ") outside the resolvable band");
        const Vec3 a = c(t);
        // cos: ½a at ±k.  sin: −i½a at +k and +i½a at −k.
        const cplx wp = key.parity == Parity::cos ? cplx(0.5, 0.0) : cplx(0.0, -0.5);
        auto put = [&](const IVec3& q, cplx w) {
            if (q[2] < 0) return;
            const int i = int((q[0] % s.nx + s.nx) % s.nx);
            const int j = int((q[1] % s.ny + s.ny) % s.ny);
            const std::size_t n = s.spec_index(i, j, int(q[2]));
            for (int comp = 0; comp < 3; ++comp) g.component(comp)[n] += w * a[comp];
        };
        put(k, wp);
        put(-k, std::conj(wp));
    }
    return g;
}

/// Reads back a grid field as constant-coefficient cos/sin modes.
///
/// Coefficients with modulus ≤ `drop` are skipped; only the dealiased band is read.
inline ModeField to_mode_field(const GridField& g, double drop = 0.0) {
    const GridShape& s = g.shape();
    ModeField f;
    for (int i = 0; i < s.nx; ++i)
        for (int j = 0; j < s.ny; ++j)
            for (int l = 0; l < s.nzh(); ++l) {
                const auto kk = s.k_of(i, j, l);
                IVec3 k{kk[0], kk[1], kk[2]};
                if (is_zero(k) || !s.resolvable(k)) continue;
                // In the l = 0 plane both ±k are stored; above it only one of them.
                bool conj = false;
                if (!is_canonical(k)) {
                    if (l == 0) continue;
                    k = -k;
                    conj = true;
                }
                const std::size_t n = s.spec_index(i, j, l);
                Vec3 ac, as;
                bool any = false;
                for (int c = 0; c < 3; ++c) {
                    const cplx z = conj ? std::conj(g.component(c)[n]) : g.component(c)[n];
                    if (std::abs(z) > drop) any = true;
                    ac[c] = 2.0 * z.real();
                    as[c] = -2.0 * z.imag();
                }
                if (!any) continue;
                if (ac != Vec3{}) f.emplace_canonical({k, Parity::cos}, VecExpPoly::constant(ac));
                if (as != Vec3{}) f.emplace_canonical({k, Parity::sin}, VecExpPoly::constant(as));
            }
    return f;
}

/// max over grid nodes of |f(x)| (Euclidean norm of the vector).
inline double grid_sup_norm(const PhysicalField& p) {
    double m = 0.0;
    for (std::size_t n = 0; n < p[0].size(); ++n)
        m = std::max(m, std::sqrt(p[0][n] * p[0][n] + p[1][n] * p[1][n] + p[2][n] * p[2][n]));
    return m;
}

}  // namespace mhdinf

#pragma once

// Small value types shared by every module: real/integer 3-vectors and the
// exception hierarchy used for error reporting.

#include <array>
#include <cmath>
#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>

namespace mhdinf {

inline constexpr double pi = 3.14159265358979323846;

struct Vec3 {
    std::array<double, 3> v{0.0, 0.0, 0.0};

    constexpr Vec3() = default;
    constexpr Vec3(double x, double y, double z) : v{x, y, z} {}

    constexpr double& operator[](std::size_t i) { return v[i]; }
    constexpr double operator[](std::size_t i) const { return v[i]; }

    constexpr Vec3& operator+=(const Vec3& o) {
        for (std::size_t i = 0; i < 3; ++i) v[i] += o.v[i];
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        for (std::size_t i = 0; i < 3; ++i) v[i] -= o.v[i];
        return *this;
    }
    constexpr Vec3& operator*=(double s) {
        for (auto& x : v) x *= s;
        return *this;
    }
    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator-(Vec3 a) { return a *= -1.0; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm(double a) { return std::abs(a); }

/// Integer wave vector on the dual lattice of the 2π-periodic torus.
using IVec3 = std::array<std::int64_t, 3>;

inline Vec3 to_vec(const IVec3& k) {
    return {static_cast<double>(k[0]), static_cast<double>(k[1]), static_cast<double>(k[2])};
}
inline double dot(const IVec3& k, const Vec3& a) { return dot(to_vec(k), a); }
inline double norm2(const IVec3& k) {
    const Vec3 kv = to_vec(k);
    return dot(kv, kv);
}
inline IVec3 operator+(const IVec3& a, const IVec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline IVec3 operator-(const IVec3& a, const IVec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline IVec3 operator-(const IVec3& a) { return {-a[0], -a[1], -a[2]}; }
inline bool is_zero(const IVec3& k) { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

/// Base class of all errors thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ModeCapExceeded : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw PreconditionError(what);
}

}  // namespace mhdinf

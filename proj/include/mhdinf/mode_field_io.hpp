#pragma once

// JSON form of a ModeField:
//   {"modes":[{"k":[i,j,l],"parity":"cos"|"sin","a":[ax,ay,az],
//              "coeff":[{"c":..,"m":..,"lambda":..}, ...]}, ...],
//    "divergence_free": bool}
// The coefficient of an entry is a·Σ c t^m e^{-λt}.  Entries sharing a key are
// summed on read.  An infinite decay rate is written as the string "inf".
// Doubles are printed in shortest round-trip form, so write→read is bit-exact.

#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "mode_field.hpp"

namespace mhdinf {

namespace detail {

inline nlohmann::json lambda_to_json(double lambda) {
    if (std::isinf(lambda)) return "inf";
    return lambda;
}

inline double lambda_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw PreconditionError("ModeField JSON: bad lambda string");
    }
    return j.get<double>();
}

inline nlohmann::json vec_to_json(const Vec3& a) { return nlohmann::json::array({a[0], a[1], a[2]}); }

/// s with s·a == b bit for bit, if one exists.
inline bool exact_multiple(const Vec3& a, const Vec3& b, double& s) {
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (std::abs(a[i]) > std::abs(a[pivot])) pivot = i;
    if (a[pivot] == 0.0) return false;
    s = b[pivot] / a[pivot];
    return a * s == b;
}

}  // namespace detail

inline nlohmann::json to_json(const ModeField& f) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& [key, c] : f.modes()) {
        const auto& terms = c.terms();
        nlohmann::json base{{"k", {key.k[0], key.k[1], key.k[2]}}, {"parity", to_string(key.parity)}};
        const Vec3 a = terms.front().c;
        nlohmann::json coeff = nlohmann::json::array();
        bool shared = true;
        for (const auto& t : terms) {
            double s = 0.0;
            if (!detail::exact_multiple(a, t.c, s)) {
                shared = false;
                break;
            }
            coeff.push_back({{"c", s}, {"m", t.m}, {"lambda", detail::lambda_to_json(t.lambda)}});
        }
        if (shared) {
            base["a"] = detail::vec_to_json(a);
            base["coeff"] = std::move(coeff);
            modes.push_back(std::move(base));
            continue;
        }
        for (const auto& t : terms) {
            nlohmann::json e = base;
            e["a"] = detail::vec_to_json(t.c);
            e["coeff"] = nlohmann::json::array({{{"c", 1.0}, {"m", t.m}, {"lambda", detail::lambda_to_json(t.lambda)}}});
            modes.push_back(std::move(e));
        }
    }
    return {{"modes", std::move(modes)}, {"divergence_free", f.divergence_free()}};
}

inline ModeField mode_field_from_json(const nlohmann::json& j, ModeFieldOptions opts = {}) {
    std::map<ModeKey, VecExpPoly> raw;
    for (const auto& e : j.at("modes")) {
        const IVec3 k{e.at("k").at(0).get<std::int64_t>(), e.at("k").at(1).get<std::int64_t>(),
                      e.at("k").at(2).get<std::int64_t>()};
        const std::string ps = e.at("parity").get<std::string>();
        if (ps != "cos" && ps != "sin") throw PreconditionError("ModeField JSON: parity must be cos or sin");
        const Parity p = ps == "cos" ? Parity::cos : Parity::sin;
        if (is_zero(k)) throw PreconditionError("ModeField JSON: zero wave vector");
        const Vec3 a{e.at("a").at(0).get<double>(), e.at("a").at(1).get<double>(), e.at("a").at(2).get<double>()};
        auto [key, sign] = canonical_key(k, p);
        auto& slot = raw[key];
        for (const auto& t : e.at("coeff")) {
            const double c = t.at("c").get<double>();
            slot.push_raw(a * (c * sign), t.at("m").get<int>(), detail::lambda_from_json(t.at("lambda")));
        }
    }
    ModeField f(opts);
    for (auto& [key, c] : raw) {
        c.canonicalize(0.0);
        f.emplace_canonical(key, std::move(c));
    }
    f.set_divergence_free(j.value("divergence_free", false));
    return f;
}

}  // namespace mhdinf

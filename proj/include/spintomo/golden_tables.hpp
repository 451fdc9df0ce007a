#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "decay_models.hpp"
#include "wigner_symbols.hpp"

namespace spintomo {

enum class GoldenCase { d2_kappa, d3_Wplus, d3_Wminus, d4_projective, d3_Wmassive, d3_Z };

/// Closed-form Q and P symbols, in GGM basis order, together with the model they describe.
struct GoldenTable {
    std::string name;
    GoldenCase which;
    int dim = 0;
    MeasurementModel model;
    std::function<RVector(const Direction&)> q;
    std::function<RVector(const Direction&)> p;
};

namespace golden {

/// Projective d=3 symbols; sign = +1 for W+, -1 for W-.
inline RVector q_w(int sign, const Direction& n) {
    const double c = n.cos_theta, s = n.sin_theta(), ph = n.phi, c2 = 2.0 * c * c - 1.0;
    const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
    RVector q(8);
    q << s * (c + sign) * std::cos(ph) / r2, s * (c + sign) * std::sin(ph) / r2, (sign * 4.0 * c + 3.0 * c2 + 1.0) / 8.0,
        0.5 * s * s * std::cos(2.0 * ph), 0.5 * s * s * std::sin(2.0 * ph), s * (-c + sign) * std::cos(ph) / r2,
        s * (-c + sign) * std::sin(ph) / r2, (sign * 12.0 * c - 3.0 * c2 - 1.0) / (8.0 * r3);
    return q;
}

inline RVector p_w(int sign, const Direction& n) {
    const double c = n.cos_theta, s = n.sin_theta(), ph = n.phi, c2 = 2.0 * c * c - 1.0;
    const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
    RVector p(8);
    p << r2 * (5.0 * c + sign) * s * std::cos(ph), r2 * (5.0 * c + sign) * s * std::sin(ph),
        (sign * 4.0 * c + 15.0 * c2 + 5.0) / 4.0, 5.0 * s * s * std::cos(2.0 * ph), 5.0 * s * s * std::sin(2.0 * ph),
        r2 * (sign - 5.0 * c) * s * std::cos(ph), r2 * (sign - 5.0 * c) * s * std::sin(ph),
        (sign * 12.0 * c - 15.0 * c2 - 5.0) / (4.0 * r3);
    return p;
}

/// Q symbols of the m=0 projector, from completeness of the three projectors.
inline RVector q_w0(const Direction& n) { return -q_w(1, n) - q_w(-1, n); }

/// Mixing matrix relating the massive-lepton P symbols (scalar convention) to the projective W+ ones.
inline RMatrix heavy_lepton_matrix(double v) {
    const double a = 1.0 / (v + 1.0) + 1.0 / (2.0 * v);
    const double b = 1.0 / (v + 1.0) - 1.0 / (2.0 * v);
    const double e = std::sqrt(3.0) * (v - 1.0) / (4.0 * v * (v + 1.0));
    RMatrix m = RMatrix::Zero(8, 8);
    m(0, 0) = m(1, 1) = m(5, 5) = m(6, 6) = a;
    m(0, 5) = m(5, 0) = m(1, 6) = m(6, 1) = b;
    m(2, 2) = 1.0 / (2.0 * (v + 1.0)) + 3.0 / (4.0 * v);
    m(2, 7) = m(7, 2) = e;
    m(3, 3) = m(4, 4) = 1.0 / v;
    m(7, 7) = 3.0 / (2.0 * (v + 1.0)) + 1.0 / (4.0 * v);
    return m;
}

/// Mixing matrix relating the Z -> l+ l- P symbols to the projective W+ ones.
inline RMatrix z_matrix(double c_left, double c_right) {
    const double l = c_left * c_left, r = c_right * c_right;
    const double h = std::sqrt(3.0) / 2.0;
    RMatrix m = RMatrix::Zero(8, 8);
    m(0, 0) = m(1, 1) = m(5, 5) = m(6, 6) = r;
    m(0, 5) = m(5, 0) = m(1, 6) = m(6, 1) = l;
    m(2, 2) = r - 0.5 * l;
    m(2, 7) = m(7, 2) = h * l;
    m(3, 3) = m(4, 4) = r - l;
    m(7, 7) = 0.5 * l + r;
    return m / (r - l);
}

/// d=4 projector onto m=+3/2; basis order S12 S13 S14 S23 S24 S34, A12 .. A34, D1 D2 D3.
inline RVector q_d4(const Direction& n) {
    const double t = n.theta(), ph = n.phi;
    const double ch = std::cos(0.5 * t), sh = std::sin(0.5 * t), s = std::sin(t), c = n.cos_theta;
    const double r3 = std::sqrt(3.0);
    const double s12 = 2.0 * r3 * sh * std::pow(ch, 5), s13 = 2.0 * r3 * sh * sh * std::pow(ch, 4);
    const double s23 = 0.75 * s * s * s, s14 = 0.25 * s * s * s;
    const double s24 = 2.0 * r3 * std::pow(sh, 4) * ch * ch, s34 = 2.0 * r3 * std::pow(sh, 5) * ch;
    RVector q(15);
    q << s12 * std::cos(ph), s13 * std::cos(2 * ph), s14 * std::cos(3 * ph), s23 * std::cos(ph), s24 * std::cos(2 * ph),
        s34 * std::cos(ph), s12 * std::sin(ph), s13 * std::sin(2 * ph), s14 * std::sin(3 * ph), s23 * std::sin(ph),
        s24 * std::sin(2 * ph), s34 * std::sin(ph), std::pow(ch, 4) * (2.0 * c - 1.0),
        (6.0 * c + 3.0 * std::cos(2 * t) - 2.0 * std::cos(3 * t) + 1.0) / (8.0 * r3),
        (15.0 * c - 6.0 * std::cos(2 * t) + std::cos(3 * t) - 2.0) / (8.0 * std::sqrt(6.0));
    return q;
}

inline RVector p_d4(const Direction& n) {
    const double t = n.theta(), ph = n.phi;
    const double s = std::sin(t), c = n.cos_theta;
    const double r3 = std::sqrt(3.0);
    const double f12 = 5.0 * r3 / 16.0 * (3.0 * s + 4.0 * std::sin(2 * t) + 7.0 * std::sin(3 * t));
    const double f13 = 5.0 * r3 / 4.0 * s * s * (7.0 * c + 1.0);
    const double f23 = -5.0 / 16.0 * (s + 21.0 * std::sin(3 * t));
    const double f14 = 35.0 / 4.0 * s * s * s;
    const double f24 = 5.0 * r3 / 4.0 * s * s * (1.0 - 7.0 * c);
    const double f34 = 5.0 * r3 / 16.0 * (3.0 * s - 4.0 * std::sin(2 * t) + 7.0 * std::sin(3 * t));
    RVector p(15);
    p << f12 * std::cos(ph), f13 * std::cos(2 * ph), f14 * std::cos(3 * ph), f23 * std::cos(ph), f24 * std::cos(2 * ph),
        f34 * std::cos(ph), f12 * std::sin(ph), f13 * std::sin(2 * ph), f14 * std::sin(3 * ph), f23 * std::sin(ph),
        f24 * std::sin(2 * ph), f34 * std::sin(ph),
        5.0 / 8.0 * (5.0 * c + 3.0 * std::cos(2 * t) + 7.0 * std::cos(3 * t) + 1.0),
        -5.0 / (8.0 * r3) * (6.0 * c - 3.0 * std::cos(2 * t) + 14.0 * std::cos(3 * t) - 1.0),
        5.0 / (8.0 * std::sqrt(6.0)) * (9.0 * c - 6.0 * std::cos(2 * t) + 7.0 * std::cos(3 * t) - 2.0);
    return p;
}

}  // namespace golden

inline GoldenTable golden_spin_half(double kappa) {
    require(kappa != 0.0, "golden d2_kappa: kappa must be non-zero");
    auto dir = [](const Direction& n) {
        const double s = n.sin_theta();
        return RVector{{s * std::cos(n.phi), s * std::sin(n.phi), n.cos_theta}};
    };
    return {"d2_kappa", GoldenCase::d2_kappa, 2, model_spin_half(kappa),
            [=](const Direction& n) -> RVector { return kappa * dir(n); },
            [=](const Direction& n) -> RVector { return (3.0 / kappa) * dir(n); }};
}

inline GoldenTable golden_w(int charge) {
    return {charge > 0 ? "d3_Wplus" : "d3_Wminus", charge > 0 ? GoldenCase::d3_Wplus : GoldenCase::d3_Wminus, 3,
            model_W_massless(charge), [=](const Direction& n) { return golden::q_w(charge, n); },
            [=](const Direction& n) { return golden::p_w(charge, n); }};
}

inline GoldenTable golden_d4_projective() {
    auto m = model_projector(4, 0);
    return {"d4_projective", GoldenCase::d4_projective, 4, m, golden::q_d4, golden::p_d4};
}

inline GoldenTable golden_w_massive(double v, bool scalar_convention = false) {
    const auto model = model_W_massive(v, scalar_convention);
    const double scale = scalar_convention ? 1.0 : massive_w_norm_factor(v);
    const RMatrix a = golden::heavy_lepton_matrix(v);
    return {"d3_Wmassive", GoldenCase::d3_Wmassive, 3, model,
            [=](const Direction& n) -> RVector {
                return scale * (0.5 * (1.0 + v) * golden::q_w(1, n) + 0.25 * (1.0 - v) * golden::q_w0(n));
            },
            [=](const Direction& n) -> RVector { return (a * golden::p_w(1, n)) / scale; }};
}

inline GoldenTable golden_z(double c_left, double c_right) {
    const double l = c_left * c_left, r = c_right * c_right;
    require(l != r, "golden d3_Z: |cL| = |cR| has no P symbols");
    const RMatrix a = golden::z_matrix(c_left, c_right);
    return {"d3_Z", GoldenCase::d3_Z, 3, model_Z_dilepton(c_left, c_right),
            [=](const Direction& n) -> RVector { return (r * golden::q_w(1, n) + l * golden::q_w(-1, n)) / (r + l); },
            [=](const Direction& n) -> RVector { return a * golden::p_w(1, n); }};
}

/**
 * Parses "d2_kappa[:kappa=..]", "d3_Wplus", "d3_Wminus", "d4_projective",
 * "d3_Wmassive:v=..[,scalar=1]", "d3_Z[:cL=..,cR=..]" (defaults: kappa=1,
 * v=0.75, Standard Model couplings).
 */
inline GoldenTable golden_table(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string ctx = "golden case '" + spec + "'";
    auto kv = detail::parse_kv(colon == std::string::npos ? "" : spec.substr(colon + 1), ctx);
    auto opt = [&](const std::string& key, double def) {
        return kv.count(key) ? detail::take(kv, key, ctx) : def;
    };
    GoldenTable t;
    if (head == "d2_kappa") {
        t = golden_spin_half(opt("kappa", 1.0));
    } else if (head == "d3_Wplus") {
        t = golden_w(1);
    } else if (head == "d3_Wminus") {
        t = golden_w(-1);
    } else if (head == "d4_projective") {
        t = golden_d4_projective();
    } else if (head == "d3_Wmassive") {
        const double v = opt("v", 0.75);
        t = golden_w_massive(v, opt("scalar", 0.0) != 0.0);
    } else if (head == "d3_Z") {
        const auto sm = ZCouplings::standard_model_leptons();
        const double cl = opt("cL", sm.c_left);
        t = golden_z(cl, opt("cR", sm.c_right));
    } else {
        throw DomainError("unknown golden case '" + spec + "'");
    }
    detail::require_empty(kv, ctx);
    return t;
}

inline bool is_golden_case(const std::string& spec) {
    const std::string head = spec.substr(0, spec.find(':'));
    return head == "d2_kappa" || head == "d3_Wplus" || head == "d3_Wminus" || head == "d4_projective" ||
           head == "d3_Wmassive" || head == "d3_Z";
}

}  // namespace spintomo

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bloch_state.hpp"
#include "spin.hpp"

namespace spintomo {

/// tr(rho_A^2) and tr(rho_B^2) from the Bloch parameters.
inline std::pair<double, double> reduced_purities(const BlochState& s) {
    require(s.is_bipartite(), "reduced_purities: state must be bipartite");
    return {1.0 / s.dim1() + 2.0 * s.a.squaredNorm(), 1.0 / s.dim2() + 2.0 * s.b.squaredNorm()};
}

/// Mintert-Buchleitner bound C^2 >= 2 tr(rho^2) - tr(rho_A^2) - tr(rho_B^2), closed form.
inline double concurrence_bound(const BlochState& s) {
    require(s.is_bipartite(), "concurrence_bound: state must be bipartite");
    const auto [pa, pb] = reduced_purities(s);
    return 2.0 * purity(s) - pa - pb;
}

/// Same quantity evaluated from the density matrix and its partial traces.
inline double concurrence_bound_trace(const BlochState& s) {
    require(s.is_bipartite(), "concurrence_bound: state must be bipartite");
    const CMatrix rho = bloch_to_density(s);
    const CMatrix ra = partial_trace_second(rho, s.dim1(), s.dim2());
    const CMatrix rb = partial_trace_first(rho, s.dim1(), s.dim2());
    return 2.0 * (rho * rho).trace().real() - (ra * ra).trace().real() - (rb * rb).trace().real();
}

inline void require_qubit_pair(const BlochState& s, const char* what) {
    require(s.is_bipartite() && s.dim1() == 2 && s.dim2() == 2, std::string(what) + ": requires a 2x2 bipartite state");
}

inline void require_qutrit_pair(const BlochState& s, const char* what) {
    require(s.is_bipartite() && s.dim1() == 3 && s.dim2() == 3, std::string(what) + ": requires a 3x3 bipartite state");
}

struct WoottersResult {
    double concurrence = 0.0;
    std::array<double, 4> xi{};  ///< square roots of the eigenvalues of R, descending
    bool numerically_invalid = false;  ///< some eigenvalue of R below -1e-9
};

/// Wootters concurrence from R = rho (s2 x s2) rho* (s2 x s2).
inline WoottersResult wootters(const BlochState& s) {
    require_qubit_pair(s, "wootters_concurrence");
    const CMatrix rho = bloch_to_density(s);
    CMatrix sy(2, 2);
    sy << 0.0, cplx(0, -1), cplx(0, 1), 0.0;
    const CMatrix yy = kron(sy, sy);
    const CMatrix r = rho * yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<CMatrix> es(r, false);
    WoottersResult out;
    for (int i = 0; i < 4; ++i) {
        const double ev = es.eigenvalues()[i].real();
        if (ev < -1e-9) out.numerically_invalid = true;
        out.xi[static_cast<std::size_t>(i)] = std::sqrt(std::max(ev, 0.0));
    }
    std::sort(out.xi.begin(), out.xi.end(), std::greater<>());
    out.concurrence = std::max(0.0, out.xi[0] - out.xi[1] - out.xi[2] - out.xi[3]);
    return out;
}

inline double wootters_concurrence(const BlochState& s) { return wootters(s).concurrence; }

/// Maximal CHSH value 2 sqrt(m1 + m2) from the two largest eigenvalues of T^T T, T = 4c.
inline double chsh_max(const BlochState& s) {
    require_qubit_pair(s, "chsh_max");
    const RMatrix t = 4.0 * s.c;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(t.transpose() * t, Eigen::EigenvaluesOnly);
    const RVector m = es.eigenvalues();  // ascending
    return 2.0 * std::sqrt(std::max(0.0, m[2] + m[1]));
}

/// B = -(2/sqrt3)(Sx (x) Sx + Sy (x) Sy) + l4 (x) l4 + l5 (x) l5.
inline const CMatrix& cglmp_operator() {
    static const CMatrix b = [] {
        const auto s = spin_matrices(3);
        const auto& g = basis_for(3);
        return CMatrix(-(2.0 / std::sqrt(3.0)) * (kron(s.x, s.x) + kron(s.y, s.y)) + kron(g[3], g[3]) +
                       kron(g[4], g[4]));
    }();
    return b;
}

enum class CglmpPlane { xy, xz, yz };

inline std::pair<double, double> plane_angles(CglmpPlane p) {
    switch (p) {
        case CglmpPlane::xy: return {0.0, 0.0};
        case CglmpPlane::xz: return {pi / 2, 0.0};
        case CglmpPlane::yz: return {pi / 2, pi / 2};
    }
    return {0.0, 0.0};
}

/// tr(rho U^dagger (x) U^dagger B U (x) U) for the same rotation U(theta, phi) on both sides.
inline double cglmp_expectation(const CMatrix& rho, double theta, double phi) {
    const CMatrix u = rotation_for(3)(theta, phi);
    const CMatrix w = kron(u, u);
    return trace_product(w * rho * w.adjoint(), cglmp_operator()).real();
}

inline double cglmp_expectation(const BlochState& s, double theta, double phi) {
    require_qutrit_pair(s, "cglmp_expectation");
    return cglmp_expectation(bloch_to_density(s), theta, phi);
}

inline double cglmp_expectation(const BlochState& s, CglmpPlane plane) {
    const auto [t, p] = plane_angles(plane);
    return cglmp_expectation(s, t, p);
}

struct CglmpMax {
    double value = 0.0;
    double theta = 0.0;
    double phi = 0.0;
};

namespace detail {

/// Minimal Nelder-Mead minimizer over R^n.
template <class F>
std::pair<RVector, double> nelder_mead(F&& f, RVector x0, double step, double ftol, int max_iter) {
    const int n = static_cast<int>(x0.size());
    std::vector<RVector> x(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> fx(static_cast<std::size_t>(n + 1));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i + 1)][i] += step;
    for (std::size_t i = 0; i < x.size(); ++i) fx[i] = f(x[i]);
    std::vector<std::size_t> order(x.size());
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        if (std::abs(fx[worst] - fx[best]) < ftol) break;
        RVector centroid = RVector::Zero(n);
        for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += x[order[i]];
        centroid /= n;
        const RVector xr = centroid + (centroid - x[worst]);
        const double fr = f(xr);
        if (fr < fx[best]) {
            const RVector xe = centroid + 2.0 * (centroid - x[worst]);
            const double fe = f(xe);
            if (fe < fr) {
                x[worst] = xe;
                fx[worst] = fe;
            } else {
                x[worst] = xr;
                fx[worst] = fr;
            }
        } else if (fr < fx[second]) {
            x[worst] = xr;
            fx[worst] = fr;
        } else {
            const RVector xc = centroid + 0.5 * (x[worst] - centroid);
            const double fc = f(xc);
            if (fc < fx[worst]) {
                x[worst] = xc;
                fx[worst] = fc;
            } else {
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (i == best) continue;
                    x[i] = x[best] + 0.5 * (x[i] - x[best]);
                    fx[i] = f(x[i]);
                }
            }
        }
    }
    const auto it = std::min_element(fx.begin(), fx.end());
    return {x[static_cast<std::size_t>(it - fx.begin())], *it};
}

inline double wrap_phi(double phi) {
    double p = std::fmod(phi, two_pi);
    if (p < 0.0) p += two_pi;
    return p;
}

}  // namespace detail

/**
 * Maximum of the same-rotation CGLMP expectation: a 64 x 128 grid over
 * theta in [0, pi], phi in [0, 2 pi), then Nelder-Mead from the best grid
 * point. Ties (within 1e-12) resolve to the smallest (theta, phi).
 */
inline CglmpMax cglmp_max(const BlochState& s) {
    require_qutrit_pair(s, "cglmp_max");
    const CMatrix rho = bloch_to_density(s);
    constexpr int nt = 64, np = 128;
    constexpr double tie = 1e-12;
    CglmpMax best{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (int i = 0; i < nt; ++i) {
        const double t = pi * i / (nt - 1);
        for (int k = 0; k < np; ++k) {
            const double p = two_pi * k / np;
            const double v = cglmp_expectation(rho, t, p);
            if (v > best.value + tie) best = {v, t, p};
        }
    }
    auto objective = [&](const RVector& x) {
        return -cglmp_expectation(rho, std::clamp(x[0], 0.0, pi), detail::wrap_phi(x[1]));
    };
    const auto [x, fx] = detail::nelder_mead(objective, RVector{{best.theta, best.phi}}, pi / (nt - 1), 1e-13, 2000);
    if (-fx > best.value + tie) best = {-fx, std::clamp(x[0], 0.0, pi), detail::wrap_phi(x[1])};
    return best;
}

struct CglmpMaxIndependent {
    double value = 0.0;
    std::array<double, 4> angles{};  ///< theta_A, phi_A, theta_B, phi_B
};

/// Maximum over independent rotations U(theta_A, phi_A) (x) U(theta_B, phi_B).
inline CglmpMaxIndependent cglmp_max_independent(const BlochState& s) {
    require_qutrit_pair(s, "cglmp_max_independent");
    const CMatrix rho = bloch_to_density(s);
    const auto& rot = rotation_for(3);
    auto eval = [&](double ta, double pa, double tb, double pb) {
        const CMatrix w = kron(rot(ta, pa), rot(tb, pb));
        return trace_product(w * rho * w.adjoint(), cglmp_operator()).real();
    };
    constexpr int nt = 9, np = 16;
    std::vector<std::pair<double, double>> g;
    for (int i = 0; i < nt; ++i)
        for (int k = 0; k < np; ++k) g.emplace_back(pi * i / (nt - 1), two_pi * k / np);
    CglmpMaxIndependent best{-std::numeric_limits<double>::infinity(), {}};
    for (const auto& [ta, pa] : g)
        for (const auto& [tb, pb] : g) {
            const double v = eval(ta, pa, tb, pb);
            if (v > best.value + 1e-12) best = {v, {ta, pa, tb, pb}};
        }
    auto objective = [&](const RVector& x) {
        return -eval(std::clamp(x[0], 0.0, pi), x[1], std::clamp(x[2], 0.0, pi), x[3]);
    };
    const RVector x0{{best.angles[0], best.angles[1], best.angles[2], best.angles[3]}};
    const auto [x, fx] = detail::nelder_mead(objective, x0, pi / (nt - 1), 1e-13, 4000);
    if (-fx > best.value + 1e-12)
        best = {-fx,
                {std::clamp(x[0], 0.0, pi), detail::wrap_phi(x[1]), std::clamp(x[2], 0.0, pi), detail::wrap_phi(x[3])}};
    return best;
}

struct ObservableReport {
    std::vector<int> dims;
    double purity = 0.0;
    double purity_direct = 0.0;
    std::optional<double> purity_a, purity_b;
    std::optional<double> concurrence_bound;
    std::optional<double> concurrence_bound_trace;
    std::optional<double> wootters_concurrence;
    std::optional<bool> wootters_warning;
    std::optional<double> chsh_max;
    std::optional<double> cglmp_xy, cglmp_xz, cglmp_yz;
    std::optional<CglmpMax> cglmp_max;
    std::optional<CglmpMaxIndependent> cglmp_max_independent;
    RVector eigenvalues;
    bool valid = false;
    std::vector<std::string> reasons;
    /// Equal-dimension pairs only: a = b and c = c^T within 1e-12.
    std::optional<bool> exchange_symmetric;
    std::optional<double> exchange_asymmetry;
};

struct ReportOptions {
    bool cglmp = true;
    bool cglmp_independent = false;
};

inline ObservableReport diagnostics(const BlochState& s, const ReportOptions& opt = {}) {
    s.check();
    ObservableReport r;
    r.dims = s.dims;
    const CMatrix rho = bloch_to_density(s);
    r.purity = purity(s);
    r.purity_direct = (rho * rho).trace().real();
    const auto v = check_validity(s);
    r.eigenvalues = v.eigenvalues;
    r.valid = v.valid;
    r.reasons = v.reasons;
    if (!s.is_bipartite()) return r;
    std::tie(r.purity_a, r.purity_b) = reduced_purities(s);
    r.concurrence_bound = concurrence_bound(s);
    r.concurrence_bound_trace = concurrence_bound_trace(s);
    if (s.dim1() == s.dim2()) {
        const double asym = std::max((s.a - s.b).cwiseAbs().maxCoeff(), (s.c - s.c.transpose()).cwiseAbs().maxCoeff());
        r.exchange_asymmetry = asym;
        r.exchange_symmetric = asym <= 1e-12;
    }
    if (s.dim1() == 2 && s.dim2() == 2) {
        const auto w = wootters(s);
        r.wootters_concurrence = w.concurrence;
        r.wootters_warning = w.numerically_invalid;
        r.chsh_max = chsh_max(s);
    }
    if (s.dim1() == 3 && s.dim2() == 3 && opt.cglmp) {
        r.cglmp_xy = cglmp_expectation(s, CglmpPlane::xy);
        r.cglmp_xz = cglmp_expectation(s, CglmpPlane::xz);
        r.cglmp_yz = cglmp_expectation(s, CglmpPlane::yz);
        r.cglmp_max = cglmp_max(s);
        if (opt.cglmp_independent) r.cglmp_max_independent = cglmp_max_independent(s);
    }
    return r;
}

}  // namespace spintomo

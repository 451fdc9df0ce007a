#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "bloch_state.hpp"

namespace spintomo {

/// Direction of a daughter in its parent's rest frame, stored as (cos theta, phi).
struct Direction {
    double cos_theta = 1.0;
    double phi = 0.0;

    static Direction from_angles(double theta, double phi) { return {std::cos(theta), phi}; }

    double theta() const { return std::acos(std::clamp(cos_theta, -1.0, 1.0)); }
    double sin_theta() const { return std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta)); }

    /// The direction -n: theta -> pi - theta, phi -> phi + pi (wrapped to [0, 2pi)).
    Direction opposite() const {
        double p = phi + pi;
        if (p >= two_pi) p -= two_pi;
        return {-cos_theta, p};
    }
};

/// S_x, S_y, S_z for spin j = (d-1)/2 in the basis m = j, j-1, ..., -j.
struct SpinMatrices {
    CMatrix x, y, z;
};

inline SpinMatrices spin_matrices(int d) {
    require(d >= 2, "spin_matrices: dimension must be >= 2");
    const double j = (d - 1) / 2.0;
    CMatrix raise = CMatrix::Zero(d, d);
    CMatrix z = CMatrix::Zero(d, d);
    for (int r = 0; r < d; ++r) z(r, r) = j - r;
    for (int r = 1; r < d; ++r) {
        const double m = j - r;
        raise(r - 1, r) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    const CMatrix lower = raise.adjoint();
    return {(raise + lower) / 2.0, (raise - lower) / cplx(0.0, 2.0), z};
}

/**
 * Wigner rotation U(theta, phi) = exp(-i S_z phi) exp(-i S_y theta), built
 * from the closed-form small-d matrix. Coefficients are precomputed per
 * dimension; evaluation only needs cos(theta/2), sin(theta/2) powers.
 */
class WignerRotation {
public:
    explicit WignerRotation(int d) : dim_(d) {
        require(d >= 2 && d <= max_dim, "WignerRotation: dimension out of range");
        const int twoj = d - 1;
        // Indices use n = j + m in 0..2j; row r of the matrix has m = j - r.
        std::vector<double> fact(static_cast<std::size_t>(2 * twoj + 2), 1.0);
        for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
        offsets_.push_back(0);
        for (int r = 0; r < d; ++r) {
            for (int col = 0; col < d; ++col) {
                // m' = j - r (row), m = j - col (column), in units of 1/2 via jp = j+m'
                const int jp_plus = twoj - r;   // j + m'
                const int jp_minus = r;         // j - m'
                const int j_plus = twoj - col;  // j + m
                const int j_minus = col;        // j - m
                const int mdiff = col - r;      // m' - m
                const double pref = std::sqrt(fact[jp_plus] * fact[jp_minus] * fact[j_plus] * fact[j_minus]);
                for (int s = 0; s <= twoj; ++s) {
                    const int a = j_plus - s, b = mdiff + s, c = jp_minus - s;
                    if (a < 0 || b < 0 || c < 0) continue;
                    const double sign = ((mdiff + s) % 2 == 0) ? 1.0 : -1.0;
                    const double coeff = sign * pref / (fact[a] * fact[s] * fact[b] * fact[c]);
                    terms_.push_back({coeff, twoj - mdiff - 2 * s, mdiff + 2 * s});
                }
                offsets_.push_back(terms_.size());
            }
        }
    }

    int dim() const noexcept { return dim_; }

    /// Small-d matrix d_{m'm}(theta) with cos(theta/2), sin(theta/2) supplied.
    template <class M>
    void small_d(double ch, double sh, M& out) const {
        std::array<double, 2 * max_dim> cp{}, sp{};
        cp[0] = sp[0] = 1.0;
        for (int i = 1; i < 2 * dim_; ++i) {
            cp[i] = cp[i - 1] * ch;
            sp[i] = sp[i - 1] * sh;
        }
        out.resize(dim_, dim_);
        std::size_t cell = 0;
        for (int r = 0; r < dim_; ++r)
            for (int col = 0; col < dim_; ++col, ++cell) {
                double v = 0.0;
                for (std::size_t t = offsets_[cell]; t < offsets_[cell + 1]; ++t)
                    v += terms_[t].coeff * cp[terms_[t].cos_power] * sp[terms_[t].sin_power];
                out(r, col) = v;
            }
    }

    RMatrix small_d(const Direction& n) const {
        RMatrix out;
        const auto [ch, sh] = half_angles(n.cos_theta);
        small_d(ch, sh, out);
        return out;
    }

    CMatrix operator()(const Direction& n) const {
        const RMatrix dm = small_d(n);
        CMatrix u(dim_, dim_);
        const double j = (dim_ - 1) / 2.0;
        for (int r = 0; r < dim_; ++r) {
            const cplx phase = std::polar(1.0, -(j - r) * n.phi);
            for (int col = 0; col < dim_; ++col) u(r, col) = phase * dm(r, col);
        }
        return u;
    }

    CMatrix operator()(double theta, double phi) const { return (*this)(Direction::from_angles(theta, phi)); }

    /// U diag(f) U^dagger for a real diagonal f.
    CMatrix rotate_diagonal(const RVector& f, const Direction& n) const {
        const CMatrix u = (*this)(n);
        return u * f.cast<cplx>().asDiagonal() * u.adjoint();
    }

    static std::pair<double, double> half_angles(double cos_theta) {
        const double c = std::clamp(cos_theta, -1.0, 1.0);
        return {std::sqrt(0.5 * (1.0 + c)), std::sqrt(0.5 * (1.0 - c))};
    }

private:
    struct Term {
        double coeff;
        int cos_power;
        int sin_power;
    };
    int dim_;
    std::vector<Term> terms_;
    std::vector<std::size_t> offsets_;
};

/// Shared rotation tables for 2 <= d <= max_dim.
inline const WignerRotation& rotation_for(int d) {
    require(d >= 2 && d <= max_dim, "rotation_for: dimension out of range");
    static const std::array<WignerRotation, max_dim - 1> cache = [] {
        return [&]<std::size_t... I>(std::index_sequence<I...>) {
            return std::array<WignerRotation, max_dim - 1>{WignerRotation(static_cast<int>(I) + 2)...};
        }(std::make_index_sequence<max_dim - 1>{});
    }();
    return cache[static_cast<std::size_t>(d - 2)];
}

/// Spin-1 operators and their symmetric products S_{ij} = S_i S_j + S_j S_i.
struct SpinOperatorSet {
    CMatrix sx, sy, sz;
    CMatrix sxy, sxz, syz, sxx, syy, szz;

    /// In the order Sx, Sy, Sz, Sxy, Sxz, Syz, Sxx, Syy, Szz.
    std::array<const CMatrix*, 9> all() const { return {&sx, &sy, &sz, &sxy, &sxz, &syz, &sxx, &syy, &szz}; }
};

inline SpinOperatorSet spin_one_operators() {
    const auto s = spin_matrices(3);
    auto anti = [](const CMatrix& p, const CMatrix& q) -> CMatrix { return p * q + q * p; };
    return {s.x, s.y, s.z, anti(s.x, s.y), anti(s.x, s.z), anti(s.y, s.z),
            anti(s.x, s.x), anti(s.y, s.y), anti(s.z, s.z)};
}

inline constexpr std::array<const char*, 9> spin_one_operator_names = {"Sx",  "Sy",  "Sz",  "Sxy", "Sxz",
                                                                      "Syz", "Sxx", "Syy", "Szz"};

/**
 * Expansion of the nine spin-1 operators in (lambda_0, lambda_1..lambda_8).
 * Row order follows spin_one_operator_names.
 */
inline RMatrix spin_one_ggm_coefficients() {
    const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0), r83 = std::sqrt(8.0 / 3.0);
    RMatrix w = RMatrix::Zero(9, 9);
    // Sx = (l1 + l6)/sqrt2, Sy = (l2 + l7)/sqrt2, Sz = (l3 + sqrt3 l8)/2
    w(0, 1) = w(0, 6) = 1.0 / r2;
    w(1, 2) = w(1, 7) = 1.0 / r2;
    w(2, 3) = 0.5;
    w(2, 8) = r3 / 2.0;
    // Sxy = l5, Sxz = (l1 - l6)/sqrt2, Syz = (l2 - l7)/sqrt2
    w(3, 5) = 1.0;
    w(4, 1) = 1.0 / r2;
    w(4, 6) = -1.0 / r2;
    w(5, 2) = 1.0 / r2;
    w(5, 7) = -1.0 / r2;
    // Sxx, Syy, Szz
    w(6, 0) = r83;
    w(6, 3) = -0.5;
    w(6, 4) = 1.0;
    w(6, 8) = 1.0 / (2.0 * r3);
    w(7, 0) = r83;
    w(7, 3) = -0.5;
    w(7, 4) = -1.0;
    w(7, 8) = 1.0 / (2.0 * r3);
    w(8, 0) = r83;
    w(8, 3) = 1.0;
    w(8, 8) = -1.0 / r3;
    return w;
}

/// Expectation values of Sx, Sy, Sz, Sxy, Sxz, Syz, Sxx, Syy, Szz for a spin-1 state.
inline std::array<double, 9> spin_expectations(const BlochState& s) {
    require(!s.is_bipartite() && s.dim1() == 3, "spin_expectations: requires a single-particle d=3 state");
    const auto& a = s.a;
    const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
    // a is 0-based: a[0] = a_1.
    return {r2 * (a[0] + a[5]),
            r2 * (a[1] + a[6]),
            a[2] + r3 * a[7],
            2.0 * a[4],
            r2 * (a[0] - a[5]),
            r2 * (a[1] - a[6]),
            -a[2] + 2.0 * a[3] + a[7] / r3 + 4.0 / 3.0,
            -a[2] - 2.0 * a[3] + a[7] / r3 + 4.0 / 3.0,
            2.0 * a[2] - 2.0 * a[7] / r3 + 4.0 / 3.0};
}

/**
 * Correlated expectations <O_alpha (x) O_beta> for a 3x3 bipartite state,
 * alpha, beta over the nine spin-1 operators, computed through the GGM map:
 * <l_0 (x) l_0> = 2/3, <l_i (x) l_0> = 2 sqrt(2/3) a_i, <l_i (x) l_j> = 4 c_ij.
 */
inline RMatrix spin_correlations(const BlochState& s) {
    require(s.is_bipartite() && s.dim1() == 3 && s.dim2() == 3, "spin_correlations: requires a 3x3 bipartite state");
    RMatrix g(9, 9);  // <l_i (x) l_j> for i, j in 0..8 including lambda_0
    const double l0 = std::sqrt(2.0 / 3.0);
    g(0, 0) = 2.0 / 3.0;
    for (int i = 1; i < 9; ++i) {
        g(i, 0) = 2.0 * s.a[i - 1] * l0;
        g(0, i) = 2.0 * s.b[i - 1] * l0;
        for (int j = 1; j < 9; ++j) g(i, j) = 4.0 * s.c(i - 1, j - 1);
    }
    const RMatrix w = spin_one_ggm_coefficients();
    return w * g * w.transpose();
}

}  // namespace spintomo

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ggm_basis.hpp"

namespace spintomo {

/**
 * Generalized Bloch parameters of a single-particle ([d1]) or bipartite
 * ([d1, d2]) density matrix:
 *
 *   rho = I/d + sum a_i l_i (x) I/d2 + sum b_j I/d1 (x) l_j + sum c_ij l_i (x) l_j
 *
 * For a single particle only `a` is used.
 */
struct BlochState {
    std::vector<int> dims;
    RVector a;
    RVector b;
    RMatrix c;

    static BlochState single(int d, RVector a) {
        BlochState s{{d}, std::move(a), RVector(), RMatrix()};
        s.check();
        return s;
    }

    static BlochState single(int d) { return single(d, RVector::Zero(d * d - 1)); }

    static BlochState bipartite(int d1, int d2, RVector a, RVector b, RMatrix c) {
        BlochState s{{d1, d2}, std::move(a), std::move(b), std::move(c)};
        s.check();
        return s;
    }

    static BlochState bipartite(int d1, int d2) {
        return bipartite(d1, d2, RVector::Zero(d1 * d1 - 1), RVector::Zero(d2 * d2 - 1),
                         RMatrix::Zero(d1 * d1 - 1, d2 * d2 - 1));
    }

    bool is_bipartite() const noexcept { return dims.size() == 2; }
    int dim1() const { return dims.at(0); }
    int dim2() const { return dims.at(1); }
    /// Total Hilbert-space dimension.
    int total_dim() const {
        int d = 1;
        for (int x : dims) d *= x;
        return d;
    }

    /// Throws DomainError if dims and vector lengths disagree.
    void check() const {
        require(dims.size() == 1 || dims.size() == 2, "BlochState: dims must have one or two entries");
        for (int d : dims)
            require(d >= 2 && d <= max_dim, "BlochState: subsystem dimension out of range: " + std::to_string(d));
        const auto n1 = static_cast<Eigen::Index>(dims[0] * dims[0] - 1);
        require(a.size() == n1, "BlochState: a has length " + std::to_string(a.size()) + ", expected " +
                                    std::to_string(n1));
        if (dims.size() == 2) {
            const auto n2 = static_cast<Eigen::Index>(dims[1] * dims[1] - 1);
            require(b.size() == n2, "BlochState: b has length " + std::to_string(b.size()) + ", expected " +
                                        std::to_string(n2));
            require(c.rows() == n1 && c.cols() == n2, "BlochState: c has shape " + std::to_string(c.rows()) + "x" +
                                                          std::to_string(c.cols()) + ", expected " +
                                                          std::to_string(n1) + "x" + std::to_string(n2));
        } else {
            require(b.size() == 0 && c.size() == 0, "BlochState: single-particle state carries b or c");
        }
    }

    bool operator==(const BlochState&) const = default;
};

/// Density matrix reconstructed from the Bloch parameters. Hermitian with unit trace by construction.
inline CMatrix bloch_to_density(const BlochState& s) {
    s.check();
    const int d1 = s.dim1();
    const GgmBasis& b1 = basis_for(d1);
    if (!s.is_bipartite()) {
        CMatrix rho = CMatrix::Identity(d1, d1) / static_cast<double>(d1);
        for (int i = 0; i < b1.size(); ++i) rho += s.a[i] * b1[i];
        return rho;
    }
    const int d2 = s.dim2();
    const GgmBasis& b2 = basis_for(d2);
    const CMatrix id1 = CMatrix::Identity(d1, d1);
    const CMatrix id2 = CMatrix::Identity(d2, d2);
    CMatrix local1 = CMatrix::Zero(d1, d1);
    for (int i = 0; i < b1.size(); ++i) local1 += s.a[i] * b1[i];
    CMatrix local2 = CMatrix::Zero(d2, d2);
    for (int j = 0; j < b2.size(); ++j) local2 += s.b[j] * b2[j];
    CMatrix rho = CMatrix::Identity(d1 * d2, d1 * d2) / static_cast<double>(d1 * d2);
    rho += kron(local1, id2 / static_cast<double>(d2));
    rho += kron(id1 / static_cast<double>(d1), local2);
    for (int i = 0; i < b1.size(); ++i) {
        CMatrix row = CMatrix::Zero(d2, d2);
        for (int j = 0; j < b2.size(); ++j) row += s.c(i, j) * b2[j];
        rho += kron(b1[i], row);
    }
    return rho;
}

/// Inverse of bloch_to_density. `dims` is [d] or [d1, d2]; rho must be Hermitian with unit trace.
inline BlochState density_to_bloch(const CMatrix& rho, const std::vector<int>& dims) {
    require(dims.size() == 1 || dims.size() == 2, "density_to_bloch: dims must have one or two entries");
    int total = 1;
    for (int d : dims) total *= d;
    require(rho.rows() == total && rho.cols() == total, "density_to_bloch: matrix size does not match dims");
    require(is_hermitian(rho), "density_to_bloch: matrix is not Hermitian");
    require(std::abs(rho.trace() - 1.0) < 1e-9, "density_to_bloch: trace is not 1");
    const GgmBasis& b1 = basis_for(dims[0]);
    if (dims.size() == 1) {
        RVector a(b1.size());
        for (int i = 0; i < b1.size(); ++i) a[i] = 0.5 * std::real(trace_product(b1[i], rho));
        return BlochState::single(dims[0], std::move(a));
    }
    const int d1 = dims[0], d2 = dims[1];
    const GgmBasis& b2 = basis_for(d2);
    const CMatrix id1 = CMatrix::Identity(d1, d1);
    const CMatrix id2 = CMatrix::Identity(d2, d2);
    RVector a(b1.size()), b(b2.size());
    RMatrix c(b1.size(), b2.size());
    for (int i = 0; i < b1.size(); ++i) a[i] = 0.5 * std::real(trace_product(kron(b1[i], id2), rho));
    for (int j = 0; j < b2.size(); ++j) b[j] = 0.5 * std::real(trace_product(kron(id1, b2[j]), rho));
    for (int i = 0; i < b1.size(); ++i)
        for (int j = 0; j < b2.size(); ++j) c(i, j) = 0.25 * std::real(trace_product(kron(b1[i], b2[j]), rho));
    return BlochState::bipartite(d1, d2, std::move(a), std::move(b), std::move(c));
}

/// Partial trace over the second subsystem of a d1*d2 matrix.
inline CMatrix partial_trace_second(const CMatrix& rho, int d1, int d2) {
    CMatrix out = CMatrix::Zero(d1, d1);
    for (int i = 0; i < d1; ++i)
        for (int j = 0; j < d1; ++j)
            for (int k = 0; k < d2; ++k) out(i, j) += rho(i * d2 + k, j * d2 + k);
    return out;
}

/// Partial trace over the first subsystem of a d1*d2 matrix.
inline CMatrix partial_trace_first(const CMatrix& rho, int d1, int d2) {
    CMatrix out = CMatrix::Zero(d2, d2);
    for (int i = 0; i < d2; ++i)
        for (int j = 0; j < d2; ++j)
            for (int k = 0; k < d1; ++k) out(i, j) += rho(k * d2 + i, k * d2 + j);
    return out;
}

/// Reduced single-particle state of subsystem 1 or 2.
inline BlochState reduced_state(const BlochState& s, int which) {
    require(s.is_bipartite(), "reduced_state: state is not bipartite");
    require(which == 1 || which == 2, "reduced_state: subsystem must be 1 or 2");
    return which == 1 ? BlochState::single(s.dim1(), s.a) : BlochState::single(s.dim2(), s.b);
}

/// tr(rho^2) from the Bloch parameters.
inline double purity(const BlochState& s) {
    s.check();
    if (!s.is_bipartite()) return 1.0 / s.dim1() + 2.0 * s.a.squaredNorm();
    const double d1 = s.dim1(), d2 = s.dim2();
    return 1.0 / (d1 * d2) + 2.0 / d2 * s.a.squaredNorm() + 2.0 / d1 * s.b.squaredNorm() + 4.0 * s.c.squaredNorm();
}

/// Ascending eigenvalues of a Hermitian matrix.
inline RVector hermitian_eigenvalues(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

struct Validity {
    bool valid = true;
    RVector eigenvalues;
    double purity = 0.0;
    std::vector<std::string> reasons;
};

/**
 * Physical validity of the reconstructed matrix: every eigenvalue in [0, 1]
 * and tr(rho^2) <= 1, each to within 1e-9. Slightly negative eigenvalues are
 * reported, not clipped.
 */
inline Validity check_validity(const BlochState& s) {
    Validity v;
    const CMatrix rho = bloch_to_density(s);
    v.eigenvalues = hermitian_eigenvalues(rho);
    v.purity = std::real(trace_product(rho, rho));
    const double tol = -eigenvalue_tol;
    for (Eigen::Index i = 0; i < v.eigenvalues.size(); ++i) {
        const double e = v.eigenvalues[i];
        if (e < -tol) v.reasons.push_back("negative eigenvalue " + std::to_string(e));
        if (e > 1.0 + tol) v.reasons.push_back("eigenvalue above 1: " + std::to_string(e));
    }
    if (v.purity > 1.0 + tol) v.reasons.push_back("tr(rho^2) = " + std::to_string(v.purity) + " exceeds 1");
    v.valid = v.reasons.empty();
    return v;
}

inline bool is_valid(const BlochState& s) { return check_validity(s).valid; }

/// Bipartite state rho_A (x) rho_B.
inline BlochState product_state(const BlochState& s1, const BlochState& s2) {
    require(!s1.is_bipartite() && !s2.is_bipartite(), "product_state: inputs must be single-particle states");
    return BlochState::bipartite(s1.dim1(), s2.dim1(), s1.a, s2.a, s1.a * s2.a.transpose());
}

/// Convex mixture w*s1 + (1-w)*s2 of two states with the same dims.
inline BlochState mix(const BlochState& s1, const BlochState& s2, double w) {
    require(s1.dims == s2.dims, "mix: states have different dims");
    BlochState out = s1;
    out.a = w * s1.a + (1.0 - w) * s2.a;
    if (s1.is_bipartite()) {
        out.b = w * s1.b + (1.0 - w) * s2.b;
        out.c = w * s1.c + (1.0 - w) * s2.c;
    }
    return out;
}

}  // namespace spintomo

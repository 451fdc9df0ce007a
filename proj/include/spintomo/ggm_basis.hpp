#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace spintomo {

/// Structural label of one generalized Gell-Mann generator. Indices are 0-based.
struct GeneratorLabel {
    enum class Kind { symmetric, antisymmetric, diagonal };
    Kind kind;
    int j = 0;  ///< row index (symmetric/antisymmetric), or l for diagonal
    int k = 0;  ///< column index, unused for diagonal

    /// 1-based name as written in the literature, e.g. "S12", "A23", "D1".
    std::string name() const {
        switch (kind) {
            case Kind::symmetric: return "S" + std::to_string(j + 1) + std::to_string(k + 1);
            case Kind::antisymmetric: return "A" + std::to_string(j + 1) + std::to_string(k + 1);
            case Kind::diagonal: return "D" + std::to_string(j);
        }
        return {};
    }
};

/**
 * The d^2-1 traceless Hermitian generators of SU(d), normalised so that
 * tr(l_i l_j) = 2 delta_ij, plus lambda_0 = sqrt(2/d) I.
 *
 * Ordering: d=2 gives the Pauli matrices, d=3 the conventional Gell-Mann
 * matrices. For d >= 4 the symmetric block comes first (lexicographic in
 * (j,k)), then the antisymmetric block, then the diagonal block by l.
 */
class GgmBasis {
public:
    explicit GgmBasis(int d) : dim_(d) {
        require(d >= 2, "GgmBasis: dimension must be >= 2, got " + std::to_string(d));
        using K = GeneratorLabel::Kind;
        if (d == 2) {
            labels_ = {{K::symmetric, 0, 1}, {K::antisymmetric, 0, 1}, {K::diagonal, 1, 0}};
        } else if (d == 3) {
            labels_ = {{K::symmetric, 0, 1},     {K::antisymmetric, 0, 1}, {K::diagonal, 1, 0},
                       {K::symmetric, 0, 2},     {K::antisymmetric, 0, 2}, {K::symmetric, 1, 2},
                       {K::antisymmetric, 1, 2}, {K::diagonal, 2, 0}};
        } else {
            for (int j = 0; j < d; ++j)
                for (int k = j + 1; k < d; ++k) labels_.push_back({K::symmetric, j, k});
            for (int j = 0; j < d; ++j)
                for (int k = j + 1; k < d; ++k) labels_.push_back({K::antisymmetric, j, k});
            for (int l = 1; l < d; ++l) labels_.push_back({K::diagonal, l, 0});
        }
        diag_norm_.assign(static_cast<std::size_t>(d), 0.0);
        for (int l = 1; l < d; ++l) diag_norm_[static_cast<std::size_t>(l)] = std::sqrt(2.0 / (l * (l + 1.0)));
        generators_.reserve(labels_.size());
        for (const auto& lab : labels_) generators_.push_back(make_generator(lab));
        lambda0_ = std::sqrt(2.0 / d) * CMatrix::Identity(d, d);
    }

    int dim() const noexcept { return dim_; }
    /// Number of traceless generators, d^2 - 1.
    int size() const noexcept { return static_cast<int>(generators_.size()); }

    const CMatrix& operator[](int i) const { return generators_.at(static_cast<std::size_t>(i)); }
    const std::vector<CMatrix>& generators() const noexcept { return generators_; }
    const std::vector<GeneratorLabel>& labels() const noexcept { return labels_; }
    const CMatrix& lambda0() const noexcept { return lambda0_; }

    /// Generator with index 0..d^2-1 where index 0 is lambda_0.
    const CMatrix& extended(int i) const { return i == 0 ? lambda0_ : (*this)[i - 1]; }

    /// Index of the generator with the given label, or -1.
    int index_of(const GeneratorLabel& lab) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i].kind == lab.kind && labels_[i].j == lab.j && labels_[i].k == lab.k)
                return static_cast<int>(i);
        return -1;
    }

    /// Re tr(lambda_i X) for every generator, using the sparsity of each generator.
    template <class Derived>
    void traces(const Eigen::MatrixBase<Derived>& x, double* out) const {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            const auto& lab = labels_[i];
            switch (lab.kind) {
                case GeneratorLabel::Kind::symmetric:
                    out[i] = std::real(x(lab.j, lab.k)) + std::real(x(lab.k, lab.j));
                    break;
                case GeneratorLabel::Kind::antisymmetric:
                    out[i] = std::imag(x(lab.k, lab.j)) - std::imag(x(lab.j, lab.k));
                    break;
                case GeneratorLabel::Kind::diagonal: {
                    const int l = lab.j;
                    double s = 0.0;
                    for (int m = 0; m < l; ++m) s += std::real(x(m, m));
                    s -= l * std::real(x(l, l));
                    out[i] = s * diag_norm_[static_cast<std::size_t>(l)];
                    break;
                }
            }
        }
    }

    template <class Derived>
    RVector traces(const Eigen::MatrixBase<Derived>& x) const {
        RVector out(size());
        traces(x, out.data());
        return out;
    }

private:
    CMatrix make_generator(const GeneratorLabel& lab) const {
        CMatrix g = CMatrix::Zero(dim_, dim_);
        switch (lab.kind) {
            case GeneratorLabel::Kind::symmetric:
                g(lab.j, lab.k) = 1.0;
                g(lab.k, lab.j) = 1.0;
                break;
            case GeneratorLabel::Kind::antisymmetric:
                g(lab.j, lab.k) = cplx(0.0, -1.0);
                g(lab.k, lab.j) = cplx(0.0, 1.0);
                break;
            case GeneratorLabel::Kind::diagonal: {
                const int l = lab.j;
                const double norm = std::sqrt(2.0 / (l * (l + 1.0)));
                for (int m = 0; m < l; ++m) g(m, m) = norm;
                g(l, l) = -l * norm;
                break;
            }
        }
        return g;
    }

    int dim_;
    std::vector<GeneratorLabel> labels_;
    std::vector<CMatrix> generators_;
    std::vector<double> diag_norm_;
    CMatrix lambda0_;
};

inline GgmBasis build_basis(int d) { return GgmBasis(d); }

/// Shared immutable basis for 2 <= d <= max_dim.
inline const GgmBasis& basis_for(int d) {
    if (d < 2 || d > max_dim)
        throw DomainError("basis_for: dimension must be in [2, " + std::to_string(max_dim) + "], got " +
                          std::to_string(d));
    static const std::array<GgmBasis, max_dim - 1> cache = [] {
        return [&]<std::size_t... I>(std::index_sequence<I...>) {
            return std::array<GgmBasis, max_dim - 1>{GgmBasis(static_cast<int>(I) + 2)...};
        }(std::make_index_sequence<max_dim - 1>{});
    }();
    return cache[static_cast<std::size_t>(d - 2)];
}

/**
 * Coefficients a_0..a_{d^2-1} with A = sum_i a_i lambda_i, a_i = tr(lambda_i A)/2.
 * a_0 multiplies lambda_0, so a_0 = tr(A)/sqrt(2d).
 */
inline RVector operator_to_bloch(const CMatrix& a, const GgmBasis& basis) {
    const int d = basis.dim();
    require(a.rows() == d && a.cols() == d, "operator_to_bloch: operator is not " + std::to_string(d) + "x" +
                                                std::to_string(d));
    require(is_hermitian(a), "operator_to_bloch: operator is not Hermitian");
    RVector out(d * d);
    out[0] = 0.5 * std::real(trace_product(basis.lambda0(), a));
    for (int i = 0; i < basis.size(); ++i) out[i + 1] = 0.5 * std::real(trace_product(basis[i], a));
    return out;
}

}  // namespace spintomo

#pragma once

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "decay_models.hpp"
#include "ggm_basis.hpp"
#include "quadrature.hpp"

namespace spintomo {

/// Rank-1 projector onto m = +j (sign > 0) or m = -j (sign < 0) along (theta, phi).
inline CMatrix projector(int d, int sign, double theta, double phi) {
    require(d >= 2 && d <= max_dim, "projector: dimension out of range");
    require(sign == 1 || sign == -1, "projector: sign must be +1 or -1");
    RVector f = RVector::Zero(d);
    f[0] = 1.0;
    Direction n = Direction::from_angles(theta, phi);
    if (sign < 0) n = n.opposite();
    return rotation_for(d).rotate_diagonal(f, n);
}

inline constexpr double gram_condition_limit = 1e12;
inline constexpr double gram_pivot_limit = 1e-13;

/**
 * Q symbols q_i(n) = tr(lambda_i F_n) of a measurement model, their
 * spherical Gram matrix M_ij = (d/8 pi) int q_i q_j dOmega, and, when M is
 * invertible, the dual P symbols p = M^-1 q.
 */
class SymbolSet {
public:
    explicit SymbolSet(MeasurementModel model) : model_(std::move(model)) {
        model_.check();
        const int d = model_.dim;
        gram_ = integrate_gram(SphereQuadrature::for_dim(d));
        gram_check_ = (integrate_gram(SphereQuadrature::for_dim(d, 2)) - gram_).cwiseAbs().maxCoeff();
    }

    const MeasurementModel& model() const noexcept { return model_; }
    int dim() const noexcept { return model_.dim; }
    int size() const noexcept { return model_.dim * model_.dim - 1; }
    const GgmBasis& basis() const { return basis_for(model_.dim); }

    const RMatrix& gram() const noexcept { return gram_; }
    /// max |M - M'| where M' uses twice as many quadrature nodes per axis.
    double gram_self_check() const noexcept { return gram_check_; }

    bool inverted() const noexcept { return inverted_; }
    bool invertible() const noexcept { return gram_inverse_.has_value(); }
    double condition_number() const noexcept { return condition_; }
    double min_pivot() const noexcept { return min_pivot_; }
    const std::optional<RMatrix>& gram_inverse() const noexcept { return gram_inverse_; }
    const std::string& diagnosis() const noexcept { return diagnosis_; }

    /// Inverts the Gram matrix, or records why it cannot be inverted.
    void invert() {
        inverted_ = true;
        Eigen::SelfAdjointEigenSolver<RMatrix> es(gram_, Eigen::EigenvaluesOnly);
        const RVector ev = es.eigenvalues();
        const double lmax = ev.cwiseAbs().maxCoeff();
        const double lmin = ev.minCoeff();
        condition_ = (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
        Eigen::PartialPivLU<RMatrix> lu(gram_);
        min_pivot_ = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        if (gram_.cwiseAbs().maxCoeff() < gram_pivot_limit) {
            diagnosis_ = "gram matrix is zero: Q symbols of model '" + model_.name +
                         "' vanish, decay directions carry no spin information";
        } else if (!(condition_ < gram_condition_limit) || min_pivot_ < gram_pivot_limit) {
            std::ostringstream os;
            os << std::setprecision(6) << "gram matrix of model '" << model_.name
               << "' is singular: condition number " << condition_ << " (limit " << gram_condition_limit
               << "), smallest pivot " << min_pivot_ << " (limit " << gram_pivot_limit << ")";
            diagnosis_ = os.str();
        } else {
            gram_inverse_ = lu.inverse();
            diagnosis_.clear();
            return;
        }
        gram_inverse_.reset();
    }

    /// Writes q_1..q_{d^2-1} at n into out.
    void q(const Direction& n, double* out) const {
        const int d = model_.dim;
        const Direction m = model_.mirrored ? n.opposite() : n;
        const auto [ch, sh] = WignerRotation::half_angles(m.cos_theta);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, max_dim, max_dim> dm(d, d);
        rotation_for(d).small_d(ch, sh, dm);
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, max_dim, max_dim> x(d, d);
        std::array<cplx, max_dim> phase;
        phase[0] = 1.0;
        const cplx step = std::polar(1.0, m.phi);
        for (int k = 1; k < d; ++k) phase[static_cast<std::size_t>(k)] = phase[static_cast<std::size_t>(k - 1)] * step;
        for (int r = 0; r < d; ++r) {
            for (int c = r; c < d; ++c) {
                double g = 0.0;
                for (int k = 0; k < d; ++k) g += dm(r, k) * model_.f[k] * dm(c, k);
                // (U F U^dagger)_rc = e^{i (r - c) phi} sum_k d_rk F_k d_ck
                const cplx v = g * std::conj(phase[static_cast<std::size_t>(c - r)]);
                x(r, c) = v;
                x(c, r) = std::conj(v);
            }
        }
        basis().traces(x, out);
    }

    RVector q(const Direction& n) const {
        RVector out(size());
        q(n, out.data());
        return out;
    }

    RVector q(double theta, double phi) const { return q(Direction::from_angles(theta, phi)); }

    /// Writes p_1..p_{d^2-1} at n into out; throws DomainError when the Gram matrix is singular.
    void p(const Direction& n, double* out) const {
        require_invertible();
        const int k = size();
        Eigen::Matrix<double, Eigen::Dynamic, 1, 0, max_dim * max_dim, 1> qv(k);
        q(n, qv.data());
        Eigen::Map<RVector>(out, k).noalias() = *gram_inverse_ * qv;
    }

    RVector p(const Direction& n) const {
        RVector out(size());
        p(n, out.data());
        return out;
    }

    RVector p(double theta, double phi) const { return p(Direction::from_angles(theta, phi)); }

    void require_invertible() const {
        if (!gram_inverse_) {
            throw DomainError(inverted_ ? diagnosis_ : "P symbols requested before the gram matrix was inverted");
        }
    }

private:
    RMatrix integrate_gram(const SphereQuadrature& quad) const {
        const int k = size();
        RMatrix g = RMatrix::Zero(k, k);
        RVector qv(k);
        for (const auto& node : quad.nodes) {
            q(node.n, qv.data());
            g.selfadjointView<Eigen::Lower>().rankUpdate(qv, node.weight);
        }
        RMatrix full = g.selfadjointView<Eigen::Lower>();
        return full * (model_.dim / (8.0 * pi));
    }

    MeasurementModel model_;
    RMatrix gram_;
    double gram_check_ = 0.0;
    bool inverted_ = false;
    std::optional<RMatrix> gram_inverse_;
    double condition_ = std::numeric_limits<double>::infinity();
    double min_pivot_ = 0.0;
    std::string diagnosis_;
};

/// Q symbols and Gram matrix only.
inline SymbolSet q_symbols(const MeasurementModel& model) { return SymbolSet(model); }

/// Adds the P symbols (or the singularity diagnosis).
inline SymbolSet p_symbols(SymbolSet symbols) {
    symbols.invert();
    return symbols;
}

inline SymbolSet make_symbols(const MeasurementModel& model) { return p_symbols(q_symbols(model)); }

/// max over i,j of |(d/4 pi) int p_i q_j - 2 delta_ij| and max_i |int p_i|, by quadrature.
struct BiorthogonalityCheck {
    double max_deviation = 0.0;
    double max_mean = 0.0;
};

inline BiorthogonalityCheck check_biorthogonality(const SymbolSet& s, int refine = 1) {
    s.require_invertible();
    const int k = s.size();
    const auto quad = SphereQuadrature::for_dim(s.dim(), refine);
    RMatrix pq = RMatrix::Zero(k, k);
    RVector mean = RVector::Zero(k);
    RVector qv(k), pv(k);
    for (const auto& node : quad.nodes) {
        s.q(node.n, qv.data());
        s.p(node.n, pv.data());
        pq.noalias() += node.weight * pv * qv.transpose();
        mean += node.weight * pv;
    }
    pq *= s.dim() / four_pi;
    return {(pq - 2.0 * RMatrix::Identity(k, k)).cwiseAbs().maxCoeff(), mean.cwiseAbs().maxCoeff()};
}

/**
 * One term c * sin^k(theta) cos^b(theta) * (cos|sin)(k phi) of the monomial
 * dictionary. Spin-j symbols are exact finite sums of such terms with
 * k + b <= 2j.
 */
struct MonomialTerm {
    int sin_power = 0;
    int cos_power = 0;
    int order = 0;
    bool sine = false;
    double coeff = 0.0;

    double operator()(const Direction& n) const {
        const double st = n.sin_theta();
        const double trig = sine ? std::sin(order * n.phi) : std::cos(order * n.phi);
        return coeff * std::pow(st, sin_power) * std::pow(n.cos_theta, cos_power) * trig;
    }
};

using MonomialExpansion = std::vector<MonomialTerm>;

inline double evaluate(const MonomialExpansion& e, const Direction& n) {
    double s = 0.0;
    for (const auto& t : e) s += t(n);
    return s;
}

/**
 * Expands a band-limited function of degree < d on the sphere into the
 * monomial dictionary by exact Fourier projection in phi and polynomial
 * interpolation in cos(theta). Coefficients below `drop` are omitted.
 */
template <class F>
MonomialExpansion expand_monomials(int d, F&& f, double drop = 1e-13) {
    MonomialExpansion out;
    const int nphi = 2 * d + 1;
    for (int k = 0; k < d; ++k) {
        const int npoly = d - k;
        const GaussLegendre gl(npoly);
        for (int trig = 0; trig < (k == 0 ? 1 : 2); ++trig) {
            const bool sine = trig == 1;
            RMatrix vander(npoly, npoly);
            RVector rhs(npoly);
            for (int i = 0; i < npoly; ++i) {
                const double x = gl.nodes[static_cast<std::size_t>(i)];
                double acc = 0.0;
                for (int l = 0; l < nphi; ++l) {
                    const double phi = two_pi * l / nphi;
                    const double w = sine ? std::sin(k * phi) : std::cos(k * phi);
                    acc += f(Direction{x, phi}) * w;
                }
                acc *= (k == 0 ? 1.0 : 2.0) / nphi;
                rhs[i] = acc / std::pow(std::sqrt(1.0 - x * x), k);
                for (int b = 0; b < npoly; ++b) vander(i, b) = std::pow(x, b);
            }
            const RVector c = vander.fullPivLu().solve(rhs);
            for (int b = 0; b < npoly; ++b)
                if (std::abs(c[b]) > drop) out.push_back({k, b, k, sine, c[b]});
        }
    }
    return out;
}

inline std::vector<MonomialExpansion> q_expansions(const SymbolSet& s) {
    std::vector<MonomialExpansion> out;
    for (int i = 0; i < s.size(); ++i)
        out.push_back(expand_monomials(s.dim(), [&](const Direction& n) { return s.q(n)[i]; }));
    return out;
}

inline std::vector<MonomialExpansion> p_expansions(const SymbolSet& s) {
    s.require_invertible();
    std::vector<MonomialExpansion> out;
    for (int i = 0; i < s.size(); ++i)
        out.push_back(expand_monomials(s.dim(), [&](const Direction& n) { return s.p(n)[i]; }));
    return out;
}

/// theta_i = pi i/(n-1), phi_k = 2 pi k/n.
inline std::vector<Direction> symbol_grid(int n) {
    require(n >= 2, "symbol_grid: need at least 2 points per axis");
    std::vector<Direction> g;
    g.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) g.push_back(Direction::from_angles(pi * i / (n - 1), two_pi * k / n));
    return g;
}

/// Long-format CSV: kind,index,label,theta,phi,value. P rows only when invertible.
inline void write_symbols_csv(std::ostream& os, const SymbolSet& s, int grid) {
    const auto& labels = s.basis().labels();
    os << "kind,index,label,theta,phi,value\n";
    os << std::setprecision(12);
    const auto points = symbol_grid(grid);
    for (const char* kind : {"Q", "P"}) {
        const bool is_p = kind[0] == 'P';
        if (is_p && !s.invertible()) break;
        for (const auto& n : points) {
            const RVector v = is_p ? s.p(n) : s.q(n);
            for (int i = 0; i < s.size(); ++i)
                os << kind << ',' << i + 1 << ',' << labels[static_cast<std::size_t>(i)].name() << ',' << n.theta()
                   << ',' << n.phi << ',' << v[i] << '\n';
        }
    }
}

}  // namespace spintomo

#include <gtest/gtest.h>

#include <spintomo/event_engine.hpp>
#include <spintomo/quadrature.hpp>

#include "test_support.hpp"

using namespace spintomo;

namespace {

/// Asymptotic Kolmogorov p-value for statistic D with n samples.
double ks_p_value(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    for (int k = 1; k < 200; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

/// Marginal CDF of cos(theta) from the pdf, by quadrature in phi and Gauss-Legendre on [-1, x].
double cos_theta_cdf(const BlochState& rho, const SymbolSet& s, double x) {
    const int d = s.dim();
    const GaussLegendre gl(2 * d + 2);
    const int nphi = 4 * d + 1;
    double total = 0.0;
    RVector q(s.size());
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double c = -1.0 + 0.5 * (gl.nodes[i] + 1.0) * (x + 1.0);
        for (int k = 0; k < nphi; ++k) {
            s.q(Direction{c, two_pi * k / nphi}, q.data());
            total += gl.weights[i] * 0.5 * (x + 1.0) * (two_pi / nphi) * (d / four_pi) * (1.0 / d + rho.a.dot(q));
        }
    }
    return total;
}

double mean_cos(const std::vector<EventRecord>& ev) {
    double s = 0.0;
    for (const auto& e : ev) s += e.n1.cos_theta;
    return s / static_cast<double>(ev.size());
}

}  // namespace

TEST(EventEngine, DeterministicAndThreadIndependent) {
    const auto rho = singlet3();
    SamplingOptions one{42, 1, 1000};
    SamplingOptions three{42, 3, 1000};
    const auto a = sample_bipartite(rho, model_W_massless(1), model_W_massless(-1), 5500, one);
    const auto b = sample_bipartite(rho, model_W_massless(1), model_W_massless(-1), 5500, one);
    const auto c = sample_bipartite(rho, model_W_massless(1), model_W_massless(-1), 5500, three);
    ASSERT_EQ(a.size(), 5500u);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    const auto other = sample_bipartite(rho, model_W_massless(1), model_W_massless(-1), 5500, {43, 1, 1000});
    EXPECT_NE(a, other);
    for (const auto& e : a) {
        EXPECT_GE(e.n1.theta(), 0.0);
        EXPECT_LE(e.n1.theta(), pi);
        EXPECT_GE(e.n2->phi, 0.0);
        EXPECT_LT(e.n2->phi, two_pi);
    }
}

TEST(EventEngine, MaximallyMixedGivesUniformDirections) {
    const std::size_t n = 200000;
    const auto ev = sample_single(BlochState::single(3), model_W_massless(1), n, {1});
    EXPECT_LT(std::abs(mean_cos(ev)), 4.0 / std::sqrt(static_cast<double>(n)));
    const auto k0 = sample_single(BlochState::single(2, RVector{{0.1, -0.2, 0.4}}), model_spin_half(0.0), n, {2});
    EXPECT_LT(std::abs(mean_cos(k0)), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(EventEngine, PlusStateHemisphereFraction) {
    // (3/4pi) cos^4(theta/2) over cos(theta) > 0: (3/8) int_0^1 (1+x)^2 dx = 7/8.
    const std::size_t n = 200000;
    const auto ev = sample_single(reference_state("basis:d=3").state, model_W_massless(1), n, {3});
    double frac = 0.0;
    for (const auto& e : ev) frac += e.n1.cos_theta > 0.0;
    frac /= static_cast<double>(n);
    const double p = 7.0 / 8.0;
    EXPECT_NEAR(frac, p, 5.0 * std::sqrt(p * (1 - p) / static_cast<double>(n)));
}

TEST(EventEngine, AcceptanceRateIsOneOverD) {
    for (const auto& m : {model_W_massless(1), model_spin_half(0.7), model_projector(5, 1)}) {
        std::mt19937_64 rng(9);
        const auto rho = fixtures::random_single(m.dim, rng);
        SamplingStats st;
        sample_single(rho, m, 100000, {4}, &st);
        const double expect = 1.0 / m.dim;
        const double sigma = std::sqrt(expect * (1 - expect) / static_cast<double>(st.trials));
        EXPECT_GT(st.acceptance(), expect - 5 * sigma) << m.name;
        EXPECT_LT(std::abs(st.acceptance() - expect), 5 * sigma) << m.name;
    }
}

TEST(EventEngine, KolmogorovSmirnovAgainstQuadratureCdf) {
    std::mt19937_64 rng(77);
    const std::vector<MeasurementModel> models{model_W_massless(1), model_W_massless(-1), model_W_massive(0.5),
                                               model_Z_dilepton(-0.273, 0.233), model_spin_half(-0.41),
                                               model_projector(4, 0), model_projector(4, 1)};
    const std::size_t n = 100000;
    for (int trial = 0; trial < 20; ++trial) {
        const auto& m = models[static_cast<std::size_t>(trial) % models.size()];
        const auto rho = fixtures::random_single(m.dim, rng, 1 + trial % m.dim);
        const auto s = q_symbols(m);
        auto ev = sample_single(rho, m, n, {static_cast<std::uint64_t>(100 + trial)});
        std::vector<double> x;
        for (const auto& e : ev) x.push_back(e.n1.cos_theta);
        std::sort(x.begin(), x.end());
        // The CDF is a polynomial in x, so evaluate on a fine table and interpolate linearly.
        const int table = 2001;
        std::vector<double> cdf(table);
        for (int i = 0; i < table; ++i) cdf[static_cast<std::size_t>(i)] = cos_theta_cdf(rho, s, -1.0 + 2.0 * i / (table - 1));
        EXPECT_NEAR(cdf.back(), 1.0, 1e-10);
        double dmax = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (x[i] + 1.0) / 2.0 * (table - 1);
            const auto k = std::min<std::size_t>(static_cast<std::size_t>(u), table - 2);
            const double f = cdf[k] + (u - k) * (cdf[k + 1] - cdf[k]);
            dmax = std::max({dmax, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
        }
        EXPECT_GT(ks_p_value(dmax, n), 1e-3) << m.name << " trial " << trial << " D=" << dmax;
    }
}

TEST(EventEngine, ProductStateCorrelationsFactorize) {
    std::mt19937_64 rng(5);
    const auto ra = fixtures::random_single(3, rng), rb = fixtures::random_single(2, rng);
    const auto rho = product_state(ra, rb);
    const auto ma = model_W_massless(1), mb = model_spin_half(0.8);
    const std::size_t n = 200000;
    const auto ev = sample_bipartite(rho, ma, mb, n, {6});
    const auto sa = q_symbols(ma), sb = q_symbols(mb);
    for (int i : {2, 4, 7}) {
        for (int j : {0, 2}) {
            double mi = 0, mj = 0, mij = 0;
            for (const auto& e : ev) {
                const double qi = sa.q(e.n1)[i], qj = sb.q(*e.n2)[j];
                mi += qi;
                mj += qj;
                mij += qi * qj;
            }
            mi /= n;
            mj /= n;
            mij /= n;
            EXPECT_NEAR(mij, mi * mj, 5.0 / std::sqrt(static_cast<double>(n)));
        }
    }
}

namespace {

/// <cos1 cos2> from the pdf: (9/16 pi^2) sum_ij c_ij (int cos q_i)(int cos q_j).
double cos_correlation_oracle(const BlochState& rho, const SymbolSet& sa, const SymbolSet& sb) {
    const auto quad = SphereQuadrature::for_dim(3);
    RVector ia = RVector::Zero(8), ib = RVector::Zero(8);
    for (const auto& node : quad.nodes) {
        ia += node.weight * node.n.cos_theta * sa.q(node.n);
        ib += node.weight * node.n.cos_theta * sb.q(node.n);
    }
    return 9.0 / (16.0 * pi * pi) * ia.dot(rho.c * ib);
}

double sampled_cos_correlation(const std::vector<EventRecord>& ev) {
    double m = 0;
    for (const auto& e : ev) m += e.n1.cos_theta * e.n2->cos_theta;
    return m / static_cast<double>(ev.size());
}

}  // namespace

TEST(EventEngine, SingletIsAnticorrelated) {
    const auto rho = singlet3();
    const std::size_t n = 200000;
    std::uint64_t seed = 7;
    for (int charge : {1, -1}) {
        const auto m = model_W_massless(charge);
        const auto s = q_symbols(m);
        const double oracle = cos_correlation_oracle(rho, s, s);
        EXPECT_LT(oracle, 0.0);
        const double got = sampled_cos_correlation(sample_bipartite(rho, m, m, n, {seed++}));
        EXPECT_LT(got, 0.0);
        EXPECT_NEAR(got, oracle, 5.0 / std::sqrt(static_cast<double>(n)));
    }
    // Opposite analyzers flip the sign of the lepton correlation.
    const auto wp = model_W_massless(1), wm = model_W_massless(-1);
    const double mixed_oracle = cos_correlation_oracle(rho, q_symbols(wp), q_symbols(wm));
    EXPECT_GT(mixed_oracle, 0.0);
    EXPECT_NEAR(sampled_cos_correlation(sample_bipartite(rho, wp, wm, n, {seed++})), mixed_oracle,
                5.0 / std::sqrt(static_cast<double>(n)));

    const auto mixed = sample_bipartite(maxmixed9(), wp, wm, n, {8});
    double c1 = 0, c2 = 0;
    for (const auto& e : mixed) {
        c1 += e.n1.cos_theta;
        c2 += e.n2->cos_theta;
    }
    EXPECT_LT(std::abs(c1 / n), 4.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_LT(std::abs(c2 / n), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(EventEngine, RejectsInvalidInput) {
    const auto bad = BlochState::single(2, RVector{{0.5, 0.5, 0.0}});
    EXPECT_THROW(sample_single(bad, model_spin_half(1.0), 10, {}), DomainError);
    EXPECT_THROW(sample_single(BlochState::single(3), model_spin_half(1.0), 10, {}), DomainError);
    EXPECT_THROW(sample_bipartite(BlochState::single(3), model_W_massless(1), model_W_massless(1), 10, {}),
                 DomainError);
}

TEST(ReferenceStates, DefiningProperties) {
    const auto s = singlet3();
    EXPECT_NEAR(purity(s), 1.0, 1e-14);
    EXPECT_NEAR(s.c.squaredNorm(), 2.0 / 9.0, 1e-14);
    EXPECT_LT(s.a.norm() + s.b.norm(), 1e-15);
    const CMatrix rho = bloch_to_density(s);
    EXPECT_NEAR(rho(2, 2).real(), 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(rho(2, 4).real(), -1.0 / 3.0, 1e-14);
    EXPECT_NEAR(rho(2, 6).real(), 1.0 / 3.0, 1e-14);

    EXPECT_EQ(maxmixed9().c.norm(), 0.0);
    const auto w = werner(0.5);
    const RVector ev = hermitian_eigenvalues(bloch_to_density(w));
    EXPECT_GE(ev.minCoeff(), 0.0);
    EXPECT_LE(ev.maxCoeff(), 1.0);
    EXPECT_NEAR(ev.maxCoeff(), 0.5 + 0.5 / 9.0, 1e-14);

    const auto phi = bell_phi_plus_qubit(), psi = bell_psi_plus_qubit();
    EXPECT_LT((phi.c - RMatrix(RVector{{0.25, -0.25, 0.25}}.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((psi.c - RMatrix(RVector{{0.25, 0.25, -0.25}}.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);

    const CMatrix b2 = bloch_to_density(bell2_qutrit());
    EXPECT_NEAR(b2(0, 8).real(), 0.5, 1e-14);
    EXPECT_NEAR(bloch_to_density(separable_pp())(0, 0).real(), 1.0, 1e-14);
}

TEST(ReferenceStates, ByName) {
    EXPECT_EQ(reference_state("singlet3").state, singlet3());
    const auto w = reference_state("werner:alpha=0.25");
    EXPECT_EQ(w.params.at("alpha"), 0.25);
    EXPECT_LT((w.state.c - 0.25 * singlet3().c).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(reference_state("werner_qubit:p=0.5").state.dims, (std::vector<int>{2, 2}));
    EXPECT_EQ(reference_state("maxmixed:d=5").state.dims, (std::vector<int>{5}));
    EXPECT_NEAR(reference_state("qubit:az=0.3").state.a[2], 0.3, 0.0);
    EXPECT_THROW(reference_state("triplet"), DomainError);
    EXPECT_THROW(reference_state("werner"), DomainError);
    EXPECT_THROW(reference_state("werner:alpha=2"), DomainError);
}

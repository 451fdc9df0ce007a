#include <gtest/gtest.h>

#include <spintomo/decay_models.hpp>

using namespace spintomo;

TEST(DecayModels, SpinHalf) {
    const auto m = model_spin_half(1.0);
    EXPECT_TRUE(m.projective);
    EXPECT_DOUBLE_EQ(m.f[0], 1.0);
    EXPECT_DOUBLE_EQ(m.f[1], 0.0);
    const auto b = model_spin_half(-0.41);
    EXPECT_NEAR(b.f[0], 0.295, 1e-15);
    EXPECT_NEAR(b.f[1], 0.705, 1e-15);
    EXPECT_FALSE(b.projective);
    const auto z = model_spin_half(0.0);
    EXPECT_DOUBLE_EQ(z.f[0], 0.5);
    EXPECT_THROW(model_spin_half(1.2), DomainError);
    EXPECT_THROW(model_spin_half(-1.0000001), DomainError);
}

TEST(DecayModels, KrausSquaresToF) {
    for (const auto& m : {model_spin_half(0.3), model_W_massless(1), model_W_massive(0.4), model_W_massive(0.4, true),
                          model_Z_dilepton(-0.273, 0.233)}) {
        const CMatrix k = m.kraus_matrix();
        EXPECT_LT(((k.adjoint() * k) - m.f_matrix()).cwiseAbs().maxCoeff(), 1e-15) << m.name;
        EXPECT_TRUE(is_hermitian(m.f_matrix()));
    }
}

TEST(DecayModels, MasslessW) {
    const auto p = model_W_massless(1), n = model_W_massless(-1);
    EXPECT_TRUE(p.projective);
    EXPECT_FALSE(p.mirrored);
    EXPECT_TRUE(n.mirrored);
    EXPECT_EQ(n.f, p.f);
    EXPECT_EQ(n.effective_f(), (RVector{{0.0, 0.0, 1.0}}));
    EXPECT_THROW(model_W_massless(0), DomainError);
}

TEST(DecayModels, MassiveW) {
    const auto one = model_W_massive(1.0);
    EXPECT_LT((one.f - model_W_massless(1).f).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(one.projective);

    const auto m = model_W_massive(0.75);
    const double fv = 16.0 / 15.0;
    EXPECT_NEAR(massive_w_norm_factor(0.75), fv, 1e-15);
    EXPECT_NEAR(m.f[0], 0.875 * fv, 1e-15);
    EXPECT_NEAR(m.f[1], 0.0625 * fv, 1e-15);
    EXPECT_NEAR(m.f.sum(), 1.0, 1e-15);

    const auto s = model_W_massive(0.5, true);
    EXPECT_NEAR(s.scalar_weight, 0.125, 1e-15);
    EXPECT_NEAR(s.f.sum() + s.scalar_weight, 1.0, 1e-15);
    EXPECT_NEAR(s.f[0], 0.75, 1e-15);

    EXPECT_THROW(model_W_massive(0.0), DomainError);
    EXPECT_THROW(model_W_massive(-0.2), DomainError);
    EXPECT_THROW(model_W_massive(1.1), DomainError);
}

TEST(DecayModels, ZDilepton) {
    const auto z = model_Z_dilepton(-0.273, 0.233);
    EXPECT_NEAR(z.f[0], 0.4215, 1e-4);
    EXPECT_NEAR(z.f[2], 0.5785, 1e-4);
    EXPECT_DOUBLE_EQ(z.f[1], 0.0);
    EXPECT_FALSE(z.projective);
    const auto w = model_Z_dilepton(0.0, 1.0);
    EXPECT_EQ(w.f, (RVector{{1.0, 0.0, 0.0}}));
    EXPECT_TRUE(w.projective);
    EXPECT_THROW(model_Z_dilepton(0.0, 0.0), DomainError);

    const auto sm = ZCouplings::standard_model_leptons();
    EXPECT_NEAR(sm.c_left, -0.273, 5e-4);
    EXPECT_NEAR(sm.c_right, 0.233, 5e-4);
}

TEST(DecayModels, Presets) {
    EXPECT_EQ(model_from_preset("W+").f, model_W_massless(1).f);
    EXPECT_TRUE(model_from_preset("W-").mirrored);
    EXPECT_NEAR(model_from_preset("W+massive:v=0.75").f[0], model_W_massive(0.75).f[0], 0.0);
    EXPECT_TRUE(model_from_preset("W-massive:v=0.5").mirrored);
    EXPECT_NEAR(model_from_preset("W+massive:v=0.5,scalar=1").scalar_weight, 0.125, 1e-15);
    EXPECT_EQ(model_from_preset("Z:SM").name, "Z:SM");
    EXPECT_NEAR(model_from_preset("Z:cL=-0.273,cR=0.233").f[0], 0.42144, 1e-5);
    EXPECT_DOUBLE_EQ(model_from_preset("tophalf:kappa=1.0").f[0], 1.0);
    EXPECT_NEAR(model_from_preset("bquark:kappa=-0.41").f[0], 0.295, 1e-15);
    EXPECT_EQ(model_from_preset("projector:d=4").dim, 4);
    EXPECT_NEAR(model_from_preset("uniform:d=3").f[1], 1.0 / 3.0, 1e-15);
    EXPECT_THROW(model_from_preset("H"), DomainError);
    EXPECT_THROW(model_from_preset("tophalf"), DomainError);
    EXPECT_THROW(model_from_preset("tophalf:kappa=abc"), DomainError);
    EXPECT_THROW(model_from_preset("tophalf:kappa=1,v=2"), DomainError);
}

TEST(DecayModels, PovmValidation) {
    const auto r1 = validate_povm({model_spin_half(0.6), model_spin_half(-0.6)});
    EXPECT_EQ(r1.max_deviation, 0.0);
    EXPECT_TRUE(r1.complete);

    const auto r2 = validate_povm({model_projector(3, 0), model_projector(3, 1), model_projector(3, 2)});
    EXPECT_TRUE(r2.complete);
    // W+ and W- projectors along the lepton plus the m=0 projector.
    const auto r3 = validate_povm({model_W_massless(1), model_W_massless(-1), model_projector(3, 1)});
    EXPECT_TRUE(r3.complete);

    const auto r4 = validate_povm({model_Z_dilepton(-0.273, 0.233)});
    EXPECT_FALSE(r4.complete);
    EXPECT_GT(r4.max_deviation, 0.5);
    EXPECT_TRUE(r4.psd[0]);
    EXPECT_THROW(validate_povm({model_spin_half(0.1), model_W_massless(1)}), DomainError);
}

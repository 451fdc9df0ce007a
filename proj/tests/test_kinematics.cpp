#include <gtest/gtest.h>

#include <sstream>

#include <spintomo/reduce.hpp>

#include "lhe_fixtures.hpp"

using namespace spintomo;

namespace {

std::vector<LheEvent> parse(const std::string& text) {
    std::istringstream in(text);
    return LheReader(in).read_all();
}

FourVector random_momentum(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double m = 1.0 + 200.0 * u(rng);
    const Vec3 p = (2000.0 * u(rng)) * fixtures::random_unit(rng);
    return {std::sqrt(m * m + p.squaredNorm()), p};
}

double angle_gap(const Direction& a, const Direction& b) {
    double dphi = std::abs(a.phi - b.phi);
    dphi = std::min(dphi, two_pi - dphi);
    return std::max(std::abs(a.cos_theta - b.cos_theta), dphi);
}

}  // namespace

TEST(Kinematics, BoostToRestFrame) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const FourVector q = random_momentum(rng);
        const FourVector rest = to_rest_frame(q, q);
        EXPECT_LT(rest.p.norm(), 1e-6);
        EXPECT_NEAR(rest.e, q.mass(), 1e-6 * q.mass());
        const FourVector other = random_momentum(rng);
        const FourVector moved = to_rest_frame(other, q);
        EXPECT_NEAR(moved.mass2(), other.mass2(), 1e-6 * std::max(1.0, std::abs(other.mass2())));
    }
}

TEST(Kinematics, BoostMatchesIndependentForm) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const FourVector q = random_momentum(rng);
        const Vec3 beta = 0.99 * fixtures::random_unit(rng) * std::uniform_real_distribution<double>(0, 1)(rng);
        const FourVector a = boost(q, beta), b = fixtures::lorentz(q, beta);
        EXPECT_NEAR(a.e, b.e, 1e-9 * q.e);
        EXPECT_LT((a.p - b.p).norm(), 1e-9 * q.e);
        const FourVector back = boost(a, -beta);
        EXPECT_NEAR(back.e, q.e, 1e-9 * q.e);
        EXPECT_LT((back.p - q.p).norm(), 1e-9 * q.e);
    }
    EXPECT_THROW(boost(FourVector(1, 0, 0, 0), Vec3(1.0, 0, 0)), DomainError);
    EXPECT_THROW(to_rest_frame(FourVector(1, 0, 0, 1), FourVector(1, 0, 0, 1)), DomainError);
}

TEST(BeamBasis, TiltedBeamExample) {
    const double b = 0.7;
    const auto basis = build_beam_basis(Vec3::UnitZ(), Vec3(std::sin(b), 0.0, std::cos(b)));
    EXPECT_LT((basis.r - Vec3::UnitX()).norm(), 1e-14);
    // (p x k)/r with p = (sin b, 0, cos b), k = z gives (0, -sin b, 0)/sin b.
    EXPECT_LT((basis.n + Vec3::UnitY()).norm(), 1e-14);
    EXPECT_LT((basis.k - Vec3::UnitZ()).norm(), 1e-14);
}

TEST(BeamBasis, PerpendicularBeamGivesRAlongBeam) {
    const Vec3 p(0.0, 1.0, 0.0);
    const auto basis = build_beam_basis(Vec3(1.0, 0.0, 0.0), p);
    EXPECT_LT((basis.r - p).norm(), 1e-15);
}

TEST(BeamBasis, CollinearIsRejected) {
    EXPECT_THROW(build_beam_basis(Vec3::UnitZ(), Vec3::UnitZ()), DomainError);
    EXPECT_THROW(build_beam_basis(Vec3::UnitZ(), -Vec3::UnitZ()), DomainError);
    EXPECT_THROW(build_beam_basis(Vec3::UnitZ(), Vec3(1e-9, 0.0, 1.0)), DomainError);
    EXPECT_NO_THROW(build_beam_basis(Vec3::UnitZ(), Vec3(1e-6, 0.0, 1.0)));
    EXPECT_THROW(build_beam_basis(Vec3::Zero(), Vec3::UnitZ()), DomainError);
}

TEST(BeamBasis, RightHandedOrthonormal) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10000; ++i) {
        const auto b = build_beam_basis(fixtures::random_unit(rng), fixtures::random_unit(rng));
        EXPECT_NEAR(b.n.dot(b.r.cross(b.k)), 1.0, 1e-10);
        EXPECT_NEAR(b.n.norm(), 1.0, 1e-12);
        EXPECT_NEAR(b.r.norm(), 1.0, 1e-12);
        EXPECT_NEAR(b.n.dot(b.r), 0.0, 1e-12);
        EXPECT_NEAR(b.r.dot(b.k), 0.0, 1e-12);
        EXPECT_NEAR(b.n.dot(b.k), 0.0, 1e-12);
    }
}

TEST(BeamBasis, DirectionCoordinates) {
    const auto b = build_beam_basis(Vec3(0.3, -0.2, 0.9), Vec3(0.1, 0.5, -0.2));
    const auto along_n = b.direction_of(b.n), along_r = b.direction_of(b.r), along_k = b.direction_of(2.0 * b.k);
    EXPECT_NEAR(along_n.cos_theta, 0.0, 1e-14);
    EXPECT_NEAR(along_n.phi, 0.0, 1e-14);
    EXPECT_NEAR(along_r.phi, pi / 2, 1e-14);
    EXPECT_NEAR(along_k.cos_theta, 1.0, 1e-14);
    EXPECT_NEAR(b.direction_of(-b.r).phi, 3 * pi / 2, 1e-14);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        const Vec3 v = fixtures::random_unit(rng);
        EXPECT_LT((b.vector_of(b.direction_of(v)) - v).norm(), 1e-12);
    }
}

TEST(Reduce, RoundTripRecoversGeneratedAngles) {
    std::mt19937_64 rng(5);
    const auto truth = sample_bipartite(singlet3(), model_W_massless(1), model_W_massless(-1), 500, {6});
    std::vector<std::string> blocks;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto g = fixtures::random_geometry(rng);
        g.mother_links = i % 2 == 0;
        blocks.push_back(fixtures::synthetic_event(fixtures::w_plus(truth[i].n1), fixtures::w_minus(*truth[i].n2), g));
    }
    const auto events = parse(fixtures::lhe_file(blocks));
    ASSERT_EQ(events.size(), truth.size());
    const auto cfg = channel_config("WW");
    double worst = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto rec = reduce_event(events[i], cfg);
        ASSERT_TRUE(rec.has_value());
        worst = std::max({worst, angle_gap(rec->n1, truth[i].n1), angle_gap(*rec->n2, *truth[i].n2)});
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(Reduce, ProbeAlongKAndBackToBackPartner) {
    std::mt19937_64 rng(7);
    const auto g = fixtures::random_geometry(rng);
    const Direction up{1.0, 0.0}, side{0.0, 1.0};
    const auto ev = parse(fixtures::lhe_file({fixtures::synthetic_event(fixtures::w_plus(up), fixtures::w_minus(side), g)}));
    auto cfg = channel_config("WW");
    const auto rec = reduce_event(ev.at(0), cfg);
    ASSERT_TRUE(rec);
    EXPECT_NEAR(rec->n1.cos_theta, 1.0, 1e-9);
    // Recording the partners instead gives the opposite directions.
    cfg.first.daughters = {{14, -13}};
    cfg.second.daughters = {{-12, 11}};
    const auto partners = reduce_event(ev.at(0), cfg);
    ASSERT_TRUE(partners);
    EXPECT_NEAR(partners->n1.cos_theta, -1.0, 1e-9);
    EXPECT_NEAR(partners->n2->cos_theta, -rec->n2->cos_theta, 1e-9);
    double dphi = std::abs(partners->n2->phi - rec->n2->phi);
    EXPECT_NEAR(std::min(dphi, two_pi - dphi), pi, 1e-9);
}

TEST(Reduce, ZMassWindow) {
    std::mt19937_64 rng(8);
    const Direction d1{0.3, 1.0}, d2{-0.5, 4.0};
    const auto inside = fixtures::synthetic_event(fixtures::z_boson(d1, 11), fixtures::z_boson(d2, 13), fixtures::random_geometry(rng));
    const auto outside =
        fixtures::synthetic_event(fixtures::z_boson(d1, 11, 75.0), fixtures::z_boson(d2, 13), fixtures::random_geometry(rng));
    const auto events = parse(fixtures::lhe_file({inside, outside}));
    const auto cfg = channel_config("ZZ");
    const auto kept = reduce_event(events[0], cfg);
    ASSERT_TRUE(kept);
    EXPECT_LT(angle_gap(kept->n1, d1), 1e-9);
    EXPECT_LT(angle_gap(*kept->n2, d2), 1e-9);
    EXPECT_FALSE(reduce_event(events[1], cfg).has_value());
    EXPECT_TRUE(reduce_event(events[1], channel_config("ZZ", Vec3::UnitZ(), false)).has_value());
}

TEST(Reduce, WZAssignment) {
    std::mt19937_64 rng(9);
    auto g = fixtures::random_geometry(rng);
    g.mother_links = false;
    const Direction d1{-0.2, 2.0}, d2{0.9, 5.5};
    const fixtures::SyntheticParent w{24, -11, 12, 80.379, d1};
    const auto ev = parse(fixtures::lhe_file({fixtures::synthetic_event(w, fixtures::z_boson(d2, 13), g)}));
    const auto rec = reduce_event(ev.at(0), channel_config("WZ"));
    ASSERT_TRUE(rec);
    EXPECT_LT(angle_gap(rec->n1, d1), 1e-9);
    EXPECT_LT(angle_gap(*rec->n2, d2), 1e-9);
}

TEST(Reduce, BeamDirectionFlipsTransverseAxes) {
    std::mt19937_64 rng(10);
    const Direction d1{0.4, 1.2}, d2{-0.1, 3.0};
    auto g = fixtures::random_geometry(rng);
    // With the pair at rest in the lab the two beams stay antiparallel in the CM frame.
    g.beta_lab = Vec3::Zero();
    const auto ev = parse(fixtures::lhe_file({fixtures::synthetic_event(fixtures::w_plus(d1), fixtures::w_minus(d2), g)}));
    const auto plus = reduce_event(ev[0], channel_config("WW", parse_beam("+z")));
    const auto minus = reduce_event(ev[0], channel_config("WW", parse_beam("-z")));
    EXPECT_NEAR(plus->n1.cos_theta, minus->n1.cos_theta, 1e-9);
    // n and r both change sign, so phi shifts by pi.
    double dphi = std::abs(plus->n1.phi - minus->n1.phi);
    EXPECT_NEAR(std::min(dphi, two_pi - dphi), pi, 1e-9);
    EXPECT_THROW(parse_beam("z"), DomainError);
    EXPECT_THROW(parse_beam("+w"), DomainError);
}

TEST(Reduce, Errors) {
    std::mt19937_64 rng(11);
    const auto ev = parse(fixtures::lhe_file(
        {fixtures::synthetic_event(fixtures::w_plus({0.1, 0.1}), fixtures::w_minus({0.2, 0.2}), fixtures::random_geometry(rng))}));
    try {
        reduce_event(ev[0], channel_config("ZZ"));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("pattern not found"), std::string::npos);
    }
    EXPECT_THROW(channel_config("HH"), DomainError);

    // Two collinear massless daughters form a lightlike parent.
    const std::string text = "<LesHouchesEvents>\n<event>\n4 1 1 91 0.0078 0.118\n"
                             "-13 1 0 0 0 0 0 0 10 10 0 0 9\n14 1 0 0 0 0 0 0 20 20 0 0 9\n"
                             "11 1 0 0 0 0 1 0 0 1 0 0 9\n-12 1 0 0 0 0 -1 0 0 1 0 0 9\n</event>\n</LesHouchesEvents>\n";
    try {
        reduce_event(parse(text).at(0), channel_config("WW"));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("spacelike"), std::string::npos);
    }
}

TEST(Reduce, StreamCountsAndWeights) {
    std::mt19937_64 rng(12);
    std::vector<std::string> blocks;
    for (int i = 0; i < 5; ++i) {
        auto g = fixtures::random_geometry(rng);
        g.weight = 0.5 + i;
        blocks.push_back(fixtures::synthetic_event(fixtures::z_boson({0.1, 0.2}, 11, i == 2 ? 70.0 : 91.0),
                                                   fixtures::z_boson({0.3, 0.4}, 13), g));
    }
    blocks.push_back(fixtures::synthetic_event(fixtures::w_plus({0.1, 0.1}), fixtures::w_minus({0.2, 0.2}), fixtures::random_geometry(rng)));
    const std::string text = fixtures::lhe_file(blocks);
    auto cfg = channel_config("ZZ");
    cfg.use_event_weights = true;
    {
        std::istringstream in(text);
        LheReader reader(in, false);
        std::vector<EventRecord> out;
        const auto st = reduce_stream(reader, cfg, [&](const EventRecord& e) { out.push_back(e); });
        EXPECT_EQ(st.read, 6u);
        EXPECT_EQ(st.kept, 4u);
        EXPECT_EQ(st.outside_window, 1u);
        EXPECT_EQ(st.failed, 1u);
        ASSERT_EQ(out.size(), 4u);
        EXPECT_DOUBLE_EQ(out[0].weight, 0.5);
        EXPECT_DOUBLE_EQ(out[3].weight, 4.5);
    }
    std::istringstream in(text);
    LheReader strict(in, true);
    EXPECT_THROW(reduce_stream(strict, cfg, [](const EventRecord&) {}), DomainError);
}

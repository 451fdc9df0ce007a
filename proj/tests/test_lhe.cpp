#include <gtest/gtest.h>

#include <sstream>

#include <spintomo/lhe.hpp>

using namespace spintomo;

namespace {

const char* two_particle_event =
    "<LesHouchesEvents version=\"3.0\">\n"
    "<header>\n<MG5ProcCard>\nnot parsed 1 2 3\n</MG5ProcCard>\n</header>\n"
    "<init>\n2212 2212 6500 6500 0 0 0 0 3 1\n</init>\n"
    "<event>\n"
    " 2 7 0.25 91.1876 0.0078125 0.118\n"
    " -13 1 0 0 0 0 3 4 12 13 0 0 9\n"
    " 13 1 0 0 0 0 -3 -4 -12 13 0 0 -1\n"
    "# trailing comment\n"
    "<mgrwt> ignored </mgrwt>\n"
    "</event>\n"
    "</LesHouchesEvents>\n";

std::size_t error_line(const std::string& text, bool strict = true) {
    std::istringstream in(text);
    LheReader r(in, strict);
    try {
        r.read_all();
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

std::string event_file(const std::string& body) { return "<LesHouchesEvents>\n" + body + "</LesHouchesEvents>\n"; }

}  // namespace

TEST(LheReader, EmptyBody) {
    std::istringstream in("<LesHouchesEvents version=\"3.0\">\n</LesHouchesEvents>\n");
    LheReader r(in);
    EXPECT_FALSE(r.next().has_value());
    EXPECT_FALSE(r.next().has_value());
}

TEST(LheReader, FieldsRoundTripExactly) {
    std::istringstream in(two_particle_event);
    const auto events = LheReader(in).read_all();
    ASSERT_EQ(events.size(), 1u);
    const auto& ev = events[0];
    EXPECT_EQ(ev.line, 10u);
    EXPECT_EQ(ev.process_id, 7);
    EXPECT_EQ(ev.weight, 0.25);
    EXPECT_EQ(ev.scale, 91.1876);
    EXPECT_EQ(ev.alpha_qed, 0.0078125);
    EXPECT_EQ(ev.alpha_qcd, 0.118);
    ASSERT_EQ(ev.particles.size(), 2u);
    const auto& mu = ev.particles[0];
    EXPECT_EQ(mu.pdg, -13);
    EXPECT_EQ(mu.status, 1);
    EXPECT_EQ(mu.p, FourVector(13.0, 3.0, 4.0, 12.0));
    EXPECT_EQ(mu.p.mass2(), 0.0);
    EXPECT_EQ(ev.particles[1].spin, -1.0);
    const FourVector total = ev.particles[0].p + ev.particles[1].p;
    EXPECT_EQ(total.p.norm(), 0.0);
}

TEST(LheReader, TruncatedEventReportsLine) {
    const std::string text = "<LesHouchesEvents>\n<event>\n2 1 1 1 1 1\n-13 1 0 0 0 0 3 4 12 13 0 0 9\n";
    EXPECT_EQ(error_line(text), 4u);
    std::istringstream in(text);
    LheReader lenient(in, false);
    EXPECT_TRUE(lenient.read_all().empty());
    EXPECT_GE(lenient.skipped(), 1u);
    EXPECT_NE(lenient.warnings().front().find("truncated event block"), std::string::npos);
}

TEST(LheReader, ParticleCountMismatch) {
    EXPECT_EQ(error_line(event_file("<event>\n3 1 1 1 1 1\n-13 1 0 0 0 0 3 4 12 13 0 0 9\n</event>\n")), 5u);
    EXPECT_EQ(error_line(event_file("<event>\n1 1 1 1 1 1\n-13 1 0 0 0 0 3 4 12 13 0 0 9\n"
                                    "13 1 0 0 0 0 3 4 12 13 0 0 9\n</event>\n")),
              5u);
}

TEST(LheReader, NonNumericField) {
    const std::string text = event_file("<event>\n1 1 1 1 1 1\n-13 1 0 0 0 0 3 four 12 13 0 0 9\n</event>\n");
    std::istringstream in(text);
    try {
        LheReader(in).read_all();
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
        EXPECT_NE(std::string(e.what()).find("'four'"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("column 8"), std::string::npos);
    }
    EXPECT_EQ(error_line(event_file("<event>\n1 1 x 1 1 1\n-13 1 0 0 0 0 3 4 12 13 0 0 9\n</event>\n")), 3u);
    EXPECT_EQ(error_line(event_file("<event>\n1 1 1 1 1 1\n-13 1 0 0 0 0 3 4 12 13 0 0\n</event>\n")), 4u);
}

TEST(LheReader, BadMotherIndex) {
    EXPECT_EQ(error_line(event_file("<event>\n1 1 1 1 1 1\n-13 1 5 0 0 0 3 4 12 13 0 0 9\n</event>\n")), 4u);
    EXPECT_EQ(error_line(event_file("<event>\n1 1 1 1 1 1\n-13 1 1 0 0 0 3 4 12 13 0 0 9\n</event>\n")), 4u);
}

TEST(LheReader, MalformedHeader) {
    EXPECT_EQ(error_line("\n<Events>\n"), 2u);
    std::istringstream empty("");
    EXPECT_THROW(LheReader(empty, false).read_all(), ParseError);
    std::istringstream bad("<Events>\n");
    EXPECT_THROW(LheReader(bad, false).read_all(), ParseError);
}

TEST(LheReader, MissingClosingTag) {
    const std::string text = "<LesHouchesEvents>\n<event>\n1 1 1 1 1 1\n-13 1 0 0 0 0 3 4 12 13 0 0 9\n</event>\n";
    EXPECT_EQ(error_line(text), 5u);
    std::istringstream in(text);
    LheReader lenient(in, false);
    EXPECT_EQ(lenient.read_all().size(), 1u);
    EXPECT_EQ(lenient.skipped(), 1u);
}

TEST(LheReader, LenientSkipsBadEventsAndContinues) {
    const std::string text = event_file(
        "<event>\n1 1 1 1 1 1\n-13 1 0 0 0 0 3 4 12 13 0 0 9\n</event>\n"
        "<event>\n1 1 1 1 1 1\n-13 1 0 0 0 0 3 bad 12 13 0 0 9\n</event>\n"
        "<event>\n1 2 1 1 1 1\n13 1 0 0 0 0 3 4 12 13 0 0 9\n</event>\n");
    std::istringstream in(text);
    LheReader r(in, false);
    const auto events = r.read_all();
    ASSERT_EQ(events.size(), 2u);
    EXPECT_EQ(events[1].process_id, 2);
    ASSERT_EQ(r.skipped(), 1u);
    EXPECT_NE(r.warnings()[0].find("line 6"), std::string::npos);
    EXPECT_NE(r.warnings()[0].find("line 8"), std::string::npos);
    EXPECT_EQ(error_line(text), 8u);
}

TEST(LheReader, UnexpectedContent) {
    EXPECT_EQ(error_line(event_file("stray text\n")), 2u);
    EXPECT_EQ(error_line(event_file("<event>\n1 1 1 1 1 1\n-13 1 0 0 0 0 3 4 12 13 0 0 9\n<event>\n")), 5u);
}

TEST(LheReader, UnreadableFile) { EXPECT_THROW(LheReader("/nonexistent/file.lhe"), DomainError); }

#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "kinematics.hpp"

namespace spintomo {

/// One particle row: id status mother1 mother2 color1 color2 px py pz E m lifetime spin.
struct LheParticle {
    int pdg = 0;
    int status = 0;
    int mother1 = 0;
    int mother2 = 0;
    int color1 = 0;
    int color2 = 0;
    FourVector p;
    double mass = 0.0;
    double lifetime = 0.0;
    double spin = 9.0;

    bool final_state() const noexcept { return status == 1; }
    bool operator==(const LheParticle&) const = default;
};

/// One `<event>` block. `line` is the line of the opening tag.
struct LheEvent {
    std::size_t line = 0;
    int process_id = 0;
    double weight = 1.0;
    double scale = 0.0;
    double alpha_qed = 0.0;
    double alpha_qcd = 0.0;
    std::vector<LheParticle> particles;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

inline bool starts_with_tag(std::string_view line, std::string_view tag) {
    return line.substr(0, tag.size()) == tag &&
           (line.size() == tag.size() || line[tag.size()] == '>' || line[tag.size()] == ' ' ||
            line[tag.size()] == '/');
}

}  // namespace detail

/**
 * Streaming reader for a minimal Les Houches event file. Only `<event>`
 * blocks are interpreted; `<header>` and `<init>` contents are skipped.
 * In strict mode every defect throws ParseError. In lenient mode a defective
 * event is skipped and reported through warnings(); file-level defects
 * (bad opening tag, unreadable stream) still throw.
 */
class LheReader {
public:
    explicit LheReader(std::istream& in, bool strict = true) : in_(&in), strict_(strict) {}

    explicit LheReader(const std::string& path, bool strict = true)
        : owned_(std::make_unique<std::ifstream>(path)), in_(owned_.get()), strict_(strict) {
        if (!*owned_) throw DomainError("cannot open event file '" + path + "'");
    }

    bool strict() const noexcept { return strict_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    std::size_t skipped() const noexcept { return warnings_.size(); }
    std::size_t line() const noexcept { return line_; }

    /// Next well-formed event, or nullopt at the end of the file.
    std::optional<LheEvent> next() {
        if (done_) return std::nullopt;
        std::string raw;
        while (read_line(raw)) {
            const std::string_view line = detail::trim(raw);
            if (line.empty()) continue;
            if (!seen_root_) {
                if (!detail::starts_with_tag(line, "<LesHouchesEvents"))
                    throw ParseError("malformed header: expected <LesHouchesEvents>", line_);
                seen_root_ = true;
                continue;
            }
            if (skip_until_) {
                if (line.find(*skip_until_) != std::string_view::npos) skip_until_.reset();
                continue;
            }
            if (detail::starts_with_tag(line, "<event")) {
                if (auto ev = read_event()) return ev;
                continue;
            }
            if (detail::starts_with_tag(line, "</LesHouchesEvents")) {
                closed_ = true;
                done_ = true;
                return std::nullopt;
            }
            if (detail::starts_with_tag(line, "<header")) {
                if (line.find("</header>") == std::string_view::npos) skip_until_ = "</header>";
                continue;
            }
            if (detail::starts_with_tag(line, "<init")) {
                if (line.find("</init>") == std::string_view::npos) skip_until_ = "</init>";
                continue;
            }
            if (line.front() == '#' || line.front() == '<') continue;
            fail_outside("unexpected content outside an event block: '" + std::string(line.substr(0, 40)) + "'");
        }
        done_ = true;
        if (!seen_root_) throw ParseError("malformed header: empty file", line_);
        if (!closed_) {
            if (skip_until_) fail_outside("truncated file: missing " + *skip_until_);
            else fail_outside("truncated file: missing </LesHouchesEvents>");
        }
        return std::nullopt;
    }

    /// Reads every remaining event.
    std::vector<LheEvent> read_all() {
        std::vector<LheEvent> out;
        while (auto ev = next()) out.push_back(std::move(*ev));
        return out;
    }

private:
    bool read_line(std::string& s) {
        if (!std::getline(*in_, s)) return false;
        ++line_;
        return true;
    }

    void fail_outside(const std::string& msg) {
        if (strict_) throw ParseError(msg, line_);
        warnings_.push_back(msg + " (line " + std::to_string(line_) + ")");
    }

    template <class T>
    T parse_number(std::string_view field, int column, const char* what) const {
        T value{};
        const char* first = field.data();
        const char* last = field.data() + field.size();
        if (!field.empty() && *first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last)
            throw ParseError(std::string("non-numeric ") + what + " field '" + std::string(field) + "' in column " +
                                 std::to_string(column),
                             line_);
        return value;
    }

    /// Parses one event body after its opening tag; nullopt when skipped in lenient mode.
    std::optional<LheEvent> read_event() {
        const std::size_t start = line_;
        try {
            return parse_event_body(start);
        } catch (const ParseError& e) {
            if (strict_) throw;
            warnings_.push_back(std::string("skipped event at line ") + std::to_string(start) + ": " + e.what());
            if (!in_event_) return std::nullopt;
            std::string raw;
            while (read_line(raw)) {
                if (detail::starts_with_tag(detail::trim(raw), "</event")) break;
            }
            in_event_ = false;
            return std::nullopt;
        }
    }

    LheEvent parse_event_body(std::size_t start) {
        in_event_ = true;
        LheEvent ev;
        ev.line = start;
        std::string raw;
        auto next_content = [&]() -> std::string_view {
            while (read_line(raw)) {
                const auto t = detail::trim(raw);
                if (!t.empty()) return t;
            }
            in_event_ = false;
            throw ParseError("truncated event block starting at line " + std::to_string(start), line_);
        };

        std::string_view head = next_content();
        if (detail::starts_with_tag(head, "</event")) {
            in_event_ = false;
            throw ParseError("empty event block", line_);
        }
        const auto hf = detail::split_ws(head);
        if (hf.size() < 6)
            throw ParseError("event header needs 6 fields (NUP IDPRUP XWGTUP SCALUP AQEDUP AQCDUP), found " +
                                 std::to_string(hf.size()),
                             line_);
        const int nup = parse_number<int>(hf[0], 1, "NUP");
        if (nup < 0) throw ParseError("negative particle count NUP", line_);
        ev.process_id = parse_number<int>(hf[1], 2, "IDPRUP");
        ev.weight = parse_number<double>(hf[2], 3, "XWGTUP");
        ev.scale = parse_number<double>(hf[3], 4, "SCALUP");
        ev.alpha_qed = parse_number<double>(hf[4], 5, "AQEDUP");
        ev.alpha_qcd = parse_number<double>(hf[5], 6, "AQCDUP");

        ev.particles.reserve(static_cast<std::size_t>(nup));
        for (int i = 0; i < nup; ++i) {
            const std::string_view row = next_content();
            if (detail::starts_with_tag(row, "</event")) {
                in_event_ = false;
                throw ParseError("particle count mismatch: NUP = " + std::to_string(nup) + " but " +
                                     std::to_string(i) + " particle rows found",
                                 line_);
            }
            const auto f = detail::split_ws(row);
            if (f.size() != 13)
                throw ParseError("particle row needs 13 fields, found " + std::to_string(f.size()), line_);
            LheParticle p;
            p.pdg = parse_number<int>(f[0], 1, "IDUP");
            p.status = parse_number<int>(f[1], 2, "ISTUP");
            p.mother1 = parse_number<int>(f[2], 3, "MOTHUP1");
            p.mother2 = parse_number<int>(f[3], 4, "MOTHUP2");
            p.color1 = parse_number<int>(f[4], 5, "ICOLUP1");
            p.color2 = parse_number<int>(f[5], 6, "ICOLUP2");
            const double px = parse_number<double>(f[6], 7, "PUP1");
            const double py = parse_number<double>(f[7], 8, "PUP2");
            const double pz = parse_number<double>(f[8], 9, "PUP3");
            const double e = parse_number<double>(f[9], 10, "PUP4");
            p.p = FourVector(e, px, py, pz);
            p.mass = parse_number<double>(f[10], 11, "PUP5");
            p.lifetime = parse_number<double>(f[11], 12, "VTIMUP");
            p.spin = parse_number<double>(f[12], 13, "SPINUP");
            if (p.mother1 < 0 || p.mother1 > nup || p.mother2 < 0 || p.mother2 > nup)
                throw ParseError("mother index out of range [0, " + std::to_string(nup) + "]", line_);
            if (p.mother1 == i + 1 || p.mother2 == i + 1) throw ParseError("particle is its own mother", line_);
            ev.particles.push_back(p);
        }
        // Optional trailing tags or comments until the closing tag.
        for (;;) {
            const std::string_view t = next_content();
            if (detail::starts_with_tag(t, "</event")) break;
            if (detail::starts_with_tag(t, "<event")) throw ParseError("missing </event> before next event", line_);
            if (t.front() == '#' || t.front() == '<') continue;
            throw ParseError("particle count mismatch: extra row after NUP = " + std::to_string(nup) + " particles",
                             line_);
        }
        in_event_ = false;
        return ev;
    }

    std::unique_ptr<std::ifstream> owned_;
    std::istream* in_;
    bool strict_;
    std::size_t line_ = 0;
    bool seen_root_ = false;
    bool closed_ = false;
    bool done_ = false;
    bool in_event_ = false;
    std::optional<std::string> skip_until_;
    std::vector<std::string> warnings_;
};

}  // namespace spintomo

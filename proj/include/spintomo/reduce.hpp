#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "event_engine.hpp"
#include "kinematics.hpp"
#include "lhe.hpp"

namespace spintomo {

/// One decaying parent: the probe daughter whose direction is recorded and its decay partner.
struct ParentSpec {
    std::string name;
    int pdg = 0;                                   ///< parent id, used when mother links are present
    std::vector<std::pair<int, int>> daughters;    ///< allowed (probe, partner) id pairs
    std::optional<std::pair<double, double>> mass_window;  ///< GeV, inclusive
};

/// Two-parent decay topology plus the lab beam direction.
struct ChannelConfig {
    std::string name;
    ParentSpec first;   ///< defines the z axis
    ParentSpec second;
    Vec3 beam = Vec3::UnitZ();
    bool use_event_weights = false;
};

inline ParentSpec parent_w_plus() { return {"W+", 24, {{-11, 12}, {-13, 14}, {-15, 16}}, std::nullopt}; }
inline ParentSpec parent_w_minus() { return {"W-", -24, {{11, -12}, {13, -14}, {15, -16}}, std::nullopt}; }
inline ParentSpec parent_z(bool window = true) {
    ParentSpec z{"Z", 23, {{-11, 11}, {-13, 13}, {-15, 15}}, std::nullopt};
    if (window) z.mass_window = std::pair{80.0, 100.0};
    return z;
}

/// Presets WW (W+ W-), ZZ and WZ (W+ Z). Probes are the l+ for W+ and Z, the l- for W-.
inline ChannelConfig channel_config(const std::string& name, const Vec3& beam = Vec3::UnitZ(), bool z_window = true) {
    ChannelConfig c;
    c.name = name;
    c.beam = beam;
    if (name == "WW") {
        c.first = parent_w_plus();
        c.second = parent_w_minus();
    } else if (name == "ZZ") {
        c.first = parent_z(z_window);
        c.second = parent_z(z_window);
    } else if (name == "WZ") {
        c.first = parent_w_plus();
        c.second = parent_z(z_window);
    } else {
        throw DomainError("unknown channel '" + name + "' (expected WW, ZZ or WZ)");
    }
    return c;
}

/// Parses "+z", "-z", "+x", ... into a unit vector.
inline Vec3 parse_beam(const std::string& s) {
    require(s.size() == 2 && (s[0] == '+' || s[0] == '-'), "beam direction must be one of +x,-x,+y,-y,+z,-z");
    const double sign = s[0] == '+' ? 1.0 : -1.0;
    switch (s[1]) {
        case 'x': return sign * Vec3::UnitX();
        case 'y': return sign * Vec3::UnitY();
        case 'z': return sign * Vec3::UnitZ();
        default: throw DomainError("beam direction must be one of +x,-x,+y,-y,+z,-z");
    }
}

struct ParentCandidate {
    std::size_t probe = 0;
    std::size_t partner = 0;
    FourVector momentum;
};

namespace detail {

inline std::optional<int> partner_of(const ParentSpec& spec, int probe_pdg) {
    for (const auto& [probe, partner] : spec.daughters)
        if (probe == probe_pdg) return partner;
    return std::nullopt;
}

inline bool is_child_of(const LheParticle& p, std::size_t parent_index) {
    const int idx = static_cast<int>(parent_index) + 1;
    return p.mother1 == idx || p.mother2 == idx;
}

/**
 * Daughters of a parent: first through mother links to a parent record,
 * otherwise the first unused final-state probe (file order) with an
 * unused partner.
 */
inline ParentCandidate find_parent(const LheEvent& ev, const ParentSpec& spec, std::vector<bool>& used) {
    const auto& ps = ev.particles;
    auto match_pair = [&](auto&& accept) -> std::optional<ParentCandidate> {
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (used[i] || !ps[i].final_state() || !accept(ps[i])) continue;
            const auto partner = partner_of(spec, ps[i].pdg);
            if (!partner) continue;
            for (std::size_t j = 0; j < ps.size(); ++j) {
                if (j == i || used[j] || !ps[j].final_state() || ps[j].pdg != *partner || !accept(ps[j])) continue;
                return ParentCandidate{i, j, ps[i].p + ps[j].p};
            }
        }
        return std::nullopt;
    };
    for (std::size_t m = 0; m < ps.size(); ++m) {
        if (ps[m].pdg != spec.pdg) continue;
        if (auto c = match_pair([&](const LheParticle& p) { return is_child_of(p, m); })) {
            used[c->probe] = used[c->partner] = true;
            return *c;
        }
    }
    if (auto c = match_pair([](const LheParticle&) { return true; })) {
        used[c->probe] = used[c->partner] = true;
        return *c;
    }
    throw DomainError("pattern not found: no " + spec.name + " decay candidate in event at line " +
                      std::to_string(ev.line));
}

inline void require_timelike(const FourVector& q, const std::string& what, std::size_t line) {
    if (!(q.mass2() > 0.0) || !(q.e > 0.0))
        throw DomainError("spacelike " + what + " candidate (m^2 = " + std::to_string(q.mass2()) +
                          " GeV^2) in event at line " + std::to_string(line));
}

inline bool in_window(const ParentSpec& spec, const FourVector& q) {
    if (!spec.mass_window) return true;
    const double m = q.mass();
    return m >= spec.mass_window->first && m <= spec.mass_window->second;
}

}  // namespace detail

/**
 * Reduces one event to the two probe directions. Each parent is the sum of
 * its daughters. In the pair centre-of-mass frame k is the first parent's
 * direction and p the boosted beam direction, giving the basis {n, r, k}.
 * Probes are then boosted from the CM frame into their parent's rest frame
 * (a boost along k, which leaves n and r unchanged) and expressed as
 * (cos theta, phi) with phi measured from n toward r. Returns nullopt when
 * a mass window rejects the event.
 */
inline std::optional<EventRecord> reduce_event(const LheEvent& ev, const ChannelConfig& cfg) {
    std::vector<bool> used(ev.particles.size(), false);
    const auto c1 = detail::find_parent(ev, cfg.first, used);
    const auto c2 = detail::find_parent(ev, cfg.second, used);
    detail::require_timelike(c1.momentum, cfg.first.name + " parent", ev.line);
    detail::require_timelike(c2.momentum, cfg.second.name + " parent", ev.line);
    if (!detail::in_window(cfg.first, c1.momentum) || !detail::in_window(cfg.second, c2.momentum)) return std::nullopt;

    const FourVector pair = c1.momentum + c2.momentum;
    detail::require_timelike(pair, "parent pair", ev.line);
    const Vec3 to_cm = -pair.velocity();
    const FourVector p1 = boost(c1.momentum, to_cm), p2 = boost(c2.momentum, to_cm);
    const FourVector beam = boost(FourVector(1.0, cfg.beam.normalized()), to_cm);
    const BeamBasis basis = build_beam_basis(p1.p, beam.p);

    auto probe_direction = [&](const ParentCandidate& c, const FourVector& parent_cm) {
        const FourVector probe_cm = boost(ev.particles[c.probe].p, to_cm);
        const FourVector probe_rest = boost(probe_cm, -parent_cm.velocity());
        return basis.direction_of(probe_rest.p);
    };
    EventRecord out{probe_direction(c1, p1), probe_direction(c2, p2), 1.0};
    if (cfg.use_event_weights) out.weight = ev.weight;
    return out;
}

struct ReduceStats {
    std::size_t read = 0;
    std::size_t kept = 0;
    std::size_t outside_window = 0;
    std::size_t failed = 0;
    std::vector<std::string> messages;
};

/**
 * Streams every event of `reader` through reduce_event into `sink`, in
 * input order. Reduction failures throw in strict mode and are counted and
 * skipped otherwise.
 */
template <class Sink>
ReduceStats reduce_stream(LheReader& reader, const ChannelConfig& cfg, Sink&& sink) {
    ReduceStats st;
    while (auto ev = reader.next()) {
        ++st.read;
        try {
            if (auto rec = reduce_event(*ev, cfg)) {
                ++st.kept;
                sink(*rec);
            } else {
                ++st.outside_window;
            }
        } catch (const DomainError& e) {
            if (reader.strict()) throw;
            ++st.failed;
            st.messages.push_back(e.what());
        }
    }
    for (const auto& w : reader.warnings()) st.messages.push_back(w);
    return st;
}

}  // namespace spintomo

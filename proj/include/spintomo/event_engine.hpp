#pragma once

#include <cstdint>
#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bloch_state.hpp"
#include "decay_models.hpp"
#include "wigner_symbols.hpp"

namespace spintomo {

/// Daughter direction(s) in the parent rest frame(s).
struct EventRecord {
    Direction n1;
    std::optional<Direction> n2;
    double weight = 1.0;

    bool operator==(const EventRecord& o) const {
        auto same = [](const Direction& x, const Direction& y) { return x.cos_theta == y.cos_theta && x.phi == y.phi; };
        return same(n1, o.n1) && n2.has_value() == o.n2.has_value() && (!n2 || same(*n2, *o.n2)) &&
               weight == o.weight;
    }
};

struct SamplingOptions {
    std::uint64_t seed = 0;
    int threads = 1;
    /// Events per independent RNG substream. Output depends on this, not on `threads`.
    std::size_t chunk_size = std::size_t{1} << 16;
};

struct SamplingStats {
    std::uint64_t trials = 0;
    std::uint64_t accepted = 0;
    double acceptance() const { return trials ? static_cast<double>(accepted) / static_cast<double>(trials) : 0.0; }
};

namespace detail {

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    return std::mt19937_64(seq);
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Direction uniform_direction(std::mt19937_64& rng) {
    const double c = 2.0 * uniform01(rng) - 1.0;
    return {c, two_pi * uniform01(rng)};
}

/**
 * Runs make_chunk(chunk_index, count) for every chunk, `threads` at a time,
 * and hands results to `sink` in chunk order.
 */
template <class MakeChunk, class Sink>
void run_chunks(std::size_t n, const SamplingOptions& opt, MakeChunk&& make_chunk, Sink&& sink) {
    require(opt.chunk_size > 0, "sampling: chunk size must be positive");
    const std::size_t n_chunks = (n + opt.chunk_size - 1) / opt.chunk_size;
    const std::size_t width = static_cast<std::size_t>(std::max(1, opt.threads));
    for (std::size_t first = 0; first < n_chunks; first += width) {
        const std::size_t last = std::min(n_chunks, first + width);
        std::vector<std::vector<EventRecord>> out(last - first);
        std::vector<SamplingStats> stats(last - first);
        auto job = [&](std::size_t c) {
            const std::size_t count = std::min(opt.chunk_size, n - c * opt.chunk_size);
            out[c - first] = make_chunk(c, count, stats[c - first]);
        };
        if (last - first == 1) {
            job(first);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t c = first; c < last; ++c) pool.emplace_back(job, c);
        }
        for (std::size_t c = first; c < last; ++c) sink(std::span<const EventRecord>(out[c - first]), stats[c - first]);
    }
}

inline void require_sampleable(const BlochState& rho) {
    const auto v = check_validity(rho);
    if (!v.valid) {
        std::string why = "sampling: density matrix is not valid";
        for (const auto& r : v.reasons) why += "; " + r;
        throw DomainError(why);
    }
}

}  // namespace detail

/// Chunked single-parent sampler; `sink` receives spans of events in deterministic order.
template <class Sink>
SamplingStats sample_single_chunks(const BlochState& rho, const MeasurementModel& model, std::size_t n,
                                   const SamplingOptions& opt, Sink&& sink) {
    require(!rho.is_bipartite(), "sample_single: state must be single-particle");
    require(rho.dim1() == model.dim, "sample_single: model dimension does not match state");
    detail::require_sampleable(rho);
    const SymbolSet symbols = q_symbols(model);
    const double tr = model.trace();
    const double base = tr / model.dim;
    SamplingStats total;
    auto make = [&](std::size_t chunk, std::size_t count, SamplingStats& st) {
        auto rng = detail::substream(opt.seed, chunk);
        std::vector<EventRecord> ev;
        ev.reserve(count);
        RVector q(symbols.size());
        while (ev.size() < count) {
            const Direction n = detail::uniform_direction(rng);
            symbols.q(n, q.data());
            // tr(F_n rho)/tr(F) <= lambda_max(F)/tr(F) <= 1
            const double accept = (base + rho.a.dot(q)) / tr;
            ++st.trials;
            if (detail::uniform01(rng) < accept) ev.push_back({n, std::nullopt, 1.0});
        }
        st.accepted = count;
        return ev;
    };
    detail::run_chunks(n, opt, make, [&](std::span<const EventRecord> s, const SamplingStats& st) {
        total.trials += st.trials;
        total.accepted += st.accepted;
        sink(s);
    });
    return total;
}

/**
 * Chunked bipartite sampler for the joint four-angle pdf (d1 d2/(4 pi)^2) tr(rho F_A (x) F_B).
 * n1 is drawn from its marginal (d1/4pi) tr(F_A rho_A)/tr(F_A), then n2 from the conditional,
 * whose envelope is tr(F_A rho_A) tr(F_B) since F_B <= tr(F_B) I.
 */
template <class Sink>
SamplingStats sample_bipartite_chunks(const BlochState& rho, const MeasurementModel& model_a,
                                      const MeasurementModel& model_b, std::size_t n, const SamplingOptions& opt,
                                      Sink&& sink) {
    require(rho.is_bipartite(), "sample_bipartite: state must be bipartite");
    require(rho.dim1() == model_a.dim && rho.dim2() == model_b.dim,
            "sample_bipartite: model dimensions do not match state");
    detail::require_sampleable(rho);
    const SymbolSet sa = q_symbols(model_a), sb = q_symbols(model_b);
    const double ta = model_a.trace(), tb = model_b.trace();
    const double base_a = ta / model_a.dim;
    const double base_b = tb / model_b.dim;
    const RVector wb = rho.b * base_a;
    SamplingStats total;
    auto make = [&](std::size_t chunk, std::size_t count, SamplingStats& st) {
        auto rng = detail::substream(opt.seed, chunk);
        std::vector<EventRecord> ev;
        ev.reserve(count);
        RVector qa(sa.size()), qb(sb.size()), coupling(sb.size());
        while (ev.size() < count) {
            const Direction n1 = detail::uniform_direction(rng);
            sa.q(n1, qa.data());
            // tr(F_A,n1 rho_A)
            const double marginal = base_a + rho.a.dot(qa);
            ++st.trials;
            if (!(detail::uniform01(rng) * ta < marginal)) continue;
            // tr((F_A,n1 (x) F_B,n2) rho) = base_b * marginal + (wb + c^T qa) . qb
            coupling.noalias() = rho.c.transpose() * qa;
            coupling += wb;
            const double fixed = base_b * marginal;
            const double envelope = marginal * tb;
            for (;;) {
                const Direction n2 = detail::uniform_direction(rng);
                sb.q(n2, qb.data());
                ++st.trials;
                if (detail::uniform01(rng) * envelope < fixed + coupling.dot(qb)) {
                    ev.push_back({n1, n2, 1.0});
                    break;
                }
            }
        }
        st.accepted = count;
        return ev;
    };
    detail::run_chunks(n, opt, make, [&](std::span<const EventRecord> s, const SamplingStats& st) {
        total.trials += st.trials;
        total.accepted += st.accepted;
        sink(s);
    });
    return total;
}

inline std::vector<EventRecord> sample_single(const BlochState& rho, const MeasurementModel& model, std::size_t n,
                                              const SamplingOptions& opt, SamplingStats* stats = nullptr) {
    std::vector<EventRecord> out;
    out.reserve(n);
    const auto st = sample_single_chunks(rho, model, n, opt,
                                         [&](std::span<const EventRecord> s) { out.insert(out.end(), s.begin(), s.end()); });
    if (stats) *stats = st;
    return out;
}

inline std::vector<EventRecord> sample_bipartite(const BlochState& rho, const MeasurementModel& model_a,
                                                 const MeasurementModel& model_b, std::size_t n,
                                                 const SamplingOptions& opt, SamplingStats* stats = nullptr) {
    std::vector<EventRecord> out;
    out.reserve(n);
    const auto st = sample_bipartite_chunks(
        rho, model_a, model_b, n, opt, [&](std::span<const EventRecord> s) { out.insert(out.end(), s.begin(), s.end()); });
    if (stats) *stats = st;
    return out;
}

struct ReferenceState {
    std::string name;
    BlochState state;
    std::map<std::string, double> params;
};

namespace detail {

inline BlochState pure_bipartite(int d1, int d2, const std::vector<std::pair<int, double>>& amplitudes) {
    CVector psi = CVector::Zero(d1 * d2);
    for (const auto& [idx, amp] : amplitudes) psi[idx] = amp;
    psi.normalize();
    return density_to_bloch(psi * psi.adjoint(), {d1, d2});
}

}  // namespace detail

/// (|+>|-> - |0>|0> + |->|+>)/sqrt3, basis order |+>, |0>, |->.
inline BlochState singlet3() { return detail::pure_bipartite(3, 3, {{2, 1.0}, {4, -1.0}, {6, 1.0}}); }
/// (|->|-> + |+>|+>)/sqrt2.
inline BlochState bell2_qutrit() { return detail::pure_bipartite(3, 3, {{0, 1.0}, {8, 1.0}}); }
inline BlochState separable_pp() { return detail::pure_bipartite(3, 3, {{0, 1.0}}); }
inline BlochState maxmixed9() { return BlochState::bipartite(3, 3); }
/// (|00> + |11>)/sqrt2: c = diag(1, -1, 1)/4.
inline BlochState bell_phi_plus_qubit() { return detail::pure_bipartite(2, 2, {{0, 1.0}, {3, 1.0}}); }
/// (|01> + |10>)/sqrt2: c = diag(1, 1, -1)/4.
inline BlochState bell_psi_plus_qubit() { return detail::pure_bipartite(2, 2, {{1, 1.0}, {2, 1.0}}); }
/// alpha * singlet + (1 - alpha) * I/9.
inline BlochState werner(double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, "werner: alpha must be in [0, 1]");
    return mix(singlet3(), maxmixed9(), alpha);
}
/// p * Phi+ + (1 - p) * I/4.
inline BlochState werner_qubit(double p) {
    require(p >= 0.0 && p <= 1.0, "werner_qubit: p must be in [0, 1]");
    return mix(bell_phi_plus_qubit(), BlochState::bipartite(2, 2), p);
}

/**
 * Reference states by name: singlet3, bell2_qutrit, separable_pp, maxmixed9,
 * bell_phi_plus_qubit, bell_psi_plus_qubit, werner:alpha=A, werner_qubit:p=P,
 * basis:d=D,level=L (pure single-particle basis state), maxmixed:d=D,
 * qubit:ax=..,ay=..,az=.. (single qubit Bloch vector).
 */
inline ReferenceState reference_state(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string ctx = "state '" + spec + "'";
    auto kv = detail::parse_kv(colon == std::string::npos ? "" : spec.substr(colon + 1), ctx);
    ReferenceState r{spec, BlochState{}, {}};
    auto take = [&](const std::string& key) {
        const double v = detail::take(kv, key, ctx);
        r.params[key] = v;
        return v;
    };
    auto opt = [&](const std::string& key, double def) { return kv.count(key) ? take(key) : (r.params[key] = def); };
    if (head == "singlet3") {
        r.state = singlet3();
    } else if (head == "bell2_qutrit") {
        r.state = bell2_qutrit();
    } else if (head == "separable_pp") {
        r.state = separable_pp();
    } else if (head == "maxmixed9") {
        r.state = maxmixed9();
    } else if (head == "bell_phi_plus_qubit") {
        r.state = bell_phi_plus_qubit();
    } else if (head == "bell_psi_plus_qubit") {
        r.state = bell_psi_plus_qubit();
    } else if (head == "werner") {
        r.state = werner(take("alpha"));
    } else if (head == "werner_qubit") {
        r.state = werner_qubit(take("p"));
    } else if (head == "basis") {
        const int d = static_cast<int>(take("d"));
        const int level = static_cast<int>(opt("level", 0));
        require(d >= 2 && d <= max_dim && level >= 0 && level < d, ctx + ": dimension or level out of range");
        CMatrix rho = CMatrix::Zero(d, d);
        rho(level, level) = 1.0;
        r.state = density_to_bloch(rho, {d});
    } else if (head == "maxmixed") {
        const int d = static_cast<int>(take("d"));
        r.state = BlochState::single(d);
    } else if (head == "qubit") {
        r.state = BlochState::single(2, RVector{{opt("ax", 0.0), opt("ay", 0.0), opt("az", 0.0)}});
    } else {
        throw DomainError("unknown reference state '" + spec + "'");
    }
    detail::require_empty(kv, ctx);
    return r;
}

}  // namespace spintomo

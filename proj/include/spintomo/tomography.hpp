#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "bloch_state.hpp"
#include "event_engine.hpp"
#include "wigner_symbols.hpp"

namespace spintomo {

/// Raised when the symbols cannot be inverted; carries the gram diagnosis.
class ReconstructionRefused : public DomainError {
public:
    using DomainError::DomainError;
};

/// Neumaier-compensated sum.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    void merge(const KahanSum& o) {
        add(o.sum);
        add(o.comp);
    }
    double value() const { return sum + comp; }
};

enum class EstimatorKind { single, bipartite, identical };

inline const char* to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::single: return "single";
        case EstimatorKind::bipartite: return "bipartite";
        case EstimatorKind::identical: return "identical";
    }
    return "?";
}

/**
 * Weighted running sums of the per-event estimator terms t and t^2 for the
 * a, b and c parameters. Mergeable; merge(A, B) equals accumulating both
 * streams into one accumulator up to compensated rounding.
 */
class Accumulator {
public:
    Accumulator() = default;
    Accumulator(EstimatorKind kind, std::vector<int> dims) : kind_(kind), dims_(std::move(dims)) {
        const std::size_t n1 = static_cast<std::size_t>(dims_.at(0) * dims_.at(0) - 1);
        sa_.resize(n1);
        sa2_.resize(n1);
        if (kind_ != EstimatorKind::single) {
            const std::size_t n2 = static_cast<std::size_t>(dims_.at(1) * dims_.at(1) - 1);
            sb_.resize(n2);
            sb2_.resize(n2);
            sc_.resize(n1 * n2);
            sc2_.resize(n1 * n2);
        }
    }

    EstimatorKind kind() const noexcept { return kind_; }
    const std::vector<int>& dims() const noexcept { return dims_; }
    bool symmetrized() const noexcept { return kind_ == EstimatorKind::identical; }
    std::uint64_t count() const noexcept { return count_; }
    double sum_weights() const { return sw_.value(); }
    double effective_count() const {
        const double w2 = sw2_.value();
        return w2 > 0.0 ? sum_weights() * sum_weights() / w2 : 0.0;
    }

    /// Adds one event's terms. tb/tc are ignored for single; tc is row-major n1 x n2.
    void add(const double* ta, const double* tb, const double* tc, double w) {
        ++count_;
        sw_.add(w);
        sw2_.add(w * w);
        for (std::size_t i = 0; i < sa_.size(); ++i) {
            sa_[i].add(w * ta[i]);
            sa2_[i].add(w * ta[i] * ta[i]);
        }
        if (kind_ == EstimatorKind::bipartite) {
            for (std::size_t j = 0; j < sb_.size(); ++j) {
                sb_[j].add(w * tb[j]);
                sb2_[j].add(w * tb[j] * tb[j]);
            }
        }
        if (kind_ != EstimatorKind::single) {
            const std::size_t n2 = sb_.size();
            for (std::size_t i = 0; i < sa_.size(); ++i) {
                // identical: only i <= j is stored, the rest mirrored at the end
                for (std::size_t j = (kind_ == EstimatorKind::identical ? i : 0); j < n2; ++j) {
                    const double t = tc[i * n2 + j];
                    sc_[i * n2 + j].add(w * t);
                    sc2_[i * n2 + j].add(w * t * t);
                }
            }
        }
    }

    void merge(const Accumulator& o) {
        require(kind_ == o.kind_ && dims_ == o.dims_, "Accumulator::merge: configuration mismatch");
        if (o.count_ == 0) return;
        if (count_ == 0) {
            *this = o;
            return;
        }
        count_ += o.count_;
        sw_.merge(o.sw_);
        sw2_.merge(o.sw2_);
        auto m = [](std::vector<KahanSum>& x, const std::vector<KahanSum>& y) {
            for (std::size_t i = 0; i < x.size(); ++i) x[i].merge(y[i]);
        };
        m(sa_, o.sa_);
        m(sa2_, o.sa2_);
        m(sb_, o.sb_);
        m(sb2_, o.sb2_);
        m(sc_, o.sc_);
        m(sc2_, o.sc2_);
    }

    /// Weighted mean and standard error of the term stored at (sum, sum_sq).
    std::pair<double, double> estimate(const KahanSum& s, const KahanSum& s2) const {
        const double w = sum_weights();
        const double mean = s.value() / w;
        const double n = effective_count();
        double var = s2.value() / w - mean * mean;
        var = std::max(var, 0.0);
        if (n > 1.0) var *= n / (n - 1.0);
        return {mean, std::sqrt(var / n)};
    }

    const std::vector<KahanSum>& sum_a() const noexcept { return sa_; }
    const std::vector<KahanSum>& sum_a2() const noexcept { return sa2_; }
    const std::vector<KahanSum>& sum_b() const noexcept { return sb_; }
    const std::vector<KahanSum>& sum_b2() const noexcept { return sb2_; }
    const std::vector<KahanSum>& sum_c() const noexcept { return sc_; }
    const std::vector<KahanSum>& sum_c2() const noexcept { return sc2_; }

private:
    EstimatorKind kind_ = EstimatorKind::single;
    std::vector<int> dims_;
    std::uint64_t count_ = 0;
    KahanSum sw_, sw2_;
    std::vector<KahanSum> sa_, sa2_, sb_, sb2_, sc_, sc2_;
};

inline Accumulator merge(Accumulator a, const Accumulator& b) {
    a.merge(b);
    return a;
}

/// Reconstructed parameters with per-parameter standard errors.
struct Reconstruction {
    BlochState state;
    RVector errors_a;
    RVector errors_b;
    RMatrix errors_c;
    std::uint64_t n_events = 0;
    double sum_weights = 0.0;
    double effective_events = 0.0;
    std::vector<std::string> model_names;
    bool symmetrized = false;
};

/**
 * Event-average estimators a = (1/2)<P>, c = (1/4)<P_A P_B>. The identical
 * estimator averages over the label exchange:
 *   a = b = (1/4)<P(n1) + P(n2)>,  c_ij = c_ji = (1/8)<P_i(n1) P_j(n2) + P_j(n1) P_i(n2)>.
 */
class Tomographer {
public:
    static Tomographer single(const SymbolSet& s) { return Tomographer(EstimatorKind::single, {s}); }
    static Tomographer bipartite(const SymbolSet& a, const SymbolSet& b) {
        return Tomographer(EstimatorKind::bipartite, {a, b});
    }
    static Tomographer identical(const SymbolSet& a, const SymbolSet& b) {
        require(a.dim() == b.dim(), "reconstruct_identical: particles must have equal dimension");
        return Tomographer(EstimatorKind::identical, {a, b});
    }

    EstimatorKind kind() const noexcept { return kind_; }
    std::vector<int> dims() const {
        std::vector<int> d;
        for (const auto& s : symbols_) d.push_back(s.dim());
        return d;
    }

    Accumulator make_accumulator() const { return Accumulator(kind_, dims()); }

    void add(Accumulator& acc, const EventRecord& e) const {
        const auto& s1 = symbols_[0];
        const int n1 = s1.size();
        std::array<double, max_dim * max_dim> p1{}, p2{}, ta{}, tb{};
        s1.p(e.n1, p1.data());
        if (kind_ == EstimatorKind::single) {
            for (int i = 0; i < n1; ++i) ta[i] = 0.5 * scale_[0] * p1[i];
            acc.add(ta.data(), nullptr, nullptr, e.weight);
            return;
        }
        require(e.n2.has_value(), "tomography: bipartite reconstruction needs events with a second direction");
        const auto& s2 = symbols_[1];
        const int n2 = s2.size();
        s2.p(*e.n2, p2.data());
        for (int i = 0; i < n1; ++i) p1[i] *= scale_[0];
        for (int j = 0; j < n2; ++j) p2[j] *= scale_[1];
        tc_.resize(static_cast<std::size_t>(n1 * n2));
        if (kind_ == EstimatorKind::bipartite) {
            for (int i = 0; i < n1; ++i) ta[i] = 0.5 * p1[i];
            for (int j = 0; j < n2; ++j) tb[j] = 0.5 * p2[j];
            for (int i = 0; i < n1; ++i)
                for (int j = 0; j < n2; ++j) tc_[static_cast<std::size_t>(i * n2 + j)] = 0.25 * p1[i] * p2[j];
        } else {
            for (int i = 0; i < n1; ++i) ta[i] = 0.25 * (p1[i] + p2[i]);
            for (int i = 0; i < n1; ++i)
                for (int j = i; j < n2; ++j)
                    tc_[static_cast<std::size_t>(i * n2 + j)] = 0.125 * (p1[i] * p2[j] + p1[j] * p2[i]);
        }
        acc.add(ta.data(), tb.data(), tc_.data(), e.weight);
    }

    void accumulate(Accumulator& acc, std::span<const EventRecord> events) const {
        for (const auto& e : events) add(acc, e);
    }

    /**
     * Accumulates fixed-size shards (possibly in parallel) and merges them
     * in shard order, so the result does not depend on `threads`.
     */
    Accumulator accumulate_sharded(std::span<const EventRecord> events, int threads = 1,
                                   std::size_t shard_size = std::size_t{1} << 16) const {
        require(shard_size > 0, "tomography: shard size must be positive");
        const std::size_t n_shards = (events.size() + shard_size - 1) / shard_size;
        std::vector<Accumulator> parts(n_shards, make_accumulator());
        auto job = [&](std::size_t first, std::size_t stride) {
            Tomographer local = *this;
            for (std::size_t s = first; s < n_shards; s += stride) {
                const std::size_t lo = s * shard_size, hi = std::min(events.size(), lo + shard_size);
                local.accumulate(parts[s], events.subspan(lo, hi - lo));
            }
        };
        const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n_shards);
        if (width <= 1) {
            job(0, 1);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < width; ++t) pool.emplace_back(job, t, width);
        }
        Accumulator total = make_accumulator();
        for (const auto& p : parts) total.merge(p);
        return total;
    }

    Reconstruction finish(const Accumulator& acc) const {
        require(acc.count() > 0, "tomography: no events");
        require(acc.sum_weights() > 0.0, "tomography: total event weight must be positive");
        require(acc.kind() == kind_ && acc.dims() == dims(), "tomography: accumulator does not match estimator");
        Reconstruction r;
        r.n_events = acc.count();
        r.sum_weights = acc.sum_weights();
        r.effective_events = acc.effective_count();
        r.symmetrized = kind_ == EstimatorKind::identical;
        for (const auto& s : symbols_) r.model_names.push_back(s.model().name);

        const int n1 = symbols_[0].size();
        RVector a(n1), ea(n1);
        for (int i = 0; i < n1; ++i)
            std::tie(a[i], ea[i]) = acc.estimate(acc.sum_a()[static_cast<std::size_t>(i)],
                                                 acc.sum_a2()[static_cast<std::size_t>(i)]);
        if (kind_ == EstimatorKind::single) {
            r.state = BlochState::single(symbols_[0].dim(), a);
            r.errors_a = ea;
            return r;
        }
        const int n2 = symbols_[1].size();
        RVector b(n2), eb(n2);
        if (kind_ == EstimatorKind::identical) {
            b = a;
            eb = ea;
        } else {
            for (int j = 0; j < n2; ++j)
                std::tie(b[j], eb[j]) = acc.estimate(acc.sum_b()[static_cast<std::size_t>(j)],
                                                     acc.sum_b2()[static_cast<std::size_t>(j)]);
        }
        RMatrix c(n1, n2), ec(n1, n2);
        for (int i = 0; i < n1; ++i) {
            for (int j = 0; j < n2; ++j) {
                if (kind_ == EstimatorKind::identical && j < i) continue;
                const auto k = static_cast<std::size_t>(i * n2 + j);
                std::tie(c(i, j), ec(i, j)) = acc.estimate(acc.sum_c()[k], acc.sum_c2()[k]);
                if (kind_ == EstimatorKind::identical) {
                    c(j, i) = c(i, j);
                    ec(j, i) = ec(i, j);
                }
            }
        }
        r.state = BlochState::bipartite(symbols_[0].dim(), symbols_[1].dim(), a, b, c);
        r.errors_a = ea;
        r.errors_b = eb;
        r.errors_c = ec;
        return r;
    }

    Reconstruction reconstruct(std::span<const EventRecord> events, int threads = 1) const {
        require(!events.empty(), "tomography: no events");
        return finish(accumulate_sharded(events, threads));
    }

private:
    Tomographer(EstimatorKind kind, std::vector<SymbolSet> symbols) : kind_(kind), symbols_(std::move(symbols)) {
        for (auto& s : symbols_) {
            if (!s.inverted()) s.invert();
            if (!s.invertible()) throw ReconstructionRefused("reconstruction refused: " + s.diagnosis());
            // Unnormalized F (scalar convention) rescales the pdf by 1/tr(F).
            scale_.push_back(s.model().trace());
        }
    }

    EstimatorKind kind_;
    std::vector<SymbolSet> symbols_;
    std::vector<double> scale_;
    mutable std::vector<double> tc_;
};

inline Reconstruction reconstruct_single(std::span<const EventRecord> events, const SymbolSet& symbols,
                                         int threads = 1) {
    return Tomographer::single(symbols).reconstruct(events, threads);
}

inline Reconstruction reconstruct_bipartite(std::span<const EventRecord> events, const SymbolSet& a,
                                            const SymbolSet& b, int threads = 1) {
    return Tomographer::bipartite(a, b).reconstruct(events, threads);
}

inline Reconstruction reconstruct_identical(std::span<const EventRecord> events, const SymbolSet& a,
                                            const SymbolSet& b, int threads = 1) {
    return Tomographer::identical(a, b).reconstruct(events, threads);
}

}  // namespace spintomo

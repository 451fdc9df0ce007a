#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "event_engine.hpp"
#include "observables.hpp"
#include "tomography.hpp"

namespace spintomo {

/// The idealized qutrit-pair states of the analytic table, in row order.
inline std::vector<std::string> table2_states() { return {"singlet3", "bell2_qutrit", "separable_pp", "maxmixed9"}; }

/// "a:b:k" -> k equally spaced points from a to b inclusive.
inline std::vector<double> parse_scan(const std::string& text) {
    const auto c1 = text.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
    require(c2 != std::string::npos, "scan '" + text + "': expected start:stop:count");
    const double a = detail::parse_double(text.substr(0, c1), "scan start");
    const double b = detail::parse_double(text.substr(c1 + 1, c2 - c1 - 1), "scan stop");
    const double k = detail::parse_double(text.substr(c2 + 1), "scan count");
    require(k >= 2 && k == std::floor(k) && k <= 1e6, "scan '" + text + "': count must be an integer >= 2");
    const int n = static_cast<int>(k);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    out.back() = b;
    return out;
}

/// First sign change of y(x), located by linear interpolation; exact zeros are returned as is.
inline std::optional<double> zero_crossing(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), "zero_crossing: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] == 0.0) return x[i];
        if (i + 1 < x.size() && (y[i] < 0.0) != (y[i + 1] < 0.0) && y[i + 1] != 0.0)
            return x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]);
    }
    return std::nullopt;
}

/// Samples n events from `state` with the given models and reconstructs them.
inline Reconstruction sample_and_reconstruct(const BlochState& state, const MeasurementModel& model_a,
                                             const MeasurementModel& model_b, std::size_t n,
                                             const SamplingOptions& opt, bool identical = false) {
    const auto events = sample_bipartite(state, model_a, model_b, n, opt);
    const auto sa = make_symbols(model_a), sb = make_symbols(model_b);
    const auto tomo = identical ? Tomographer::identical(sa, sb) : Tomographer::bipartite(sa, sb);
    return tomo.reconstruct(events, opt.threads);
}

}  // namespace spintomo

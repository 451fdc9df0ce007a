#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "event_engine.hpp"
#include "lhe.hpp"
#include "observables.hpp"
#include "tomography.hpp"

namespace spintomo {

using json = nlohmann::json;

/// Significant digits for every number written to CSV or JSON.
inline constexpr int output_digits = 12;

/// x rounded to `output_digits` significant digits.
inline double round_output(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", output_digits, x);
    return std::strtod(buf, nullptr);
}

inline std::string format_output(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", output_digits, x);
    return buf;
}

/// phi rounded for output, kept inside [0, 2pi).
inline double round_phi(double phi) {
    const double r = round_output(phi);
    return r >= two_pi ? 0.0 : r;
}

inline json to_json_array(const RVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(round_output(v[i]));
    return a;
}

inline json to_json_array(const RMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(round_output(m(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline RVector vector_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw DomainError(std::string(what) + " must be an array of numbers");
    RVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw DomainError(std::string(what) + " must be an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline RMatrix matrix_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw DomainError(std::string(what) + " must be an array of rows");
    if (j.empty()) return RMatrix(0, 0);
    const std::size_t cols = j[0].size();
    RMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const RVector row = vector_from_json(j[i], what);
        if (static_cast<std::size_t>(row.size()) != cols) throw DomainError(std::string(what) + " rows differ in length");
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

inline json to_json(const BlochState& s) {
    json j;
    j["dims"] = s.dims;
    j["a"] = to_json_array(s.a);
    if (s.is_bipartite()) {
        j["b"] = to_json_array(s.b);
        j["c"] = to_json_array(s.c);
    }
    return j;
}

/// Reads {dims, a[, b, c]}; a reconstruction report is accepted too.
inline BlochState state_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dims") || !j.contains("a"))
        throw DomainError("state JSON needs 'dims' and 'a'");
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (dims.size() == 1) return BlochState::single(dims[0], vector_from_json(j.at("a"), "a"));
    if (dims.size() != 2) throw DomainError("state JSON: dims must have one or two entries");
    if (!j.contains("b") || !j.contains("c")) throw DomainError("bipartite state JSON needs 'b' and 'c'");
    return BlochState::bipartite(dims[0], dims[1], vector_from_json(j.at("a"), "a"), vector_from_json(j.at("b"), "b"),
                                 matrix_from_json(j.at("c"), "c"));
}

inline json to_json(const Reconstruction& r) {
    json j = to_json(r.state);
    j["errors_a"] = to_json_array(r.errors_a);
    if (r.state.is_bipartite()) {
        j["errors_b"] = to_json_array(r.errors_b);
        j["errors_c"] = to_json_array(r.errors_c);
    }
    j["n_events"] = r.n_events;
    j["sum_weights"] = round_output(r.sum_weights);
    j["effective_events"] = round_output(r.effective_events);
    j["model_names"] = r.model_names;
    j["symmetrized"] = r.symmetrized;
    return j;
}

inline json to_json(const ObservableReport& r) {
    json j;
    j["dims"] = r.dims;
    j["purity"] = round_output(r.purity);
    j["purity_direct"] = round_output(r.purity_direct);
    auto opt = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = round_output(*v);
    };
    opt("purity_a", r.purity_a);
    opt("purity_b", r.purity_b);
    opt("concurrence_bound", r.concurrence_bound);
    opt("concurrence_bound_trace", r.concurrence_bound_trace);
    opt("wootters_concurrence", r.wootters_concurrence);
    if (r.wootters_warning) j["wootters_warning"] = *r.wootters_warning;
    opt("chsh_max", r.chsh_max);
    opt("cglmp_xy", r.cglmp_xy);
    opt("cglmp_xz", r.cglmp_xz);
    opt("cglmp_yz", r.cglmp_yz);
    if (r.cglmp_max)
        j["cglmp_max"] = {{"value", round_output(r.cglmp_max->value)},
                          {"theta", round_output(r.cglmp_max->theta)},
                          {"phi", round_output(r.cglmp_max->phi)}};
    if (r.cglmp_max_independent) {
        json ang = json::array();
        for (double x : r.cglmp_max_independent->angles) ang.push_back(round_output(x));
        j["cglmp_max_independent"] = {{"value", round_output(r.cglmp_max_independent->value)}, {"angles", ang}};
    }
    j["eigenvalues"] = to_json_array(r.eigenvalues);
    j["valid"] = r.valid;
    j["reasons"] = r.reasons;
    if (r.exchange_symmetric) j["exchange_symmetric"] = *r.exchange_symmetric;
    opt("exchange_asymmetry", r.exchange_asymmetry);
    return j;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError("invalid JSON in '" + path + "': " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- events

enum class EventFormat { csv, jsonl };

inline const char* event_csv_header = "cos_theta1,phi1,cos_theta2,phi2,weight";

/// CSV for names ending in .csv, JSON lines otherwise.
inline EventFormat event_format_for(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "csv") return EventFormat::csv;
    if (ext == "jsonl" || ext == "json" || ext == "ndjson") return EventFormat::jsonl;
    throw DomainError("cannot infer event format from '" + path + "' (use .csv or .jsonl)");
}

inline void write_event(std::ostream& os, const EventRecord& e, EventFormat fmt) {
    if (fmt == EventFormat::csv) {
        os << format_output(e.n1.cos_theta) << ',' << format_output(round_phi(e.n1.phi)) << ',';
        if (e.n2) os << format_output(e.n2->cos_theta) << ',' << format_output(round_phi(e.n2->phi));
        else os << ',';
        os << ',' << format_output(e.weight) << '\n';
        return;
    }
    json j{{"cos_theta1", round_output(e.n1.cos_theta)}, {"phi1", round_phi(e.n1.phi)}};
    if (e.n2) {
        j["cos_theta2"] = round_output(e.n2->cos_theta);
        j["phi2"] = round_phi(e.n2->phi);
    }
    j["weight"] = round_output(e.weight);
    os << j.dump() << '\n';
}

/// Streaming event writer; the CSV header is written on construction.
class EventWriter {
public:
    EventWriter(const std::string& path, EventFormat fmt) : out_(path), fmt_(fmt) {
        if (!out_) throw DomainError("cannot write '" + path + "'");
        if (fmt_ == EventFormat::csv) out_ << event_csv_header << '\n';
    }
    explicit EventWriter(const std::string& path) : EventWriter(path, event_format_for(path)) {}

    void write(const EventRecord& e) {
        write_event(out_, e, fmt_);
        ++count_;
    }
    void write(std::span<const EventRecord> events) {
        for (const auto& e : events) write(e);
    }
    std::size_t count() const noexcept { return count_; }

private:
    std::ofstream out_;
    EventFormat fmt_;
    std::size_t count_ = 0;
};

namespace detail {

inline double parse_field(std::string_view s, std::size_t line, const char* column) {
    double v{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last)
        throw ParseError(std::string("non-numeric ") + column + " '" + std::string(s) + "'", line);
    return v;
}

inline void check_direction(const Direction& d, std::size_t line) {
    if (!(d.cos_theta >= -1.0 && d.cos_theta <= 1.0)) throw ParseError("cos_theta outside [-1, 1]", line);
    if (!(d.phi >= 0.0 && d.phi < two_pi)) throw ParseError("phi outside [0, 2pi)", line);
}

}  // namespace detail

/// Calls sink(EventRecord) for every row of a CSV event stream.
template <class Sink>
std::size_t read_events_csv(std::istream& in, Sink&& sink) {
    std::string raw;
    std::size_t line = 0, count = 0;
    if (!std::getline(in, raw)) throw ParseError("empty event file", 1);
    ++line;
    if (detail::trim(raw) != event_csv_header)
        throw ParseError(std::string("bad CSV header, expected '") + event_csv_header + "'", line);
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view row = detail::trim(raw);
        if (row.empty()) continue;
        std::vector<std::string_view> f;
        std::size_t start = 0;
        for (;;) {
            const auto comma = row.find(',', start);
            f.push_back(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (f.size() != 5) throw ParseError("expected 5 columns, found " + std::to_string(f.size()), line);
        EventRecord e;
        e.n1 = {detail::parse_field(f[0], line, "cos_theta1"), detail::parse_field(f[1], line, "phi1")};
        detail::check_direction(e.n1, line);
        if (!f[2].empty() || !f[3].empty()) {
            e.n2 = Direction{detail::parse_field(f[2], line, "cos_theta2"), detail::parse_field(f[3], line, "phi2")};
            detail::check_direction(*e.n2, line);
        }
        e.weight = detail::parse_field(f[4], line, "weight");
        sink(e);
        ++count;
    }
    return count;
}

template <class Sink>
std::size_t read_events_jsonl(std::istream& in, Sink&& sink) {
    std::string raw;
    std::size_t line = 0, count = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (detail::trim(raw).empty()) continue;
        json j;
        try {
            j = json::parse(raw);
        } catch (const json::parse_error&) {
            throw ParseError("invalid JSON record", line);
        }
        auto num = [&](const char* key) {
            if (!j.contains(key) || !j[key].is_number()) throw ParseError(std::string("missing numeric '") + key + "'", line);
            return j[key].get<double>();
        };
        EventRecord e;
        e.n1 = {num("cos_theta1"), num("phi1")};
        detail::check_direction(e.n1, line);
        if (j.contains("cos_theta2") || j.contains("phi2")) {
            e.n2 = Direction{num("cos_theta2"), num("phi2")};
            detail::check_direction(*e.n2, line);
        }
        e.weight = j.contains("weight") ? num("weight") : 1.0;
        sink(e);
        ++count;
    }
    return count;
}

template <class Sink>
std::size_t read_events(const std::string& path, Sink&& sink) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open event file '" + path + "'");
    if (event_format_for(path) == EventFormat::csv) return read_events_csv(in, sink);
    return read_events_jsonl(in, sink);
}

inline std::vector<EventRecord> read_events(const std::string& path) {
    std::vector<EventRecord> out;
    read_events(path, [&](const EventRecord& e) { out.push_back(e); });
    return out;
}

/// Sidecar path for an event file.
inline std::string metadata_path(const std::string& events_path) { return events_path + ".meta.json"; }

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace spintomo

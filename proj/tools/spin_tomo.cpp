#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <spintomo/spintomo.hpp>

using namespace spintomo;

namespace {

constexpr int exit_input = 1;
constexpr int exit_usage = 2;
constexpr int exit_refused = 3;

const std::vector<std::string> subcommands = {"symbols",     "generate", "reduce",   "reconstruct",
                                              "observables", "table2",   "bell-scan"};

int default_threads() {
    if (const char* env = std::getenv("SPIN_TOMO_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        out.push_back(s.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    // Presets carry "key=value" pairs after a colon, e.g. W+massive:v=0.5,scalar=1.
    std::vector<std::string> merged;
    for (auto& item : out) {
        if (!merged.empty() && item.find('=') != std::string::npos && item.find(':') == std::string::npos)
            merged.back() += "," + item;
        else
            merged.push_back(item);
    }
    return merged;
}

/// Output stream: the named file, or stdout when the path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path);
        if (!file_) throw DomainError("cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void write_json(const std::string& path, const json& j) {
    Output out(path);
    out.stream() << j.dump(2) << '\n';
}

std::vector<MeasurementModel> models_from(const std::string& list) {
    std::vector<MeasurementModel> out;
    for (const auto& name : split_list(list)) out.push_back(model_from_preset(name));
    require(out.size() == 1 || out.size() == 2, "--models takes one or two model presets");
    return out;
}

BlochState state_from_source(const std::string& path, const std::string& name) {
    require(path.empty() != name.empty(), "give exactly one of --in and --state");
    if (!name.empty()) return reference_state(name).state;
    return state_from_json(read_json_file(path));
}

// ------------------------------------------------------------------ symbols

struct SymbolsArgs {
    std::string which;
    int grid = 100;
    std::string format;
    std::string out;
};

json expansion_json(const std::vector<MonomialExpansion>& ex, const GgmBasis& basis) {
    json arr = json::array();
    for (std::size_t i = 0; i < ex.size(); ++i) {
        json terms = json::array();
        for (const auto& t : ex[i])
            terms.push_back({{"sin_power", t.sin_power},
                             {"cos_power", t.cos_power},
                             {"order", t.order},
                             {"trig", t.sine ? "sin" : "cos"},
                             {"coeff", round_output(t.coeff)}});
        arr.push_back({{"index", i + 1}, {"label", basis.labels()[i].name()}, {"terms", terms}});
    }
    return arr;
}

int cmd_symbols(const SymbolsArgs& a) {
    const MeasurementModel model = is_golden_case(a.which) ? golden_table(a.which).model : model_from_preset(a.which);
    SymbolSet s = make_symbols(model);
    std::string fmt = a.format;
    if (fmt.empty()) fmt = a.out.size() > 5 && a.out.ends_with(".json") ? "json" : "csv";
    Output out(a.out);
    if (fmt == "csv") {
        write_symbols_csv(out.stream(), s, a.grid);
        return 0;
    }
    require(fmt == "json", "--format must be csv or json");
    json j;
    j["case"] = a.which;
    j["model"] = model.name;
    j["dim"] = model.dim;
    j["f"] = to_json_array(model.f);
    j["mirrored"] = model.mirrored;
    j["gram_condition"] = round_output(s.condition_number());
    j["invertible"] = s.invertible();
    j["q"] = expansion_json(q_expansions(s), s.basis());
    if (s.invertible())
        j["p"] = expansion_json(p_expansions(s), s.basis());
    else
        j["diagnosis"] = s.diagnosis();
    out.stream() << j.dump(2) << '\n';
    return 0;
}

// ----------------------------------------------------------------- generate

struct GenerateArgs {
    std::string state;
    std::string models;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_generate(const GenerateArgs& a, int threads) {
    const ReferenceState ref = reference_state(a.state);
    const auto models = models_from(a.models);
    SamplingOptions opt;
    opt.seed = a.seed;
    opt.threads = threads;
    const EventFormat fmt = event_format_for(a.out);
    SamplingStats stats;
    {
        EventWriter writer(a.out, fmt);
        auto sink = [&](std::span<const EventRecord> s) { writer.write(s); };
        if (ref.state.is_bipartite())
            stats = sample_bipartite_chunks(ref.state, models.front(), models.back(), a.n, opt, sink);
        else {
            require(models.size() == 1, "single-particle state takes exactly one model");
            stats = sample_single_chunks(ref.state, models.front(), a.n, opt, sink);
        }
    }
    json meta;
    meta["subcommand"] = "generate";
    meta["state"] = a.state;
    json params = json::object();
    for (const auto& [k, v] : ref.params) params[k] = round_output(v);
    meta["state_params"] = params;
    meta["truth"] = to_json(ref.state);
    json names = json::array();
    for (const auto& m : models) names.push_back(m.name);
    meta["models"] = names;
    meta["n_events"] = a.n;
    meta["seed"] = a.seed;
    meta["threads"] = threads;
    meta["chunk_size"] = opt.chunk_size;
    meta["format"] = fmt == EventFormat::csv ? "csv" : "jsonl";
    meta["trials"] = stats.trials;
    meta["acceptance"] = round_output(stats.acceptance());
    meta["created"] = utc_timestamp();
    write_json_file(metadata_path(a.out), meta);
    return 0;
}

// ------------------------------------------------------------------- reduce

struct ReduceArgs {
    std::string in;
    std::string channel;
    std::string beam = "+z";
    std::string out;
    bool lenient = false;
    bool no_mass_window = false;
    bool use_weights = false;
};

int cmd_reduce(const ReduceArgs& a) {
    ChannelConfig cfg = channel_config(a.channel, parse_beam(a.beam), !a.no_mass_window);
    cfg.use_event_weights = a.use_weights;
    LheReader reader(a.in, !a.lenient);
    ReduceStats st;
    try {
        EventWriter writer(a.out);
        st = reduce_stream(reader, cfg, [&](const EventRecord& e) { writer.write(e); });
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(a.out, ec);
        throw;
    }
    json meta;
    meta["subcommand"] = "reduce";
    meta["input"] = a.in;
    meta["channel"] = a.channel;
    meta["beam"] = a.beam;
    meta["mass_window"] = !a.no_mass_window;
    meta["use_weights"] = a.use_weights;
    meta["strict"] = !a.lenient;
    meta["read"] = st.read;
    meta["kept"] = st.kept;
    meta["outside_window"] = st.outside_window;
    meta["failed"] = st.failed;
    meta["messages"] = st.messages;
    meta["created"] = utc_timestamp();
    write_json_file(metadata_path(a.out), meta);
    std::cerr << "read " << st.read << " kept " << st.kept << " outside-window " << st.outside_window << " failed "
              << st.failed << '\n';
    return 0;
}

// -------------------------------------------------------------- reconstruct

struct ReconstructArgs {
    std::string in;
    std::string models;
    bool identical = false;
    std::string out;
};

int cmd_reconstruct(const ReconstructArgs& a, int threads) {
    const auto events = read_events(a.in);
    require(!events.empty(), "event file '" + a.in + "' holds no events");
    const auto models = models_from(a.models);
    const bool bipartite = events.front().n2.has_value();
    Reconstruction r;
    if (!bipartite) {
        require(models.size() == 1 && !a.identical, "single-particle events take one model and no --identical");
        r = Tomographer::single(make_symbols(models.front())).reconstruct(events, threads);
    } else {
        const auto sa = make_symbols(models.front()), sb = make_symbols(models.back());
        const auto tomo = a.identical ? Tomographer::identical(sa, sb) : Tomographer::bipartite(sa, sb);
        r = tomo.reconstruct(events, threads);
    }
    json j = to_json(r);
    j["input"] = a.in;
    j["observables"] = to_json(diagnostics(r.state));
    write_json(a.out, j);
    return 0;
}

// -------------------------------------------------------------- observables

struct ObservablesArgs {
    std::string in;
    std::string state;
    std::string report;
    bool independent = false;
};

int cmd_observables(const ObservablesArgs& a) {
    const BlochState s = state_from_source(a.in, a.state);
    ReportOptions opt;
    opt.cglmp_independent = a.independent;
    write_json(a.report, to_json(diagnostics(s, opt)));
    return 0;
}

// ------------------------------------------------------------------- table2

struct Table2Args {
    std::string states;
    std::string alpha_scan;
    bool bell = false;
    std::size_t n = 0;
    std::string models = "W+,W-";
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_table2(const Table2Args& a, int threads) {
    struct Row {
        std::string label;
        BlochState state;
    };
    std::vector<Row> rows;
    std::string key_column = "state";
    if (!a.alpha_scan.empty()) {
        const std::string family = a.states.empty() ? "werner" : a.states;
        require(family == "werner" || family == "werner_qubit", "--alpha-scan needs --state werner or werner_qubit");
        const std::string param = family == "werner" ? "alpha" : "p";
        key_column = param;
        for (double x : parse_scan(a.alpha_scan))
            rows.push_back({format_output(x), reference_state(family + ":" + param + "=" + format_output(x)).state});
    } else {
        const auto names = a.states.empty() ? table2_states() : split_list(a.states);
        for (const auto& name : names) rows.push_back({name, reference_state(name).state});
    }
    std::vector<MeasurementModel> models;
    if (a.n > 0) models = models_from(a.models);

    Output out(a.out);
    auto& os = out.stream();
    os << key_column << ",concurrence_bound";
    if (a.n > 0) os << ",concurrence_bound_sampled";
    if (a.bell) os << ",cglmp_max";
    os << '\n';
    std::vector<double> keys, analytic, sampled;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const double c = concurrence_bound(row.state);
        os << row.label << ',' << format_output(c);
        analytic.push_back(c);
        if (a.n > 0) {
            SamplingOptions opt;
            opt.seed = a.seed + i;
            opt.threads = threads;
            const auto r = sample_and_reconstruct(row.state, models.front(), models.back(), a.n, opt);
            sampled.push_back(concurrence_bound(r.state));
            os << ',' << format_output(sampled.back());
        }
        if (a.bell) {
            os << ',';
            if (row.state.dim1() == 3 && row.state.dim2() == 3) os << format_output(cglmp_max(row.state).value);
        }
        os << '\n';
        if (!a.alpha_scan.empty()) keys.push_back(std::stod(row.label));
    }
    if (!a.alpha_scan.empty()) {
        auto report = [&](const char* what, const std::vector<double>& y) {
            const auto x0 = zero_crossing(keys, y);
            std::cerr << what << " zero crossing: " << (x0 ? format_output(*x0) : "none") << '\n';
        };
        report("analytic", analytic);
        if (a.n > 0) report("sampled", sampled);
    }
    return 0;
}

// ---------------------------------------------------------------- bell-scan

struct BellScanArgs {
    std::string in;
    std::string state;
    int theta_steps = 64;
    int phi_steps = 128;
    std::string out;
};

int cmd_bell_scan(const BellScanArgs& a) {
    const BlochState s = state_from_source(a.in, a.state);
    require_qutrit_pair(s, "bell-scan");
    require(a.theta_steps >= 2 && a.phi_steps >= 1, "bell-scan: need --theta-steps >= 2 and --phi-steps >= 1");
    const CMatrix rho = bloch_to_density(s);
    Output out(a.out);
    auto& os = out.stream();
    os << "theta,phi,cglmp\n";
    for (int i = 0; i < a.theta_steps; ++i) {
        const double theta = pi * i / (a.theta_steps - 1);
        for (int k = 0; k < a.phi_steps; ++k) {
            const double phi = two_pi * k / a.phi_steps;
            os << format_output(theta) << ',' << format_output(phi) << ','
               << format_output(cglmp_expectation(rho, theta, phi)) << '\n';
        }
    }
    const auto best = cglmp_max(s);
    std::cerr << "cglmp_max " << format_output(best.value) << " theta " << format_output(best.theta) << " phi "
              << format_output(best.phi) << '\n';
    return 0;
}

// ------------------------------------------------------------------- config

/**
 * Expands `--config file.json` into flags placed before the command-line
 * ones, so explicit flags win. Keys are long option names; a "subcommand"
 * key supplies the subcommand when none is given.
 */
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            require(i + 1 < args.size(), "--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].starts_with("--config=")) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!path) return args;
    const json cfg = read_json_file(*path);
    require(cfg.is_object(), "config '" + *path + "' must be a JSON object");
    auto sub = std::find_first_of(args.begin(), args.end(), subcommands.begin(), subcommands.end());
    if (sub == args.end()) {
        require(cfg.contains("subcommand"), "no subcommand given on the command line or in the config");
        args.insert(args.begin(), cfg.at("subcommand").get<std::string>());
        sub = args.begin();
    }
    const auto pos = static_cast<std::size_t>(sub - args.begin()) + 1;
    std::vector<std::string> flags;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "subcommand") continue;
        const std::string flag = "--" + key;
        if (value.is_boolean()) {
            if (value.get<bool>()) flags.push_back(flag);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
            flags.insert(flags.end(), {flag, joined});
        } else {
            flags.insert(flags.end(), {flag, value.is_string() ? value.get<std::string>() : value.dump()});
        }
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), flags.begin(), flags.end());
    return args;
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

int fail(const char* kind, const std::string& msg, int code) {
    std::cerr << "error: " << kind << ": " << one_line(msg) << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin density matrix tomography of decay ensembles", "spin-tomo"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    int threads = default_threads();
    std::string config_unused;
    app.add_option("--config", config_unused, "JSON file of option values; explicit flags override it");
    app.add_option("--threads", threads, "Worker threads (default: $SPIN_TOMO_THREADS or 1)")
        ->check(CLI::PositiveNumber);

    SymbolsArgs sym;
    auto* c_sym = app.add_subcommand("symbols", "Tabulate Q and P symbols of a decay model");
    c_sym->add_option("--case", sym.which, "Golden case (d3_Wplus, ...) or model preset")->required();
    c_sym->add_option("--grid", sym.grid, "Points per angle for the CSV grid")->check(CLI::Range(2, 10000));
    c_sym->add_option("--format", sym.format, "csv or json (default from --out extension)");
    c_sym->add_option("--out", sym.out, "Output file (default stdout)");

    GenerateArgs gen;
    auto* c_gen = app.add_subcommand("generate", "Sample decay events from a reference state");
    c_gen->add_option("--state", gen.state, "Reference state, e.g. singlet3 or werner:alpha=0.5")->required();
    c_gen->add_option("--models", gen.models, "One or two model presets, e.g. W+,W-")->required();
    c_gen->add_option("--n", gen.n, "Number of events")->required();
    c_gen->add_option("--seed", gen.seed, "Random seed");
    c_gen->add_option("--out", gen.out, "Event file (.csv or .jsonl)")->required();

    ReduceArgs red;
    auto* c_red = app.add_subcommand("reduce", "Reduce an LHE file to decay angles in the beam basis");
    c_red->add_option("--in", red.in, "LHE input file")->required();
    c_red->add_option("--channel", red.channel, "WW, ZZ or WZ")->required();
    c_red->add_option("--beam", red.beam, "Lab beam direction: +z (default), -z, +x, ...");
    c_red->add_option("--out", red.out, "Event file (.csv or .jsonl)")->required();
    c_red->add_flag("--lenient", red.lenient, "Skip malformed events instead of failing");
    c_red->add_flag("--no-mass-window", red.no_mass_window, "Disable the Z mass window");
    c_red->add_flag("--use-weights", red.use_weights, "Carry event weights into the records");

    ReconstructArgs rec;
    auto* c_rec = app.add_subcommand("reconstruct", "Reconstruct the spin density matrix from events");
    c_rec->add_option("--in", rec.in, "Event file")->required();
    c_rec->add_option("--models", rec.models, "Model preset(s) used for the P symbols")->required();
    c_rec->add_flag("--identical", rec.identical, "Exchange-symmetrized estimator");
    c_rec->add_option("--out", rec.out, "Report JSON (default stdout)");

    ObservablesArgs obs;
    auto* c_obs = app.add_subcommand("observables", "Entanglement and Bell observables of a state");
    c_obs->add_option("--in", obs.in, "State or reconstruction JSON");
    c_obs->add_option("--state", obs.state, "Reference state name instead of --in");
    c_obs->add_option("--report", obs.report, "Report JSON (default stdout)");
    c_obs->add_flag("--independent", obs.independent, "Also maximize CGLMP over independent rotations");

    Table2Args tab;
    auto* c_tab = app.add_subcommand("table2", "Concurrence bound of the idealized reference states");
    c_tab->add_option("--state", tab.states, "Comma-separated states, or the family for --alpha-scan");
    c_tab->add_option("--alpha-scan", tab.alpha_scan, "start:stop:count scan of the mixing parameter");
    c_tab->add_flag("--bell", tab.bell, "Add the cglmp_max column");
    c_tab->add_option("--n", tab.n, "Also reconstruct from this many sampled events per row");
    c_tab->add_option("--models", tab.models, "Model presets for the sampled path (default W+,W-)");
    c_tab->add_option("--seed", tab.seed, "Seed of the first row; row i uses seed + i");
    c_tab->add_option("--out", tab.out, "CSV output (default stdout)");

    BellScanArgs bell;
    auto* c_bell = app.add_subcommand("bell-scan", "CGLMP value over the same-rotation family");
    c_bell->add_option("--in", bell.in, "State or reconstruction JSON");
    c_bell->add_option("--state", bell.state, "Reference state name instead of --in");
    c_bell->add_option("--theta-steps", bell.theta_steps, "Polar grid points (default 64)");
    c_bell->add_option("--phi-steps", bell.phi_steps, "Azimuthal grid points (default 128)");
    c_bell->add_option("--out", bell.out, "CSV output (default stdout)");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        std::vector<std::string> args = expand_config({argv + 1, argv + argc});
        std::vector<char*> cargs{argv[0]};
        for (auto& s : args) cargs.push_back(s.data());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), exit_usage);
    } catch (const std::exception& e) {
        return fail("usage", e.what(), exit_usage);
    }

    try {
        if (c_sym->parsed()) return cmd_symbols(sym);
        if (c_gen->parsed()) return cmd_generate(gen, threads);
        if (c_red->parsed()) return cmd_reduce(red);
        if (c_rec->parsed()) return cmd_reconstruct(rec, threads);
        if (c_obs->parsed()) return cmd_observables(obs);
        if (c_tab->parsed()) return cmd_table2(tab, threads);
        if (c_bell->parsed()) return cmd_bell_scan(bell);
    } catch (const ReconstructionRefused& e) {
        return fail("refused", e.what(), exit_refused);
    } catch (const spintomo::ParseError& e) {
        return fail("parse", e.what(), exit_input);
    } catch (const std::exception& e) {
        return fail("input", e.what(), exit_input);
    }
    return exit_usage;
}

#include "ergolab/runner.hpp"

#include "ergolab/averaging.hpp"
#include "ergolab/convolution.hpp"
#include "ergolab/error.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/presets.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ergolab {

namespace {

using nlohmann::json;

constexpr const char* kCertificateNote =
    "finite evidence: no integer frequency with 0 < |k|_inf <= search_radius has |A^T k| below threshold; not a proof";

std::string num(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

std::string join_ints(const std::vector<int>& k) {
    std::string out;
    for (std::size_t i = 0; i < k.size(); ++i) {
        out += (i ? " " : "") + std::to_string(k[i]);
    }
    return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json complex_json(Complex c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

json certificate_json(const ErgodicityCertificate& c) {
    return json{{"search_radius", c.search_radius},
                {"min_frequency_norm", finite_or_null(c.min_frequency_norm)},
                {"minimizer", c.minimizer},
                {"offending_k", c.offending_k ? json(*c.offending_k) : json(nullptr)},
                {"threshold", c.threshold},
                {"vectors_checked", c.vectors_checked},
                {"passed", c.passed()},
                {"note", kCertificateNote}};
}

template <class T>
const T& require(const std::optional<T>& value, const std::string& command, const char* section) {
    if (!value) {
        throw ConfigError(command + " needs a [" + std::string(section) + "] section");
    }
    return *value;
}

ErgodicityCertificate certify(const TorusMultiflow& flow, int radius) {
    try {
        return ergodicity_certificate(flow, radius);
    } catch (const BudgetError& error) {
        throw ConfigError(std::string(error.what()) + " (scanned radius " +
                          std::to_string(error.partial().search_radius) + ")");
    }
}

struct Context {
    std::string command;
    ExperimentConfig config;
    Seed seed;
    json summary;
    RunOutput output;

    void finish(const std::string& status, int exit_code) {
        summary["status"] = status;
        output.exit_code = exit_code;
        output.files["summary.json"] = summary.dump(2) + "\n";
        output.files["config_echo.ini"] = echo_config(config);
    }
};

void run_sweep(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    const TorusMultiflow flow = build_flow(require(c.flow, ctx.command, "flow"));
    const WeightMeasure measure = build_measure(require(c.measure, ctx.command, "measure"));
    const TrigObservable obs = build_observable(require(c.observable, ctx.command, "observable"), flow.torus_dim());
    const ScheduleSpec& spec = require(c.schedule, ctx.command, "schedule");
    const Schedule schedule{spec.kind, spec.values};
    const TorusGrid grid{c.budget.lattice_points, c.budget.mc_samples};

    AveragingReport report;
    try {
        report = convergence_sweep(flow, obs, measure, schedule, grid, ctx.seed,
                                   SweepOptions{c.waive_ergodicity, c.check.search_radius});
    } catch (const CertificateRefused& refused) {
        ctx.summary["certificate"] = certificate_json(refused.certificate());
        ctx.summary["ergodicity"] = "refused";
        ctx.finish("refused", 2);
        return;
    }

    ctx.output.files["sweep.csv"] = sweep_csv(report);
    ctx.summary["certificate"] = certificate_json(report.certificate);
    ctx.summary["ergodicity"] = report.nonergodic ? "NONERGODIC" : "certified";
    std::size_t closed_form = 0;
    for (const auto& entry : report.entries) {
        closed_form += entry.error.closed_form ? 1 : 0;
    }
    ctx.summary["results"] = json{{"entries", report.entries.size()},
                                  {"closed_form_entries", closed_form},
                                  {"first_error", report.entries.front().error.exact},
                                  {"last_error", report.entries.back().error.exact},
                                  {"measure", measure.describe()}};
    json windows = json::array();
    for (const auto& w : report.decay.windows) {
        windows.push_back(json{{"window", w.window}, {"at", w.at}, {"max_error", w.max_error}});
    }
    ctx.summary["decay"] = json{{"last_over_first", finite_or_null(report.decay.last_over_first)},
                                {"envelope_slope", finite_or_null(report.decay.envelope_slope)},
                                {"windows", windows}};
    ctx.finish("ok", 0);
}

void check_ergodicity(Context& ctx) {
    const TorusMultiflow flow = build_flow(require(ctx.config.flow, ctx.command, "flow"));
    const ErgodicityCertificate cert = certify(flow, ctx.config.check.search_radius);
    std::ostringstream csv;
    csv << "search_radius,min_frequency_norm,minimizer,offending_k,threshold,vectors_checked,passed\n"
        << cert.search_radius << ',' << num(cert.min_frequency_norm) << ',' << join_ints(cert.minimizer) << ','
        << (cert.offending_k ? join_ints(*cert.offending_k) : "") << ',' << num(cert.threshold) << ','
        << cert.vectors_checked << ',' << (cert.passed() ? "true" : "false") << '\n';
    ctx.output.files["certificate.csv"] = csv.str();
    ctx.summary["certificate"] = certificate_json(cert);
    ctx.finish(cert.passed() ? "ok" : "offender", cert.passed() ? 0 : 2);
}

void check_general_position(Context& ctx) {
    const WeightMeasure measure = build_measure(require(ctx.config.measure, ctx.command, "measure"));
    const GeneralPositionReport report =
        general_position_check(measure, ctx.config.budget.trials, ctx.config.check.threshold, ctx.seed);
    std::ostringstream csv;
    csv << "trial,abs_det,below_threshold\n";
    for (std::size_t t = 0; t < report.abs_dets.size(); ++t) {
        csv << t << ',' << num(report.abs_dets[t]) << ',' << (report.abs_dets[t] < report.threshold ? 1 : 0) << '\n';
    }
    ctx.output.files["general_position.csv"] = csv.str();
    ctx.summary["results"] = json{{"trials", report.trials},
                                  {"failures", report.failures},
                                  {"min_abs_det", report.min_abs_det},
                                  {"threshold", report.threshold},
                                  {"measure", measure.describe()}};
    ctx.finish("ok", 0);
}

void conv_density(Context& ctx) {
    const WeightMeasure measure = build_measure(require(ctx.config.measure, ctx.command, "measure"));
    const std::size_t count = ctx.config.budget.sample_count;
    const int cells = ctx.config.budget.cells_per_axis;
    if (count < 10'000) {
        throw UsageError("conv-density: sample_count must be at least 10^4");
    }
    if (cells < 2) {
        throw ConfigError("conv-density: cells_per_axis must be at least 2");
    }
    const PointSet points = sample(measure, ctx.seed, count);
    const HistogramDensity histogram = estimate_density(points, cells);
    const AcDiagnosticReport report = ac_diagnostic(points, cells);

    ctx.output.files["histogram.csv"] = histogram_csv(histogram);
    std::ostringstream atoms;
    atoms << "cell,fraction,refined_fraction\n";
    json suspects = json::array();
    for (const auto& s : report.atom_suspects) {
        atoms << join_ints(s.cell) << ',' << num(s.fraction) << ',' << num(s.refined_fraction) << '\n';
        suspects.push_back(json{{"cell", s.cell}, {"fraction", s.fraction}, {"refined_fraction", s.refined_fraction}});
    }
    ctx.output.files["atom_suspects.csv"] = atoms.str();
    ctx.summary["results"] = json{{"sample_count", report.sample_count},
                                  {"cells_per_axis", report.cells_per_axis},
                                  {"max_cell_fraction", report.max_cell_fraction},
                                  {"max_cell_fraction_refined", report.max_cell_fraction_refined},
                                  {"split_half_tv", report.split_half_tv},
                                  {"atom_suspects", suspects},
                                  {"conv_power_input", measure.as<ConvPower>() != nullptr},
                                  {"box_lo", histogram.box.lo},
                                  {"box_hi", histogram.box.hi},
                                  {"measure", measure.describe()}};
    ctx.finish("ok", 0);
}

const SphereMeasure& require_sphere(const WeightMeasure& measure, const std::string& command) {
    const auto* sphere = measure.as<SphereMeasure>();
    if (sphere == nullptr) {
        throw ConfigError(command + " needs a sphere measure (kind = sphere, conv_power = 1)");
    }
    return *sphere;
}

void jacobian_scan_cmd(Context& ctx) {
    const WeightMeasure measure = build_measure(require(ctx.config.measure, ctx.command, "measure"));
    const SphereMeasure& sphere = require_sphere(measure, ctx.command);
    const double threshold = ctx.config.check.degeneracy_threshold.value_or(default_degeneracy_threshold(sphere));
    const JacobianScanResult result = jacobian_scan(sphere, ctx.config.budget.trials, threshold, ctx.seed);
    std::ostringstream csv;
    csv << "trials,threshold,degenerate,fraction,min_abs_det\n"
        << result.trials << ',' << num(result.threshold) << ',' << result.degenerate << ',' << num(result.fraction())
        << ',' << num(result.min_abs_det) << '\n';
    ctx.output.files["jacobian_scan.csv"] = csv.str();
    ctx.summary["results"] = json{{"trials", result.trials},
                                  {"threshold", result.threshold},
                                  {"degenerate", result.degenerate},
                                  {"fraction", result.fraction()},
                                  {"min_abs_det", result.min_abs_det}};
    ctx.finish("ok", 0);
}

void disintegration_cmd(Context& ctx) {
    const WeightMeasure measure = build_measure(require(ctx.config.measure, ctx.command, "measure"));
    const SphereMeasure& sphere = require_sphere(measure, ctx.command);
    const DisintegrationResult result =
        disintegration_test(sphere, ctx.config.budget.sample_count, ctx.seed, ctx.config.check.colatitude);
    std::ostringstream csv;
    csv << "coordinate,ks,critical_value,alpha,rejects\n";
    for (std::size_t a = 0; a < 3; ++a) {
        csv << a << ',' << num(result.ks[a]) << ',' << num(result.critical_value) << ',' << num(result.alpha) << ','
            << (result.ks[a] >= result.critical_value ? 1 : 0) << '\n';
    }
    ctx.output.files["disintegration.csv"] = csv.str();
    ctx.summary["results"] = json{{"ks", result.ks},
                                  {"max_ks", result.max_ks},
                                  {"critical_value", result.critical_value},
                                  {"alpha", result.alpha},
                                  {"sample_count", result.sample_count},
                                  {"passes", result.passes()},
                                  {"colatitude",
                                   ctx.config.check.colatitude == ColatitudeLaw::Sine ? "sine" : "uniform"}};
    ctx.finish("ok", 0);
}

void iterate_check(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    const TorusMultiflow flow = build_flow(require(c.flow, ctx.command, "flow"));
    const WeightMeasure measure = build_measure(require(c.measure, ctx.command, "measure"));
    const TrigObservable obs = build_observable(require(c.observable, ctx.command, "observable"), flow.torus_dim());
    std::vector<double> x = c.check.point;
    if (x.empty()) {
        x.assign(flow.torus_dim(), 0.0);
    }
    if (x.size() != flow.torus_dim()) {
        throw ConfigError("iterate-check: [check] point must have one coordinate per torus dimension");
    }
    if (c.check.powers.empty()) {
        throw ConfigError("iterate-check: [check] powers is empty");
    }

    const ErgodicityCertificate cert = certify(flow, c.check.search_radius);
    ctx.summary["certificate"] = certificate_json(cert);
    if (!cert.passed() && !c.waive_ergodicity) {
        ctx.summary["ergodicity"] = "refused";
        ctx.finish("refused", 2);
        return;
    }
    ctx.summary["ergodicity"] = cert.passed() ? "certified" : "NONERGODIC";

    std::ostringstream csv;
    csv << "n,k,iterated_re,iterated_im,convolved_re,convolved_im,abs_deviation\n";
    json per_power = json::array();
    double worst = 0.0;
    bool all_within = true;
    for (int n : c.check.powers) {
        const MonteCarlo mc{c.budget.mc_samples, ctx.seed, static_cast<std::uint32_t>(n)};
        const IterationCheck check = iterated_vs_convolution(flow, obs, measure, c.check.t, n, x, mc);
        for (const auto& mode : check.modes) {
            csv << n << ',' << join_ints(mode.k) << ',' << num(mode.iterated.real()) << ','
                << num(mode.iterated.imag()) << ',' << num(mode.convolved.real()) << ','
                << num(mode.convolved.imag()) << ',' << num(std::abs(mode.iterated - mode.convolved)) << '\n';
        }
        worst = std::max(worst, check.analytic_deviation);
        all_within = all_within && check.mc_within(4.0);
        per_power.push_back(json{{"n", n},
                                 {"analytic_deviation", check.analytic_deviation},
                                 {"analytic_value", complex_json(check.analytic_value)},
                                 {"mc_value", complex_json(check.mc.value)},
                                 {"mc_standard_error", check.mc.standard_error},
                                 {"mc_deviation", check.mc_deviation},
                                 {"mc_within_4_se", check.mc_within(4.0)}});
    }
    ctx.output.files["iterate.csv"] = csv.str();
    ctx.summary["results"] = json{{"t", c.check.t},
                                  {"point", x},
                                  {"max_analytic_deviation", worst},
                                  {"mc_all_within_4_se", all_within},
                                  {"powers", per_power}};
    ctx.finish("ok", 0);
}

using Handler = void (*)(Context&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
    static const std::vector<std::pair<std::string, Handler>> table = {
        {"run-sweep", run_sweep},
        {"check-ergodicity", check_ergodicity},
        {"check-general-position", check_general_position},
        {"conv-density", conv_density},
        {"jacobian-scan", jacobian_scan_cmd},
        {"disintegration-test", disintegration_cmd},
        {"iterate-check", iterate_check},
    };
    return table;
}

} // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, handler] : handlers()) {
            out.push_back(name);
        }
        return out;
    }();
    return names;
}

RunOutput run_command(const std::string& command, ExperimentConfig config) {
    Handler handler = nullptr;
    for (const auto& [name, h] : handlers()) {
        if (name == command) {
            handler = h;
        }
    }
    if (handler == nullptr) {
        throw UsageError("unknown command '" + command + "'");
    }
    if (!config.command.empty() && config.command != command) {
        throw ConfigError("config is for '" + config.command + "', not '" + command + "'");
    }
    config.command = command;
    if (!config.seed) {
        throw ConfigError("config: [run] seed is mandatory");
    }
    // Validates the echo (single-line justification) before any work.
    const std::string echo = echo_config(config);

    Context ctx{command, config, Seed{*config.seed}, json::object(), {}};
    ctx.summary["tool"] = "ergolab";
    ctx.summary["version"] = ERGOLAB_VERSION;
    ctx.summary["command"] = command;
    ctx.summary["preset"] = config.preset;
    ctx.summary["seed"] = *config.seed;
    ctx.summary["justification"] = config.justification;
    ctx.summary["config_echo"] = echo;
    handler(ctx);
    return ctx.output;
}

void write_outputs(const RunOutput& output, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    for (const auto& [name, content] : output.files) {
        const fs::path target = fs::path(directory) / name;
        const fs::path temporary = fs::path(directory) / (name + ".tmp");
        {
            std::ofstream out(temporary, std::ios::binary);
            out << content;
            if (!out) {
                throw Error("cannot write " + temporary.string());
            }
        }
        fs::rename(temporary, target);
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ergodic averaging experiments on torus translation flows", "ergolab"};
    app.set_version_flag("--version", std::string("ergolab ") + ERGOLAB_VERSION);
    app.require_subcommand(1);

    struct Flags {
        std::string config_path;
        std::string preset;
        std::string out_dir = "ergolab-out";
        std::uint64_t seed = 0;
        std::size_t mc_samples = 0;
        std::size_t lattice_points = 0;
        std::size_t sample_count = 0;
        std::size_t trials = 0;
        int cells = 0;
        unsigned threads = 0;
        bool waive = false;
    } flags;

    struct Overrides {
        CLI::Option* seed;
        CLI::Option* mc_samples;
        CLI::Option* lattice_points;
        CLI::Option* sample_count;
        CLI::Option* trials;
        CLI::Option* cells;
        CLI::Option* threads;
    };
    std::map<std::string, Overrides> overrides;

    for (const auto& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        auto* config = sub->add_option("--config", flags.config_path, "Configuration file")->check(CLI::ExistingFile);
        auto* preset = sub->add_option("--preset", flags.preset, "Named preset");
        config->excludes(preset);
        sub->add_option("--out", flags.out_dir, "Output directory")->capture_default_str();
        Overrides o{};
        o.seed = sub->add_option("--seed", flags.seed, "Seed override");
        o.mc_samples = sub->add_option("--mc-samples", flags.mc_samples, "Monte-Carlo sample budget");
        o.lattice_points = sub->add_option("--lattice-points", flags.lattice_points, "Torus lattice size (power of 2)");
        o.sample_count = sub->add_option("--sample-count", flags.sample_count, "Sample count");
        o.trials = sub->add_option("--trials", flags.trials, "Trial count");
        o.cells = sub->add_option("--cells", flags.cells, "Histogram cells per axis");
        o.threads = sub->add_option("--threads", flags.threads, "Worker threads (results do not depend on it)");
        sub->add_flag("--waive-ergodicity", flags.waive, "Run even if the ergodicity certificate fails");
        overrides[name] = o;
    }
    app.add_subcommand("presets", "List named presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    if (command == "presets") {
        for (const auto& p : list_presets()) {
            out << p.name << '\t' << p.command << '\n';
        }
        return 0;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        ExperimentConfig config;
        if (!flags.config_path.empty()) {
            config = load_config(flags.config_path);
        } else if (!flags.preset.empty()) {
            config = preset_config(flags.preset);
        } else {
            throw UsageError(command + ": give --config or --preset");
        }
        const Overrides& o = overrides.at(command);
        if (o.seed->count()) {
            config.seed = flags.seed;
        }
        if (o.mc_samples->count()) {
            config.budget.mc_samples = flags.mc_samples;
        }
        if (o.lattice_points->count()) {
            config.budget.lattice_points = flags.lattice_points;
        }
        if (o.sample_count->count()) {
            config.budget.sample_count = flags.sample_count;
        }
        if (o.trials->count()) {
            config.budget.trials = flags.trials;
        }
        if (o.cells->count()) {
            config.budget.cells_per_axis = flags.cells;
        }
        if (flags.waive) {
            config.waive_ergodicity = true;
        }
        if (o.threads->count()) {
            if (flags.threads == 0) {
                throw UsageError("--threads must be positive");
            }
            set_thread_count(flags.threads);
        }

        const RunOutput output = run_command(command, std::move(config));
        write_outputs(output, flags.out_dir);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        err << command << ": wrote " << output.files.size() << " files to " << flags.out_dir << " in " << elapsed
            << " s\n";
        if (output.exit_code == 2) {
            err << command << ": ergodicity certificate failed (see summary.json)\n";
        }
        return output.exit_code;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
    } catch (const UnsupportedError& e) {
        err << "unsupported: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return 1;
}

} // namespace ergolab

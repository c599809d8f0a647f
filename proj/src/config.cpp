#include "ergolab/config.hpp"

#include "ergolab/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ergolab {

namespace {

using boost::property_tree::ptree;

std::string format_number(double v) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, v);
    return std::string(buffer, result.ptr);
}

std::vector<std::string> split(const std::string& text, char separator) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(text);
    while (std::getline(in, current, separator)) {
        parts.push_back(current);
    }
    if (!text.empty() && text.back() == separator) {
        parts.emplace_back();
    }
    return parts;
}

std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        out.push_back(word);
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
    throw ConfigError("config: " + key + " = '" + value + "': expected " + expected);
}

double to_double(const std::string& key, const std::string& word) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc{} || ptr != word.data() + word.size()) {
        bad_value(key, word, "a number");
    }
    return v;
}

template <class Int>
Int to_integer(const std::string& key, const std::string& word) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc{} || ptr != word.data() + word.size()) {
        bad_value(key, word, "an integer");
    }
    return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& w : words(value)) {
        out.push_back(to_double(key, w));
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    bad_value(key, value, "true or false");
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? " " : "") + format_number(values[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? " " : "") + std::to_string(values[i]);
    }
    return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"run", {"command", "preset", "seed", "waive_ergodicity", "justification"}},
        {"flow", {"matrix"}},
        {"measure", {"kind", "dim", "lo", "hi", "at", "center", "radius", "longitude", "conv_power"}},
        {"observable", {"preset", "modes", "real_valued"}},
        {"schedule", {"kind", "values", "linear", "geometric"}},
        {"budget", {"mc_samples", "lattice_points", "sample_count", "trials", "cells_per_axis"}},
        {"check", {"search_radius", "threshold", "degeneracy_threshold", "t", "powers", "point", "colatitude"}},
    };
    return keys;
}

FlowSpec parse_flow(const ptree& section) {
    FlowSpec spec;
    const auto matrix = section.get_optional<std::string>("matrix");
    if (!matrix) {
        throw ConfigError("config: [flow] needs a matrix");
    }
    for (const auto& row_text : split(*matrix, ';')) {
        const std::vector<double> row = to_doubles("matrix", row_text);
        if (row.empty()) {
            throw ConfigError("config: [flow] matrix has an empty row");
        }
        if (spec.time_dim == 0) {
            spec.time_dim = row.size();
        } else if (row.size() != spec.time_dim) {
            throw ConfigError("config: [flow] matrix rows have different lengths");
        }
        spec.matrix.insert(spec.matrix.end(), row.begin(), row.end());
        ++spec.torus_dim;
    }
    return spec;
}

MeasureSpec parse_measure(const ptree& section) {
    MeasureSpec spec;
    for (const auto& [key, node] : section) {
        const std::string value = node.data();
        if (key == "kind") {
            spec.kind = value;
        } else if (key == "dim") {
            spec.dim = to_integer<std::size_t>(key, value);
        } else if (key == "lo") {
            spec.lo = to_doubles(key, value);
        } else if (key == "hi") {
            spec.hi = to_doubles(key, value);
        } else if (key == "at") {
            spec.at = to_doubles(key, value);
        } else if (key == "center") {
            spec.center = to_doubles(key, value);
        } else if (key == "radius") {
            spec.radius = to_double(key, value);
        } else if (key == "longitude") {
            spec.longitude = to_double(key, value);
        } else if (key == "conv_power") {
            spec.conv_power = to_integer<int>(key, value);
        }
    }
    static const std::set<std::string> kinds = {"interval", "box",    "point",       "moment-curve",
                                                "line",     "sphere", "semimeridian"};
    if (!kinds.contains(spec.kind)) {
        throw ConfigError("config: [measure] kind '" + spec.kind +
                          "' is not one of interval, box, point, moment-curve, line, sphere, semimeridian");
    }
    return spec;
}

ObservableSpec parse_observable(const ptree& section) {
    ObservableSpec spec;
    if (const auto preset = section.get_optional<std::string>("preset")) {
        if (*preset != "five-mode") {
            throw ConfigError("config: [observable] preset '" + *preset + "' is unknown (five-mode)");
        }
        spec.preset = *preset;
        spec.real_valued = true;
    }
    if (const auto modes = section.get_optional<std::string>("modes")) {
        if (!spec.preset.empty()) {
            throw ConfigError("config: [observable] give either preset or modes");
        }
        for (const auto& entry : split(*modes, ';')) {
            const auto sides = split(entry, ':');
            if (sides.size() != 2) {
                bad_value("modes", entry, "'k1 ... kD : re im'");
            }
            TrigMode mode;
            for (const auto& w : words(sides[0])) {
                mode.k.push_back(to_integer<int>("modes", w));
            }
            const std::vector<double> c = to_doubles("modes", sides[1]);
            if (mode.k.empty() || c.size() != 2) {
                bad_value("modes", entry, "'k1 ... kD : re im'");
            }
            mode.coefficient = {c[0], c[1]};
            spec.modes.push_back(std::move(mode));
        }
    }
    if (spec.preset.empty() && spec.modes.empty()) {
        throw ConfigError("config: [observable] needs preset or modes");
    }
    if (const auto real = section.get_optional<std::string>("real_valued")) {
        spec.real_valued = to_bool("real_valued", *real);
    }
    return spec;
}

ScheduleSpec parse_schedule(const ptree& section) {
    ScheduleSpec spec;
    const std::string kind = section.get<std::string>("kind", "time");
    if (kind == "time") {
        spec.kind = ScheduleKind::Time;
    } else if (kind == "radius") {
        spec.kind = ScheduleKind::Radius;
    } else {
        bad_value("kind", kind, "time or radius");
    }
    int forms = 0;
    for (const auto& [key, form] : {std::pair{"values", ScheduleForm::List}, std::pair{"linear", ScheduleForm::Linear},
                                    std::pair{"geometric", ScheduleForm::Geometric}}) {
        if (const auto text = section.get_optional<std::string>(key)) {
            ++forms;
            spec.form = form;
            spec.params = to_doubles(key, *text);
        }
    }
    if (forms != 1) {
        throw ConfigError("config: [schedule] needs exactly one of values, linear, geometric");
    }
    spec.values = expand_schedule(spec.form, spec.params);
    return spec;
}

BudgetSpec parse_budget(const ptree& section) {
    BudgetSpec spec;
    for (const auto& [key, node] : section) {
        const std::string value = node.data();
        if (key == "mc_samples") {
            spec.mc_samples = to_integer<std::size_t>(key, value);
        } else if (key == "lattice_points") {
            spec.lattice_points = to_integer<std::size_t>(key, value);
        } else if (key == "sample_count") {
            spec.sample_count = to_integer<std::size_t>(key, value);
        } else if (key == "trials") {
            spec.trials = to_integer<std::size_t>(key, value);
        } else if (key == "cells_per_axis") {
            spec.cells_per_axis = to_integer<int>(key, value);
        }
    }
    return spec;
}

CheckSpec parse_check(const ptree& section) {
    CheckSpec spec;
    for (const auto& [key, node] : section) {
        const std::string value = node.data();
        if (key == "search_radius") {
            spec.search_radius = to_integer<int>(key, value);
        } else if (key == "threshold") {
            spec.threshold = to_double(key, value);
        } else if (key == "degeneracy_threshold") {
            spec.degeneracy_threshold = to_double(key, value);
        } else if (key == "t") {
            spec.t = to_double(key, value);
        } else if (key == "powers") {
            spec.powers.clear();
            for (const auto& w : words(value)) {
                spec.powers.push_back(to_integer<int>(key, w));
            }
        } else if (key == "point") {
            spec.point = to_doubles(key, value);
        } else if (key == "colatitude") {
            if (value == "sine") {
                spec.colatitude = ColatitudeLaw::Sine;
            } else if (value == "uniform") {
                spec.colatitude = ColatitudeLaw::Uniform;
            } else {
                bad_value(key, value, "sine or uniform");
            }
        }
    }
    return spec;
}

const char* form_key(ScheduleForm form) {
    switch (form) {
    case ScheduleForm::Linear:
        return "linear";
    case ScheduleForm::Geometric:
        return "geometric";
    default:
        return "values";
    }
}

} // namespace

bool ObservableSpec::operator==(const ObservableSpec& other) const {
    if (preset != other.preset || real_valued != other.real_valued || modes.size() != other.modes.size()) {
        return false;
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].k != other.modes[i].k || modes[i].coefficient != other.modes[i].coefficient) {
            return false;
        }
    }
    return true;
}

std::vector<double> expand_schedule(ScheduleForm form, const std::vector<double>& params) {
    if (form == ScheduleForm::List) {
        if (params.empty()) {
            throw ConfigError("config: schedule is empty");
        }
        return params;
    }
    if (params.size() != 3) {
        throw ConfigError("config: linear and geometric schedules take 'start stop count'");
    }
    const double start = params[0];
    const double stop = params[1];
    const double count = params[2];
    if (!(count >= 2) || count != std::floor(count) || count > 1e7) {
        throw ConfigError("config: schedule count must be an integer >= 2");
    }
    if (!(stop > start) || !std::isfinite(start) || !std::isfinite(stop)) {
        throw ConfigError("config: schedule needs start < stop");
    }
    if (form == ScheduleForm::Geometric && !(start > 0.0)) {
        throw ConfigError("config: geometric schedule needs start > 0");
    }
    const auto n = static_cast<std::size_t>(count);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fraction = static_cast<double>(i) / static_cast<double>(n - 1);
        values[i] = form == ScheduleForm::Linear
                        ? start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1)
                        : start * std::pow(stop / start, fraction);
    }
    values.front() = start;
    values.back() = stop;
    return values;
}

ExperimentConfig parse_config(const std::string& text) {
    ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& error) {
        throw ConfigError(std::string("config: ") + error.what());
    }

    for (const auto& [section, node] : tree) {
        const auto known = known_keys().find(section);
        if (!node.data().empty()) {
            throw ConfigError("config: key '" + section + "' must sit inside a section");
        }
        if (known == known_keys().end()) {
            throw ConfigError("config: unknown section [" + section + "]");
        }
        for (const auto& [key, value] : node) {
            if (!known->second.contains(key)) {
                throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
            }
        }
    }

    ExperimentConfig config;
    if (const auto run = tree.get_child_optional("run")) {
        config.command = run->get<std::string>("command", "");
        config.preset = run->get<std::string>("preset", "");
        config.justification = run->get<std::string>("justification", "");
        if (const auto seed = run->get_optional<std::string>("seed")) {
            config.seed = to_integer<std::uint64_t>("seed", *seed);
        }
        if (const auto waive = run->get_optional<std::string>("waive_ergodicity")) {
            config.waive_ergodicity = to_bool("waive_ergodicity", *waive);
        }
    }
    if (const auto s = tree.get_child_optional("flow")) {
        config.flow = parse_flow(*s);
    }
    if (const auto s = tree.get_child_optional("measure")) {
        config.measure = parse_measure(*s);
    }
    if (const auto s = tree.get_child_optional("observable")) {
        config.observable = parse_observable(*s);
    }
    if (const auto s = tree.get_child_optional("schedule")) {
        config.schedule = parse_schedule(*s);
    }
    if (const auto s = tree.get_child_optional("budget")) {
        config.budget = parse_budget(*s);
    }
    if (const auto s = tree.get_child_optional("check")) {
        config.check = parse_check(*s);
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot read " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string echo_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "[run]\n";
    if (!config.command.empty()) {
        out << "command = " << config.command << '\n';
    }
    if (!config.preset.empty()) {
        out << "preset = " << config.preset << '\n';
    }
    if (config.seed) {
        out << "seed = " << *config.seed << '\n';
    }
    out << "waive_ergodicity = " << (config.waive_ergodicity ? "true" : "false") << '\n';
    if (!config.justification.empty()) {
        if (config.justification.find('\n') != std::string::npos) {
            throw ConfigError("config: justification must be a single line");
        }
        out << "justification = " << config.justification << '\n';
    }

    if (config.flow) {
        const FlowSpec& f = *config.flow;
        out << "\n[flow]\nmatrix = ";
        for (std::size_t row = 0; row < f.torus_dim; ++row) {
            const auto first = f.matrix.begin() + static_cast<std::ptrdiff_t>(row * f.time_dim);
            out << (row ? "; " : "") << join(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(f.time_dim)));
        }
        out << '\n';
    }

    if (config.measure) {
        const MeasureSpec& m = *config.measure;
        const MeasureSpec defaults;
        const bool spherical = m.kind == "sphere" || m.kind == "semimeridian";
        out << "\n[measure]\nkind = " << m.kind << '\n';
        if (m.dim != defaults.dim || m.kind == "moment-curve" || m.kind == "line") {
            out << "dim = " << m.dim << '\n';
        }
        if (!m.lo.empty()) {
            out << "lo = " << join(m.lo) << '\n';
        }
        if (!m.hi.empty()) {
            out << "hi = " << join(m.hi) << '\n';
        }
        if (!m.at.empty()) {
            out << "at = " << join(m.at) << '\n';
        }
        if (!m.center.empty()) {
            out << "center = " << join(m.center) << '\n';
        }
        if (spherical || m.radius != defaults.radius) {
            out << "radius = " << format_number(m.radius) << '\n';
        }
        if (m.kind == "semimeridian" || m.longitude != defaults.longitude) {
            out << "longitude = " << format_number(m.longitude) << '\n';
        }
        out << "conv_power = " << m.conv_power << '\n';
    }

    if (config.observable) {
        const ObservableSpec& o = *config.observable;
        out << "\n[observable]\n";
        if (!o.preset.empty()) {
            out << "preset = " << o.preset << '\n';
        } else {
            out << "modes = ";
            for (std::size_t i = 0; i < o.modes.size(); ++i) {
                out << (i ? "; " : "") << join_ints(o.modes[i].k) << " : "
                    << format_number(o.modes[i].coefficient.real()) << ' '
                    << format_number(o.modes[i].coefficient.imag());
            }
            out << '\n';
        }
        out << "real_valued = " << (o.real_valued ? "true" : "false") << '\n';
    }

    if (config.schedule) {
        const ScheduleSpec& s = *config.schedule;
        out << "\n[schedule]\nkind = " << (s.kind == ScheduleKind::Radius ? "radius" : "time") << '\n'
            << form_key(s.form) << " = " << join(s.params) << '\n';
    }

    const BudgetSpec& b = config.budget;
    out << "\n[budget]\nmc_samples = " << b.mc_samples << "\nlattice_points = " << b.lattice_points
        << "\nsample_count = " << b.sample_count << "\ntrials = " << b.trials
        << "\ncells_per_axis = " << b.cells_per_axis << '\n';

    const CheckSpec& c = config.check;
    out << "\n[check]\nsearch_radius = " << c.search_radius << "\nthreshold = " << format_number(c.threshold) << '\n';
    if (c.degeneracy_threshold) {
        out << "degeneracy_threshold = " << format_number(*c.degeneracy_threshold) << '\n';
    }
    out << "t = " << format_number(c.t) << "\npowers = " << join_ints(c.powers) << '\n';
    if (!c.point.empty()) {
        out << "point = " << join(c.point) << '\n';
    }
    out << "colatitude = " << (c.colatitude == ColatitudeLaw::Sine ? "sine" : "uniform") << '\n';
    return out.str();
}

TorusMultiflow build_flow(const FlowSpec& spec) { return TorusMultiflow(spec.torus_dim, spec.time_dim, spec.matrix); }

WeightMeasure build_measure(const MeasureSpec& spec) {
    if (spec.conv_power < 1) {
        throw ConfigError("config: conv_power must be at least 1");
    }
    auto require = [&](bool ok, const char* what) {
        if (!ok) {
            throw ConfigError("config: measure kind " + spec.kind + " needs " + what);
        }
    };
    WeightMeasure base = [&]() -> WeightMeasure {
        if (spec.kind == "interval") {
            return interval_density();
        }
        if (spec.kind == "box") {
            require(!spec.lo.empty() && spec.lo.size() == spec.hi.size(), "lo and hi of equal length");
            return uniform_box(spec.lo, spec.hi);
        }
        if (spec.kind == "point") {
            require(!spec.at.empty(), "at");
            return point_mass(spec.at);
        }
        if (spec.kind == "moment-curve") {
            return make_moment_curve(spec.dim);
        }
        if (spec.kind == "line") {
            require(spec.dim >= 1, "dim");
            return make_straight_line(spec.dim);
        }
        if (spec.kind == "sphere") {
            require(!spec.center.empty(), "center");
            return make_sphere(spec.center, spec.radius);
        }
        if (spec.kind == "semimeridian") {
            require(spec.center.size() == 3, "a center in R^3");
            return make_semimeridian(spec.longitude, SphereMeasure{spec.center, spec.radius});
        }
        throw ConfigError("config: unknown measure kind " + spec.kind);
    }();
    return spec.conv_power == 1 ? base : make_conv_power(base, spec.conv_power);
}

TrigObservable build_observable(const ObservableSpec& spec, std::size_t torus_dim) {
    if (spec.preset == "five-mode") {
        return five_mode_observable(torus_dim);
    }
    return TrigObservable(torus_dim, spec.modes, spec.real_valued);
}

} // namespace ergolab

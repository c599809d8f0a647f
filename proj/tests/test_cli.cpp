#include "doctest.h"

#include "ergolab/config.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/presets.hpp"
#include "ergolab/runner.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

using namespace ergolab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("ergolab-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "ergolab");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

json schema() {
    std::ifstream in(ERGOLAB_SCHEMA_PATH);
    REQUIRE(in);
    return json::parse(in);
}

std::string header_of(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

std::string join_columns(const json& columns) {
    std::string out;
    for (const auto& c : columns) {
        out += (out.empty() ? "" : ",") + c.get<std::string>();
    }
    return out;
}

// Small budgets so every command runs quickly.
ExperimentConfig quick(const std::string& preset) {
    ExperimentConfig c = preset_config(preset);
    c.budget.sample_count = std::min<std::size_t>(c.budget.sample_count, 20'000);
    c.budget.trials = std::min<std::size_t>(c.budget.trials, 2'000);
    c.budget.mc_samples = std::min<std::size_t>(c.budget.mc_samples, 2'000);
    c.budget.cells_per_axis = std::min(c.budget.cells_per_axis, 10);
    if (c.schedule && c.schedule->values.size() > 50) {
        c.schedule->params = {1.0, 10.0, 50.0};
        c.schedule->values = expand_schedule(c.schedule->form, c.schedule->params);
    }
    return c;
}

} // namespace

TEST_CASE("every preset produces the files and columns in the schema") {
    const json s = schema();
    for (const auto& info : list_presets()) {
        CAPTURE(info.name);
        const RunOutput output = run_command(info.command, quick(info.name));
        REQUIRE(output.files.count("summary.json") == 1);
        REQUIRE(output.files.count("config_echo.ini") == 1);
        const json summary = json::parse(output.files.at("summary.json"));
        CHECK(summary["command"] == info.command);
        CHECK(summary["preset"] == info.name);
        CHECK(!summary["justification"].get<std::string>().empty());
        if (output.exit_code != 0) {
            continue;
        }
        const json& files = s["commands"][info.command];
        CHECK(output.files.size() == files.size() + 2);
        for (const auto& [name, columns] : files.items()) {
            CAPTURE(name);
            REQUIRE(output.files.count(name) == 1);
            const std::string header = header_of(output.files.at(name));
            if (name == "histogram.csv") {
                CHECK(header.rfind("i0,", 0) == 0);
                CHECK(header.substr(header.size() - 5) == "count");
            } else {
                CHECK(header == join_columns(columns));
            }
        }
    }
}

TEST_CASE("exit codes") {
    TempDir dir;
    const fs::path out = dir.path / "out";

    auto ok = cli({"check-ergodicity", "--preset", "irrational-line-certificate", "--out", out.string()});
    CHECK(ok.code == 0);
    CHECK(fs::exists(out / "certificate.csv"));

    auto offender = cli({"check-ergodicity", "--preset", "rational-line-certificate", "--out", out.string()});
    CHECK(offender.code == 2);
    const json cert = json::parse(slurp(out / "summary.json"))["certificate"];
    CHECK(cert["offending_k"] == json::array({1, -1}));

    ExperimentConfig refused = quick("nonergodic-control");
    refused.waive_ergodicity = false;
    write(dir.path / "refused.ini", echo_config(refused));
    const fs::path refused_out = dir.path / "refused";
    auto r = cli({"run-sweep", "--config", (dir.path / "refused.ini").string(), "--out", refused_out.string()});
    CHECK(r.code == 2);
    CHECK(json::parse(slurp(refused_out / "summary.json"))["status"] == "refused");
    CHECK(!fs::exists(refused_out / "sweep.csv"));

    const fs::path waived_out = dir.path / "waived";
    auto w = cli({"run-sweep", "--config", (dir.path / "refused.ini").string(), "--waive-ergodicity", "--out",
                  waived_out.string()});
    CHECK(w.code == 0);
    CHECK(json::parse(slurp(waived_out / "summary.json"))["ergodicity"] == "NONERGODIC");

    CHECK(cli({"run-sweep"}).code == 1);
    CHECK(cli({"bogus"}).code == 1);
    CHECK(cli({"run-sweep", "--preset", "theorem1-interval", "--config", "x.ini"}).code == 1);
    CHECK(cli({"run-sweep", "--preset", "theorem1-interval", "--threads", "0", "--out", out.string()}).code == 1);
    CHECK(cli({"--version"}).code == 0);
    auto presets = cli({"presets"});
    CHECK(presets.code == 0);
    CHECK(presets.out.find("theorem5-spheres\trun-sweep") != std::string::npos);
}

TEST_CASE("configuration errors write no files") {
    TempDir dir;
    fs::create_directories(dir.path);
    const fs::path out = dir.path / "out";
    const std::vector<std::string> bad = {
        "[run]\ncommand = run-sweep\n",                                           // no seed
        "[run]\nseed = 1\n[flow]\nmatrix = 1\n[measure]\nkind = interval\n",      // missing sections
        "[run]\nseed = 1\n[schedule]\nvalues =\n",                                // empty schedule
        "[run]\nseed = 1\nunknown = 3\n",                                         // unknown key
        "[run]\nseed = 1\n[flow]\nmatrix = 1 1\n[measure]\nkind = interval\n"     // time dim mismatch
        "[observable]\nmodes = 1 : 1 0\n[schedule]\nvalues = 1 2\n",
    };
    for (const auto& text : bad) {
        CAPTURE(text);
        write(dir.path / "bad.ini", text);
        const auto r = cli({"run-sweep", "--config", (dir.path / "bad.ini").string(), "--out", out.string()});
        CHECK(r.code == 1);
        CHECK(!fs::exists(out));
    }
    CHECK(cli({"run-sweep", "--config", (dir.path / "missing.ini").string(), "--out", out.string()}).code == 1);
    CHECK(!fs::exists(out));
}

TEST_CASE("overrides are applied before the echo") {
    TempDir dir;
    const fs::path out = dir.path / "out";
    auto r = cli({"check-general-position", "--preset", "moment-curve-d4", "--trials", "17", "--seed", "99", "--out",
                  out.string()});
    REQUIRE(r.code == 0);
    const ExperimentConfig echoed = load_config(out / "config_echo.ini");
    CHECK(echoed.budget.trials == 17);
    CHECK(*echoed.seed == 99);
    const json summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["seed"] == 99);
    CHECK(summary["results"]["trials"] == 17);
}

TEST_CASE("outputs are bitwise identical across thread counts") {
    const unsigned many = std::max(4u, std::thread::hardware_concurrency());
    for (const auto& info : list_presets()) {
        CAPTURE(info.name);
        const ExperimentConfig config = quick(info.name);
        set_thread_count(1);
        const RunOutput one = run_command(info.command, config);
        set_thread_count(many);
        const RunOutput again = run_command(info.command, config);
        CHECK(one.exit_code == again.exit_code);
        CHECK(one.files == again.files);
    }
}

TEST_CASE("re-running the config echo reproduces the run") {
    TempDir dir;
    const fs::path first = dir.path / "first";
    const fs::path second = dir.path / "second";
    REQUIRE(cli({"iterate-check", "--preset", "moment-curve-iterate", "--mc-samples", "5000", "--out", first.string()})
                .code == 0);
    REQUIRE(cli({"iterate-check", "--config", (first / "config_echo.ini").string(), "--out", second.string()}).code ==
            0);
    for (const auto& entry : fs::directory_iterator(first)) {
        CAPTURE(entry.path().filename().string());
        CHECK(slurp(entry.path()) == slurp(second / entry.path().filename()));
    }
}

TEST_CASE("different seeds change sampled outputs") {
    ExperimentConfig a = quick("sphere-conv-2");
    ExperimentConfig b = a;
    b.seed = *a.seed + 1;
    CHECK(run_command("conv-density", a).files.at("histogram.csv") !=
          run_command("conv-density", b).files.at("histogram.csv"));
}

#include "doctest.h"

#include "weylscope/error.hpp"
#include "weylscope/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace weylscope;
using namespace weylscope::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("weylscope_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error(std::string_view text, std::optional<Task> task = std::nullopt) {
    try {
        parse_config(text, "cfg.json", task);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        return e.what();
    }
    FAIL("expected ConfigError");
    return {};
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
    if (files.empty()) return false;
    for (const auto& f : files)
        if (!fs::exists(b / f) || slurp(a / f) != slurp(b / f)) return false;
    return true;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WEYLSCOPE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* square_weyl = R"({
  "domain": {"kind": "box", "sides": [3.141592653589793, 3.141592653589793]},
  "bc": "dirichlet",
  "weyl": {"points": [5], "windows": [1, 1.5, 2, 3, 4.5]},
  "expect": {"count@5": [15, 15], "remainder@5": [0.365045, 0.365047]}
})";

} // namespace

TEST_CASE("config parsing reads every section") {
    const auto cfg = parse_config(R"({
      "task": "trace",
      "domain": {"kind": "constant_width", "h0": 0.5, "harmonics": [[3, 0.02, 0.0]]},
      "bc": "neumann",
      "spectrum": {"lambda_max": 60, "resolution": 512},
      "trace": {"T": 2, "epsilon": 0.5, "grid": {"lo": 10, "hi": 50, "step": 0.05},
                "peaks": {"t_lo": 1, "t_hi": 3}, "amplitude": {"bounces": 2, "winding": 1}},
      "expect": {"exponent": [0.4, null]},
      "seed": 7
    })");
    CHECK(cfg.task == Task::trace);
    CHECK(cfg.planar);
    CHECK(cfg.domain.kind == geometry::DomainKind::constant_width);
    CHECK(cfg.bc == spectra::BoundaryCondition::neumann);
    CHECK(*cfg.spectrum.lambda_max == 60.0);
    CHECK(cfg.spectrum.resolution == 512);
    CHECK(cfg.trace.period == 2.0);
    CHECK(cfg.trace.peaks->smoothing == 0.01);
    CHECK(cfg.trace.amplitude->first == 2);
    REQUIRE(cfg.expect.size() == 1);
    CHECK(cfg.expect[0].second.contains(100.0));
    CHECK_FALSE(cfg.expect[0].second.contains(0.3));
    CHECK(*cfg.seed == 7);

    const auto windows = parse_config(R"({"domain": {"kind": "disk"}, "weyl": {"windows": {"first": 40, "last": 300}}})",
                                      "cfg", Task::weyl);
    CHECK(windows.weyl.windows.size() == 5);
    CHECK(windows.weyl.windows.back() == doctest::Approx(202.5));
}

TEST_CASE("config diagnostics name the field and its line") {
    const auto eps = config_error("{\n  \"domain\": {\"kind\": \"disk\"},\n  \"trace\": {\n    \"T\": 4,\n"
                                  "    \"epsilon\": 4.5,\n    \"grid\": {\"lo\": 50, \"hi\": 400, \"step\": 0.05}\n  }\n}",
                                  Task::trace);
    CHECK(eps.find("cfg.json:5") != std::string::npos);
    CHECK(eps.find("/trace/epsilon") != std::string::npos);

    CHECK(config_error("{\"domain\": {\"kind\": \"disk\"},\n \"weyl\": {\"point\": [5]}}").find("/weyl/point") !=
          std::string::npos);
    CHECK(config_error("{\n\"domain\": {\"kind\": \"disk\"\n").find("cfg.json") != std::string::npos);
    CHECK(config_error(R"({"domain": {"kind": "ellipse", "a": 0.5, "b": 1}, "weyl": {"points": [1]}})")
              .find("/domain") != std::string::npos);
    CHECK(config_error(R"({"domain": {"kind": "ball", "dimension": 3}, "rellich": {"modes": 3}})", Task::rellich)
              .find("planar") != std::string::npos);
    CHECK(config_error(R"({"task": "weyl", "domain": {"kind": "disk"}, "weyl": {"points": [1]}})", Task::trace)
              .find("/task") != std::string::npos);
    CHECK(config_error(R"({"domain": {"kind": "disk"}, "expect": {"alpha": [2, 1]}})").find("/expect/alpha") !=
          std::string::npos);
    CHECK(config_error(R"({"domain": {"kind": "disk"}})", Task::spectrum).find("lambda_max") != std::string::npos);
}

TEST_CASE("square weyl run records counts and checks") {
    const auto dir = scratch("square");
    const auto outcome = run(parse_config(square_weyl, "cfg", Task::weyl), dir);
    CHECK(outcome.failed_checks.empty());
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "dyadic.csv"));
    const auto counts = slurp(dir / "counts.csv");
    CHECK(counts.find("5,15,") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical artifacts") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const char* orbit_cfg = R"({"domain": {"kind": "ellipse", "a": 1, "b": 0.8},
                               "orbits": {"max_bounces": 4, "admissibility_epsilon": 0.1}, "seed": 3})";
    run(parse_config(orbit_cfg, "cfg", Task::orbits), a);
    run(parse_config(orbit_cfg, "cfg", Task::orbits), b);
    CHECK(same_tree(a, b));
}

TEST_CASE("cached spectra reproduce recomputed downstream results") {
    const char* cfg_text = R"({"domain": {"kind": "disk"}, "bc": "neumann",
                             "trace": {"T": 4, "epsilon": 0.9, "grid": {"lo": 20, "hi": 90, "step": 0.1}}})";
    const auto cfg = parse_config(cfg_text, "cfg", Task::trace);
    const auto plain = scratch("cache_plain"), miss = scratch("cache_miss"), hit = scratch("cache_hit");
    const auto cache = scratch("cache_store");
    ::unsetenv("WEYLSCOPE_CACHE");
    run(cfg, plain);
    ::setenv("WEYLSCOPE_CACHE", cache.c_str(), 1);
    run(cfg, miss);
    CHECK(std::distance(fs::directory_iterator(cache), fs::directory_iterator{}) == 2);
    run(cfg, hit);
    ::unsetenv("WEYLSCOPE_CACHE");
    CHECK(same_tree(plain, miss));
    CHECK(same_tree(plain, hit));
}

TEST_CASE("report groups runs by boundary condition") {
    const auto root = scratch("report");
    CHECK_THROWS_AS(report({root}, root), Error);
    try {
        report({root}, root);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingArtifact);
        CHECK(exit_code(e) == 2);
    }
    run(parse_config(R"({"domain": {"kind": "disk"}, "bc": "dirichlet", "rellich": {"modes": 6},
                        "expect": {"max_residual": [null, 1e-10]}})", "cfg", Task::rellich),
        root / "dir");
    run(parse_config(R"({"domain": {"kind": "disk"}, "bc": "neumann", "rellich": {"modes": 6},
                        "expect": {"max_residual": [null, 1e-30]}})", "cfg", Task::rellich),
        root / "neu");
    const auto outcome = report({root}, root / "bundle");
    const auto md = slurp(root / "bundle" / "report.md");
    CHECK(md.find("## Boundary condition: dirichlet") != std::string::npos);
    CHECK(md.find("## Boundary condition: neumann") != std::string::npos);
    CHECK(md.find("Rellich residuals") != std::string::npos);
    REQUIRE(outcome.failed_checks.size() == 1);
    CHECK(outcome.failed_checks[0] == "neu:max_residual");
    CHECK(fs::exists(root / "bundle" / "report_metrics.csv"));
}

TEST_CASE("command-line exit codes") {
    const auto dir = scratch("exit");
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };
    const auto ok = write("ok.json", square_weyl);
    const auto bad = write("bad.json", R"({"domain": {"kind": "disk"},
      "trace": {"T": 4, "epsilon": 4.1, "grid": {"lo": 50, "hi": 400, "step": 0.05}}})");
    const auto numeric = write("short.json", R"({"domain": {"kind": "disk"}, "spectrum": {"lambda_max": 3},
      "weyl": {"points": [5]}})");
    const auto failing = write("failing.json", R"({"domain": {"kind": "box", "sides": [3.141592653589793, 3.141592653589793]},
      "weyl": {"points": [5]}, "expect": {"count@5": [16, 16]}})");
    CHECK(run_cli("weyl --config " + ok + " --out " + (dir / "runs/ok").string()) == 0);
    CHECK(run_cli("trace --config " + bad + " --out " + (dir / "runs/bad").string()) == 2);
    CHECK(run_cli("weyl --config " + numeric + " --out " + (dir / "runs/short").string()) == 3);
    CHECK(run_cli("weyl --config " + (dir / "missing.json").string()) == 2);
    CHECK(run_cli("nonsense") == 2);
    CHECK(run_cli("report --out " + (dir / "runs").string() + " --assert") == 0);
    CHECK(run_cli("weyl --config " + failing + " --out " + (dir / "runs/failing").string()) == 0);
    CHECK(run_cli("report --out " + (dir / "runs").string()) == 0);
    CHECK(run_cli("report --out " + (dir / "runs").string() + " --assert") == 4);
    CHECK(run_cli("report --out " + (dir / "empty").string()) == 2);
}

#include "weylscope/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace weylscope::cli {

using json = nlohmann::json;

std::string to_string(Task task) {
    switch (task) {
    case Task::spectrum: return "spectrum";
    case Task::orbits: return "orbits";
    case Task::weyl: return "weyl";
    case Task::trace: return "trace";
    case Task::rellich: return "rellich";
    case Task::report: return "report";
    }
    return "unknown";
}

std::optional<Task> parse_task(std::string_view name) {
    for (Task t : {Task::spectrum, Task::orbits, Task::weyl, Task::trace, Task::rellich, Task::report})
        if (to_string(t) == name) return t;
    return std::nullopt;
}

namespace {

/// Field access with diagnostics of the form "source:line: field '/a/b': message".
class Reader {
public:
    Reader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
        throw Error(ErrorCode::ConfigError,
                    source_ + ":" + std::to_string(line_of(pointer)) + ": field '" + pointer + "': " + message);
    }

    void allow(const json& object, const std::string& pointer, std::initializer_list<const char*> keys) const {
        if (!object.is_object()) fail(pointer, "expected an object");
        for (const auto& [key, value] : object.items()) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
                fail(pointer + "/" + key, "unknown field");
        }
    }

    double number(const json& object, const std::string& pointer, const char* key) const {
        const std::string at = pointer + "/" + key;
        if (!object.contains(key)) fail(at, "required");
        return number_at(object[key], at);
    }

    double number_or(const json& object, const std::string& pointer, const char* key, double fallback) const {
        return object.contains(key) ? number_at(object[key], pointer + "/" + key) : fallback;
    }

    std::optional<double> optional_number(const json& object, const std::string& pointer, const char* key) const {
        if (!object.contains(key)) return std::nullopt;
        return number_at(object[key], pointer + "/" + key);
    }

    double number_at(const json& value, const std::string& pointer) const {
        if (!value.is_number()) fail(pointer, "expected a number");
        const double v = value.get<double>();
        if (!std::isfinite(v)) fail(pointer, "must be finite");
        return v;
    }

    int integer(const json& object, const std::string& pointer, const char* key, int fallback) const {
        if (!object.contains(key)) return fallback;
        const auto& v = object[key];
        if (!v.is_number_integer()) fail(pointer + "/" + key, "expected an integer");
        return v.get<int>();
    }

    std::string text(const json& object, const std::string& pointer, const char* key) const {
        const std::string at = pointer + "/" + key;
        if (!object.contains(key)) fail(at, "required");
        if (!object[key].is_string()) fail(at, "expected a string");
        return object[key].get<std::string>();
    }

    std::vector<double> numbers(const json& value, const std::string& pointer) const {
        if (!value.is_array()) fail(pointer, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < value.size(); ++i) out.push_back(number_at(value[i], pointer + "/" + std::to_string(i)));
        return out;
    }

private:
    // Follows the pointer through quoted keys in the raw text; array indices are not resolved.
    int line_of(const std::string& pointer) const {
        std::size_t pos = 0;
        std::stringstream parts(pointer);
        std::string part;
        while (std::getline(parts, part, '/')) {
            if (part.empty() || std::all_of(part.begin(), part.end(), ::isdigit)) continue;
            const std::string quoted = "\"" + part + "\"";
            for (std::size_t hit = text_.find(quoted, pos); hit != std::string_view::npos;
                 hit = text_.find(quoted, hit + 1)) {
                std::size_t after = hit + quoted.size();
                while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
                if (after < text_.size() && text_[after] == ':') {
                    pos = hit;
                    break;
                }
            }
        }
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
    }

    std::string_view text_;
    std::string source_;
};

GridSpec parse_grid(const Reader& r, const json& g, const std::string& at) {
    r.allow(g, at, {"lo", "hi", "step"});
    GridSpec grid{r.number(g, at, "lo"), r.number(g, at, "hi"), r.number(g, at, "step")};
    if (!(grid.lo < grid.hi)) r.fail(at + "/hi", "must exceed lo");
    if (!(grid.step > 0)) r.fail(at + "/step", "must be positive");
    return grid;
}

std::vector<geometry::Harmonic> parse_harmonics(const Reader& r, const json& list, const std::string& at) {
    if (!list.is_array()) r.fail(at, "expected an array of [k, a, b]");
    std::vector<geometry::Harmonic> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string item = at + "/" + std::to_string(i);
        const auto& h = list[i];
        if (!h.is_array() || h.size() != 3 || !h[0].is_number_integer()) r.fail(item, "expected [k, a, b] with integer k");
        out.push_back({h[0].get<int>(), r.number_at(h[1], item + "/1"), r.number_at(h[2], item + "/2")});
    }
    return out;
}

void parse_domain(const Reader& r, const json& d, ExperimentConfig& cfg) {
    const std::string at = "/domain";
    if (!d.is_object()) r.fail(at, "expected an object");
    const std::string kind = r.text(d, at, "kind");
    json canonical = {{"kind", kind}};
    try {
        if (kind == "disk") {
            r.allow(d, at, {"kind", "radius"});
            cfg.domain = geometry::DomainSpec::disk(r.number_or(d, at, "radius", 1.0));
            canonical["radius"] = cfg.domain.radius;
        } else if (kind == "ellipse") {
            r.allow(d, at, {"kind", "a", "b"});
            cfg.domain = geometry::DomainSpec::ellipse(r.number(d, at, "a"), r.number(d, at, "b"));
            canonical["a"] = cfg.domain.semi_major;
            canonical["b"] = cfg.domain.semi_minor;
        } else if (kind == "constant_width" || kind == "generic_support") {
            r.allow(d, at, {"kind", "h0", "harmonics"});
            const double h0 = r.number(d, at, "h0");
            const auto harmonics = d.contains("harmonics") ? parse_harmonics(r, d["harmonics"], at + "/harmonics")
                                                           : std::vector<geometry::Harmonic>{};
            cfg.domain = kind == "constant_width" ? geometry::DomainSpec::constant_width(h0, harmonics)
                                                  : geometry::DomainSpec::generic_support(h0, harmonics);
            canonical["h0"] = h0;
            canonical["harmonics"] = json::array();
            for (const auto& h : harmonics) canonical["harmonics"].push_back({h.k, h.a, h.b});
        } else if (kind == "ball") {
            r.allow(d, at, {"kind", "dimension", "radius"});
            cfg.planar = false;
            cfg.higher = geometry::HigherDomainSpec::ball(r.integer(d, at, "dimension", 3), r.number_or(d, at, "radius", 1.0));
            canonical["dimension"] = cfg.higher.dimension;
            canonical["radius"] = cfg.higher.radius;
        } else if (kind == "box") {
            r.allow(d, at, {"kind", "sides"});
            if (!d.contains("sides")) r.fail(at + "/sides", "required");
            cfg.planar = false;
            cfg.higher = geometry::HigherDomainSpec::box(r.numbers(d["sides"], at + "/sides"));
            canonical["sides"] = cfg.higher.sides;
        } else {
            r.fail(at + "/kind", "unknown domain kind '" + kind + "'");
        }
        if (cfg.planar)
            (void)geometry::build_domain(cfg.domain, 64);
        else
            geometry::validate(cfg.higher);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        r.fail(at, e.what());
    }
    cfg.domain_key = canonical.dump();
}

Range parse_range(const Reader& r, const json& v, const std::string& at) {
    if (!v.is_array() || v.size() != 2) r.fail(at, "expected [lo, hi] with null for an open side");
    Range out;
    if (!v[0].is_null()) out.lo = r.number_at(v[0], at + "/0");
    if (!v[1].is_null()) out.hi = r.number_at(v[1], at + "/1");
    if (out.lo && out.hi && *out.lo > *out.hi) r.fail(at, "lo exceeds hi");
    return out;
}

} // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source, std::optional<Task> task) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, source + ": " + e.what());
    }
    const Reader r(text, source);
    r.allow(root, "", {"task", "domain", "bc", "spectrum", "weyl", "trace", "orbits", "rellich", "expect", "output",
                       "inputs", "seed", "threads"});

    ExperimentConfig cfg;
    if (root.contains("task")) {
        const auto declared = parse_task(r.text(root, "", "task"));
        if (!declared) r.fail("/task", "unknown task");
        if (task && *task != *declared)
            r.fail("/task", "config declares '" + to_string(*declared) + "' but the command is '" + to_string(*task) + "'");
        cfg.task = *declared;
    } else if (task) {
        cfg.task = *task;
    }
    if (root.contains("output")) cfg.output = r.text(root, "", "output");
    if (root.contains("inputs")) {
        const auto& list = root["inputs"];
        if (!list.is_array()) r.fail("/inputs", "expected an array of paths");
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!list[i].is_string()) r.fail("/inputs/" + std::to_string(i), "expected a path string");
            cfg.inputs.emplace_back(list[i].get<std::string>());
        }
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) r.fail("/seed", "expected a non-negative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("threads")) {
        const int threads = r.integer(root, "", "threads", 0);
        if (threads < 0) r.fail("/threads", "must be non-negative");
        cfg.threads = threads;
    }
    if (cfg.task == Task::report && !root.contains("domain")) return cfg;

    if (!root.contains("domain")) r.fail("/domain", "required");
    parse_domain(r, root["domain"], cfg);
    if (root.contains("bc")) {
        const std::string bc = r.text(root, "", "bc");
        if (bc != "dirichlet" && bc != "neumann") r.fail("/bc", "expected 'dirichlet' or 'neumann'");
        cfg.bc = spectra::parse_boundary_condition(bc);
    }

    if (root.contains("spectrum")) {
        const auto& s = root["spectrum"];
        r.allow(s, "/spectrum", {"lambda_max", "lambda_min", "resolution"});
        cfg.spectrum.lambda_max = r.optional_number(s, "/spectrum", "lambda_max");
        cfg.spectrum.lambda_min = r.number_or(s, "/spectrum", "lambda_min", 0.0);
        cfg.spectrum.resolution = r.integer(s, "/spectrum", "resolution", 0);
        if (cfg.spectrum.lambda_max && !(*cfg.spectrum.lambda_max > cfg.spectrum.lambda_min))
            r.fail("/spectrum/lambda_max", "must exceed lambda_min");
        if (cfg.spectrum.lambda_min < 0) r.fail("/spectrum/lambda_min", "must be non-negative");
        if (cfg.spectrum.resolution != 0 && cfg.spectrum.resolution < 64)
            r.fail("/spectrum/resolution", "must be 0 or at least 64");
    }

    if (root.contains("weyl")) {
        const auto& w = root["weyl"];
        const std::string at = "/weyl";
        r.allow(w, at, {"points", "windows", "predicted_exponent", "grid"});
        if (w.contains("points")) cfg.weyl.points = r.numbers(w["points"], at + "/points");
        if (w.contains("windows")) {
            const auto& win = w["windows"];
            if (win.is_object()) {
                r.allow(win, at + "/windows", {"first", "last", "ratio"});
                const double first = r.number(win, at + "/windows", "first");
                const double last = r.number(win, at + "/windows", "last");
                const double ratio = r.number_or(win, at + "/windows", "ratio", 1.5);
                if (!(first > 0)) r.fail(at + "/windows/first", "must be positive");
                if (!(last >= first)) r.fail(at + "/windows/last", "must be at least first");
                if (!(ratio > 1)) r.fail(at + "/windows/ratio", "must exceed 1");
                for (double x = first; x <= last * (1 + 1e-12); x *= ratio) cfg.weyl.windows.push_back(x);
            } else {
                cfg.weyl.windows = r.numbers(win, at + "/windows");
            }
            for (std::size_t i = 0; i < cfg.weyl.windows.size(); ++i)
                if (!(cfg.weyl.windows[i] > 0)) r.fail(at + "/windows/" + std::to_string(i), "must be positive");
        }
        for (std::size_t i = 0; i < cfg.weyl.points.size(); ++i)
            if (cfg.weyl.points[i] < 0) r.fail(at + "/points/" + std::to_string(i), "must be non-negative");
        cfg.weyl.predicted_exponent = r.number_or(w, at, "predicted_exponent", 0.5);
        if (w.contains("grid")) cfg.weyl.grid = parse_grid(r, w["grid"], at + "/grid");
    }

    if (root.contains("trace")) {
        const auto& t = root["trace"];
        const std::string at = "/trace";
        r.allow(t, at, {"T", "epsilon", "tail_tol", "grid", "dimension", "peaks", "amplitude"});
        cfg.trace.period = r.number(t, at, "T");
        cfg.trace.epsilon = r.number(t, at, "epsilon");
        cfg.trace.tail_tol = r.number_or(t, at, "tail_tol", 1e-10);
        if (!(cfg.trace.period > 0)) r.fail(at + "/T", "must be positive");
        if (!(cfg.trace.epsilon > 0)) r.fail(at + "/epsilon", "must be positive");
        if (!(cfg.trace.epsilon < cfg.trace.period))
            r.fail(at + "/epsilon", "must be smaller than T so that 0 stays outside the test-function support");
        if (!(cfg.trace.tail_tol > 0)) r.fail(at + "/tail_tol", "must be positive");
        if (!t.contains("grid")) r.fail(at + "/grid", "required");
        cfg.trace.grid = parse_grid(r, t["grid"], at + "/grid");
        cfg.trace.dimension = r.integer(t, at, "dimension", 1);
        if (cfg.trace.dimension < 0) r.fail(at + "/dimension", "must be non-negative");
        if (t.contains("peaks")) {
            const auto& p = t["peaks"];
            r.allow(p, at + "/peaks", {"t_lo", "t_hi", "smoothing"});
            PeakScan scan{r.number(p, at + "/peaks", "t_lo"), r.number(p, at + "/peaks", "t_hi"),
                          r.number_or(p, at + "/peaks", "smoothing", 0.01)};
            if (!(scan.t_hi > scan.t_lo)) r.fail(at + "/peaks/t_hi", "must exceed t_lo");
            if (!(scan.smoothing > 0)) r.fail(at + "/peaks/smoothing", "must be positive");
            cfg.trace.peaks = scan;
        }
        if (t.contains("amplitude")) {
            const auto& a = t["amplitude"];
            r.allow(a, at + "/amplitude", {"bounces", "winding"});
            const int k = r.integer(a, at + "/amplitude", "bounces", 2);
            const int m = r.integer(a, at + "/amplitude", "winding", 1);
            if (k < 2 || m < 1 || 2 * m > k) r.fail(at + "/amplitude", "need bounces >= 2 and 1 <= winding <= bounces/2");
            if (!cfg.planar) r.fail(at + "/amplitude", "geometric amplitude needs a planar domain");
            cfg.trace.amplitude = std::pair{k, m};
        }
    }

    if (root.contains("orbits")) {
        const auto& o = root["orbits"];
        const std::string at = "/orbits";
        r.allow(o, at, {"max_bounces", "max_winding", "max_length", "admissibility_epsilon"});
        cfg.orbits.max_bounces = r.integer(o, at, "max_bounces", 5);
        if (cfg.orbits.max_bounces < 2) r.fail(at + "/max_bounces", "must be at least 2");
        if (o.contains("max_winding")) {
            cfg.orbits.max_winding = r.integer(o, at, "max_winding", 1);
            if (*cfg.orbits.max_winding < 1) r.fail(at + "/max_winding", "must be at least 1");
        }
        cfg.orbits.max_length = r.optional_number(o, at, "max_length");
        if (cfg.orbits.max_length && !(*cfg.orbits.max_length > 0)) r.fail(at + "/max_length", "must be positive");
        cfg.orbits.admissibility_epsilon = r.optional_number(o, at, "admissibility_epsilon");
        if (cfg.orbits.admissibility_epsilon && !(*cfg.orbits.admissibility_epsilon > 0))
            r.fail(at + "/admissibility_epsilon", "must be positive");
    }

    if (root.contains("rellich")) {
        const auto& rl = root["rellich"];
        r.allow(rl, "/rellich", {"modes"});
        cfg.rellich.modes = r.integer(rl, "/rellich", "modes", 20);
        if (cfg.rellich.modes < 1) r.fail("/rellich/modes", "must be positive");
    }

    if (root.contains("expect")) {
        const auto& e = root["expect"];
        if (!e.is_object()) r.fail("/expect", "expected an object of metric: [lo, hi]");
        for (const auto& [metric, range] : e.items())
            cfg.expect.emplace_back(metric, parse_range(r, range, "/expect/" + metric));
    }

    const bool needs_planar = cfg.task == Task::orbits || cfg.task == Task::rellich;
    if (needs_planar && !cfg.planar) r.fail("/domain/kind", "task '" + to_string(cfg.task) + "' needs a planar domain");
    if (cfg.task == Task::trace && !root.contains("trace")) r.fail("/trace", "required for the trace task");
    if (cfg.task == Task::weyl && cfg.weyl.points.empty() && cfg.weyl.windows.empty() && !cfg.weyl.grid)
        r.fail("/weyl", "give points, windows or a grid");
    if (cfg.task == Task::spectrum && !cfg.spectrum.lambda_max) r.fail("/spectrum/lambda_max", "required");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Task> task) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string(), task);
}

int exit_code(const Error& error) {
    switch (error.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::MissingArtifact: return 2;
    default: return 3;
    }
}

} // namespace weylscope::cli

#include "weylscope/experiment.hpp"

#include "weylscope/billiard.hpp"
#include "weylscope/numerics.hpp"
#include "weylscope/parallel.hpp"
#include "weylscope/trace.hpp"
#include "weylscope/weyl.hpp"

#include "format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>

namespace weylscope::cli {

using ojson = nlohmann::ordered_json;
using detail::format17;
using detail::format_short;
namespace fs = std::filesystem;

namespace {

constexpr const char* cache_version = "weylscope-spectrum-1";

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

bool is_centered_disk(const ExperimentConfig& cfg) {
    return cfg.planar && cfg.domain.kind == geometry::DomainKind::disk && cfg.domain.center.norm() == 0.0;
}

geometry::BoundaryCurve planar_curve(const ExperimentConfig& cfg, double lambda_max) {
    if (cfg.spectrum.resolution > 0) return geometry::build_domain(cfg.domain, cfg.spectrum.resolution);
    const auto coarse = geometry::build_domain(cfg.domain, 256);
    const int res = geometry::spectral_resolution(lambda_max, coarse.perimeter());
    return res == 256 ? coarse : geometry::build_domain(cfg.domain, res);
}

spectra::Spectrum compute_spectrum(const ExperimentConfig& cfg, double lambda_max) {
    if (!cfg.planar) return spectra::closed_form_spectrum(cfg.higher, lambda_max, cfg.bc);
    if (is_centered_disk(cfg)) return spectra::disk_spectrum(cfg.domain.radius, lambda_max, cfg.bc);
    spectra::MpsOptions options;
    options.boundary_data = false;
    return spectra::mps_spectrum(planar_curve(cfg, lambda_max), cfg.spectrum.lambda_min, lambda_max, cfg.bc, options)
        .spectrum;
}

weyl::WeylContext weyl_context(const ExperimentConfig& cfg) {
    if (cfg.planar) return weyl::planar_context(geometry::build_domain(cfg.domain, 256), cfg.bc);
    return weyl::higher_context(cfg.higher, cfg.bc);
}

/// Manifest plus the metric table the expectations are checked against.
class Run {
public:
    Run(const ExperimentConfig& cfg, fs::path dir) : cfg_(cfg), dir_(std::move(dir)) {
        fs::create_directories(dir_);
        manifest_["task"] = to_string(cfg.task);
        manifest_["domain"] = ojson::parse(cfg.domain_key);
        manifest_["bc"] = spectra::to_string(cfg.bc);
        if (cfg.seed) manifest_["seed"] = *cfg.seed;
        manifest_["metrics"] = ojson::object();
        manifest_["artifacts"] = ojson::array();
    }

    const fs::path& dir() const { return dir_; }
    ojson& manifest() { return manifest_; }

    void metric(const std::string& name, double value) { manifest_["metrics"][name] = value; }

    std::ofstream artifact(const std::string& name) {
        manifest_["artifacts"].push_back(name);
        std::ofstream out(dir_ / name);
        if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir_ / name).string());
        return out;
    }

    void record_spectrum(const spectra::Spectrum& s) {
        manifest_["spectrum"] = {{"generator", s.generator},
                                 {"certificate", spectra::to_string(s.certificate)},
                                 {"lambda_min", s.lambda_min},
                                 {"lambda_max", s.lambda_max},
                                 {"levels", s.levels.size()},
                                 {"count", s.total_multiplicity()},
                                 {"hash", hex(spectra::spectrum_hash(s))}};
    }

    RunOutcome finish() {
        RunOutcome outcome{dir_, {}};
        ojson checks = ojson::array();
        const auto& metrics = manifest_["metrics"];
        for (const auto& [name, range] : cfg_.expect) {
            if (!metrics.contains(name))
                throw Error(ErrorCode::ConfigError, "field '/expect/" + name + "': task '" + to_string(cfg_.task) +
                                                        "' produces no metric of that name");
            const double value = metrics[name].get<double>();
            const bool pass = range.contains(value);
            ojson c;
            c["metric"] = name;
            c["lo"] = range.lo ? ojson(*range.lo) : ojson(nullptr);
            c["hi"] = range.hi ? ojson(*range.hi) : ojson(nullptr);
            c["value"] = value;
            c["pass"] = pass;
            checks.push_back(c);
            if (!pass) outcome.failed_checks.push_back(name);
        }
        manifest_["checks"] = checks;
        std::ofstream out(dir_ / "manifest.json");
        out << manifest_.dump(2) << '\n';
        return outcome;
    }

private:
    const ExperimentConfig& cfg_;
    fs::path dir_;
    ojson manifest_;
};

double required_lambda(const ExperimentConfig& cfg, double derived) {
    return cfg.spectrum.lambda_max ? *cfg.spectrum.lambda_max : derived;
}

// ---------------------------------------------------------------------------

void run_spectrum(const ExperimentConfig& cfg, Run& run) {
    const auto s = obtain_spectrum(cfg, *cfg.spectrum.lambda_max);
    run.record_spectrum(s);
    spectra::write_spectrum(s, run.dir() / "spectrum");
    run.manifest()["artifacts"].push_back("spectrum.csv");
    run.manifest()["artifacts"].push_back("spectrum.json");
    run.metric("levels", static_cast<double>(s.levels.size()));
    run.metric("count", static_cast<double>(s.total_multiplicity()));
    if (!s.levels.empty()) run.metric("lowest", s.levels.front().lambda);
}

void run_weyl(const ExperimentConfig& cfg, Run& run) {
    double need = 0.0;
    for (double x : cfg.weyl.points) need = std::max(need, x);
    for (double x : cfg.weyl.windows) need = std::max(need, 2.0 * x);
    if (cfg.weyl.grid) need = std::max(need, cfg.weyl.grid->hi);
    const auto s = obtain_spectrum(cfg, required_lambda(cfg, need * (1 + 1e-9) + 1e-9));
    run.record_spectrum(s);
    const auto ctx = weyl_context(cfg);
    run.manifest()["weyl"] = {{"dimension", ctx.dimension},
                              {"volume", ctx.volume},
                              {"boundary_volume", ctx.boundary_volume},
                              {"predicted_exponent", cfg.weyl.predicted_exponent}};

    const weyl::CountingFunction count(s);
    if (!cfg.weyl.points.empty()) {
        auto out = run.artifact("counts.csv");
        out << "lambda,count,main_term,remainder\n";
        for (double x : cfg.weyl.points) {
            const auto n = count(x);
            const double main = ctx.main_term(x);
            out << format17(x) << ',' << n << ',' << format17(main) << ',' << format17(n - main) << '\n';
            run.metric("count@" + format_short(x), static_cast<double>(n));
            run.metric("remainder@" + format_short(x), static_cast<double>(n) - main);
        }
    }
    if (cfg.weyl.grid) {
        const auto grid = trace::uniform_grid(cfg.weyl.grid->lo, cfg.weyl.grid->hi, cfg.weyl.grid->step);
        const auto series = weyl::remainder_series(s, ctx, grid);
        auto out = run.artifact("remainder.csv");
        out << "lambda,count,main_term,remainder\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            out << format17(series.lambda[i]) << ',' << series.count[i] << ',' << format17(series.main_term[i]) << ','
                << format17(series.remainder[i]) << '\n';
    }
    if (!cfg.weyl.windows.empty()) {
        std::vector<weyl::FitPoint> points;
        auto out = run.artifact("dyadic.csv");
        out << "lambda,average,scaled\n";
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double x : cfg.weyl.windows) {
            const double avg = weyl::dyadic_average(s, ctx, x);
            const double scaled = avg / std::pow(x, cfg.weyl.predicted_exponent);
            out << format17(x) << ',' << format17(avg) << ',' << format17(scaled) << '\n';
            points.push_back({x, avg});
            lo = std::min(lo, scaled);
            hi = std::max(hi, scaled);
        }
        run.metric("min_scaled", lo);
        run.metric("max_scaled", hi);
        if (points.size() >= 5) {
            const auto fit = weyl::exponent_fit(points);
            run.metric("alpha", fit.alpha);
            run.metric("alpha_half_width", fit.half_width);
            run.metric("alpha_weighted", fit.weighted_alpha);
            run.metric("alpha_weighted_half_width", fit.weighted_half_width);
        }
    }
    if (!cfg.planar) {
        const auto t = weyl::third_term_coefficients(cfg.higher);
        ojson third{{"predicted_order", t.predicted_order}, {"polyhedral", t.polyhedral}, {"nonvanishing", t.nonvanishing}};
        if (t.mean_curvature_integral) third["mean_curvature_integral"] = *t.mean_curvature_integral;
        run.manifest()["third_term"] = third;
    }
}

void run_trace(const ExperimentConfig& cfg, Run& run) {
    const auto tf = trace::build_test_function(cfg.trace.period, cfg.trace.epsilon, cfg.trace.tail_tol);
    const auto s = obtain_spectrum(cfg, required_lambda(cfg, cfg.trace.grid.hi + tf.tail_radius() + 1.0));
    run.record_spectrum(s);
    const auto grid = trace::uniform_grid(cfg.trace.grid.lo, cfg.trace.grid.hi, cfg.trace.grid.step);
    const auto ts = trace::smoothed_trace(s, tf, grid);
    {
        auto out = run.artifact("trace.csv");
        out << "lambda,re_S,im_S,abs_S\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            out << format17(ts.lambda[i]) << ',' << format17(ts.value[i].real()) << ',' << format17(ts.value[i].imag())
                << ',' << format17(std::abs(ts.value[i])) << '\n';
    }
    const auto r = trace::oscillation_analysis(ts, cfg.trace.dimension);
    ojson analysis{{"frequency", r.frequency},
                   {"signed_frequency", r.signed_frequency},
                   {"real_part_frequency", r.real_part_frequency},
                   {"frequency_resolution", r.frequency_resolution},
                   {"exponent", r.exponent},
                   {"exponent_half_width", r.exponent_half_width},
                   {"envelope_points", r.envelope_points},
                   {"plateau", {r.plateau_lo, r.plateau_hi}},
                   {"tail_radius", ts.tail_radius},
                   {"truncated", ts.truncated},
                   {"truncation_bound", ts.truncation_bound}};
    run.artifact("analysis.json") << analysis.dump(2) << '\n';
    run.metric("frequency", r.frequency);
    run.metric("real_part_frequency", r.real_part_frequency);
    run.metric("exponent", r.exponent);
    run.metric("exponent_half_width", r.exponent_half_width);
    run.metric("plateau_lo", r.plateau_lo);
    run.metric("plateau_hi", r.plateau_hi);
    run.metric("truncated", ts.truncated ? 1.0 : 0.0);

    if (cfg.trace.peaks) {
        const auto peaks = trace::length_spectrum_peaks(s, cfg.trace.peaks->t_lo, cfg.trace.peaks->t_hi,
                                                        cfg.trace.peaks->smoothing);
        auto out = run.artifact("peaks.csv");
        out << "t,prominence,magnitude\n";
        for (const auto& p : peaks)
            out << format17(p.t) << ',' << format17(p.prominence) << ',' << format17(p.magnitude) << '\n';
        run.metric("peaks", static_cast<double>(peaks.size()));
        if (!peaks.empty()) run.metric("first_peak", peaks.front().t);
    }
    if (cfg.trace.amplitude) {
        const auto curve = geometry::build_domain(cfg.domain, cfg.spectrum.resolution > 0 ? cfg.spectrum.resolution : 256);
        billiard::OrbitSearchOptions options;
        if (cfg.seed) options.seed = *cfg.seed;
        const auto families =
            billiard::find_periodic_orbits(curve, cfg.trace.amplitude->first, cfg.trace.amplitude->second, options);
        const auto it = std::find_if(families.begin(), families.end(),
                                     [](const auto& f) { return f.kind == billiard::FamilyKind::one_parameter; });
        if (it == families.end())
            throw Error(ErrorCode::IsolatedFamily, "no one-parameter family with the requested (bounces, winding)");
        const double amplitude = trace::geometric_amplitude(curve, *it, cfg.bc);
        run.metric("family_length", it->length);
        run.metric("geometric_amplitude", amplitude);
        run.metric("plateau_over_amplitude", r.plateau_lo / amplitude);
    }
}

void run_rellich(const ExperimentConfig& cfg, Run& run) {
    spectra::EigenBoundaryData data;
    geometry::BoundaryCurve curve = geometry::build_domain(cfg.domain, 256);
    if (is_centered_disk(cfg)) {
        data = spectra::disk_modes(curve, cfg.bc, cfg.rellich.modes);
    } else {
        // Two-term Weyl inversion with headroom for the first `modes` levels.
        const double area = curve.area(), perimeter = curve.perimeter();
        const double guess = (perimeter + std::sqrt(perimeter * perimeter + 16.0 * numerics::pi * area * cfg.rellich.modes)) /
                             (2.0 * area);
        const double lambda_max = required_lambda(cfg, 1.15 * guess + 1.0);
        curve = planar_curve(cfg, lambda_max);
        auto result = spectra::mps_spectrum(curve, 0.0, lambda_max, cfg.bc);
        run.record_spectrum(result.spectrum);
        data = std::move(result.data);
        if (static_cast<int>(data.modes.size()) < cfg.rellich.modes)
            throw Error(ErrorCode::BeyondValidity, "only " + std::to_string(data.modes.size()) +
                                                       " modes below lambda_max; raise spectrum.lambda_max");
        data.modes.resize(static_cast<std::size_t>(cfg.rellich.modes));
    }
    const auto residuals = spectra::rellich_check(curve, data, cfg.bc);
    auto out = run.artifact("rellich.csv");
    out << "lambda,integral,residual,allowance\n";
    double worst = 0.0, allowance = 0.0;
    for (const auto& r : residuals) {
        out << format17(r.lambda) << ',' << format17(r.integral) << ',' << format17(r.residual) << ','
            << format17(r.allowance) << '\n';
        worst = std::max(worst, r.residual);
        allowance = std::max(allowance, r.allowance);
    }
    run.metric("modes", static_cast<double>(residuals.size()));
    run.metric("max_residual", worst);
    run.metric("max_allowance", allowance);
}

void run_orbits(const ExperimentConfig& cfg, Run& run) {
    const auto curve =
        geometry::build_domain(cfg.domain, cfg.spectrum.resolution > 0 ? cfg.spectrum.resolution : 256);
    billiard::SweepOptions sweep;
    sweep.max_bounces = cfg.orbits.max_bounces;
    if (cfg.seed) sweep.search.seed = *cfg.seed;
    const int winding_cap = cfg.orbits.max_winding.value_or(cfg.orbits.max_bounces);

    std::vector<billiard::OrbitFamily> families;
    if (cfg.orbits.max_length) {
        for (auto& f : billiard::length_spectrum(curve, *cfg.orbits.max_length, sweep).entries)
            if (f.winding <= winding_cap) families.push_back(std::move(f));
    } else {
        for (int k = 2; k <= cfg.orbits.max_bounces; ++k)
            for (int m = 1; 2 * m <= k && m <= winding_cap; ++m) {
                if (std::gcd(k, m) != 1) continue;
                for (auto& f : billiard::find_periodic_orbits(curve, k, m, sweep.search)) families.push_back(std::move(f));
            }
        std::stable_sort(families.begin(), families.end(),
                         [](const auto& a, const auto& b) { return a.length < b.length; });
    }
    if (families.empty()) throw Error(ErrorCode::NoOrbitFound, "no periodic orbits in the requested range");

    std::map<std::string, int> seen;
    auto label = [&](const billiard::OrbitFamily& f) {
        std::string base = "@" + std::to_string(f.bounces) + ":" + std::to_string(f.winding);
        if (f.iterate > 1) base += "x" + std::to_string(f.iterate);
        const int n = seen[base]++;
        return n == 0 ? base : base + "#" + std::to_string(n);
    };
    std::vector<std::string> labels;
    {
        auto out = run.artifact("orbits.csv");
        out << "bounces,winding,iterate,length,kind,dimension,s0,eta0\n";
        for (const auto& f : families) {
            const auto& p = f.representatives.front().phase.front();
            out << f.bounces << ',' << f.winding << ',' << f.iterate << ',' << format17(f.length) << ','
                << (f.kind == billiard::FamilyKind::one_parameter ? "one_parameter" : "isolated") << ',' << f.dimension
                << ',' << format17(p.s) << ',' << format17(p.eta) << '\n';
            labels.push_back(label(f));
            run.metric("length" + labels.back(), f.length);
        }
    }
    run.metric("families", static_cast<double>(families.size()));
    run.metric("shortest_length", families.front().length);

    if (cfg.orbits.admissibility_epsilon) {
        const double eps = *cfg.orbits.admissibility_epsilon;
        double longest = 0.0;
        for (const auto& f : families) longest = std::max(longest, f.length);
        const auto spectrum = billiard::length_spectrum(curve, longest + eps + 1e-6, sweep);
        auto out = run.artifact("admissibility.csv");
        out << "bounces,winding,iterate,length,isolation_gap,kernel_dimensions,glancing_margin,isolated,clean,"
               "non_glancing,admissible\n";
        int admissible = 0;
        for (std::size_t i = 0; i < families.size(); ++i) {
            const auto& f = families[i];
            const auto rep = billiard::admissibility_check(curve, f, spectrum, eps);
            std::string dims;
            for (int d : rep.kernel_dimensions) dims += (dims.empty() ? "" : ";") + std::to_string(d);
            out << f.bounces << ',' << f.winding << ',' << f.iterate << ',' << format17(f.length) << ','
                << format17(rep.isolation_gap) << ',' << dims << ',' << format17(rep.glancing_margin) << ','
                << rep.isolated << ',' << rep.clean << ',' << rep.non_glancing << ',' << rep.admissible() << '\n';
            admissible += rep.admissible();
            run.metric("isolation_gap" + labels[i], rep.isolation_gap);
            run.metric("admissible" + labels[i], rep.admissible() ? 1.0 : 0.0);
            run.metric("kernel_dimension" + labels[i],
                       *std::max_element(rep.kernel_dimensions.begin(), rep.kernel_dimensions.end()));
        }
        run.metric("admissible_families", admissible);
        if (spectrum.incomplete) run.manifest()["length_spectrum_incomplete"] = true;
    }
}

} // namespace

spectra::Spectrum obtain_spectrum(const ExperimentConfig& config, double lambda_max) {
    const char* cache_env = std::getenv("WEYLSCOPE_CACHE");
    if (!cache_env || !*cache_env) return compute_spectrum(config, lambda_max);

    const std::string key = std::string(cache_version) + "|" + config.domain_key + "|" + spectra::to_string(config.bc) +
                            "|" + format17(config.spectrum.lambda_min) + "|" + format17(lambda_max) + "|" +
                            std::to_string(config.spectrum.resolution);
    const fs::path stem = fs::path(cache_env) / ("spectrum-" + hex(numerics::fnv1a(key)));
    if (fs::exists(stem.string() + ".csv") && fs::exists(stem.string() + ".json")) return spectra::read_spectrum(stem);
    auto s = compute_spectrum(config, lambda_max);
    spectra::write_spectrum(s, stem);
    return s;
}

RunOutcome run(const ExperimentConfig& config, const fs::path& directory) {
    if (config.task == Task::report) {
        auto inputs = config.inputs;
        if (inputs.empty()) inputs.push_back(directory);
        return report(inputs, directory);
    }
    if (config.threads) parallel::set_default_threads(*config.threads);
    Run run_state(config, directory);
    try {
        switch (config.task) {
        case Task::spectrum: run_spectrum(config, run_state); break;
        case Task::weyl: run_weyl(config, run_state); break;
        case Task::trace: run_trace(config, run_state); break;
        case Task::rellich: run_rellich(config, run_state); break;
        case Task::orbits: run_orbits(config, run_state); break;
        case Task::report: break;
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        std::string message = e.what();
        const std::string prefix = std::string(to_string(e.code())) + ": ";
        if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
        throw Error(e.code(), "task '" + to_string(config.task) + "': " + message);
    }
    return run_state.finish();
}

} // namespace weylscope::cli

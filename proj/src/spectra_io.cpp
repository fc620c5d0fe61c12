#include "weylscope/spectra.hpp"

#include "weylscope/error.hpp"

#include "format.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace weylscope::spectra {

namespace {

using detail::format17;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
    return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void write_spectrum(const Spectrum& spectrum, const std::filesystem::path& stem) {
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
    std::ofstream csv(with_suffix(stem, ".csv"));
    if (!csv) throw Error(ErrorCode::InvalidArgument, "cannot write " + with_suffix(stem, ".csv").string());
    csv << "lambda,multiplicity\n";
    for (const auto& level : spectrum.levels) csv << format17(level.lambda) << ',' << level.multiplicity << '\n';

    nlohmann::ordered_json meta;
    meta["generator"] = spectrum.generator;
    meta["bc"] = to_string(spectrum.bc);
    meta["lambda_max"] = spectrum.lambda_max;
    meta["lambda_min"] = spectrum.lambda_min;
    meta["certificate"] = to_string(spectrum.certificate);
    meta["levels"] = spectrum.levels.size();
    meta["count"] = spectrum.total_multiplicity();
    std::ofstream json(with_suffix(stem, ".json"));
    json << meta.dump(2) << '\n';
}

Spectrum read_spectrum(const std::filesystem::path& stem) {
    std::ifstream json(with_suffix(stem, ".json"));
    std::ifstream csv(with_suffix(stem, ".csv"));
    if (!json || !csv) throw Error(ErrorCode::MissingArtifact, "spectrum files missing for " + stem.string());
    Spectrum s;
    try {
        const auto meta = nlohmann::json::parse(json);
        s.generator = meta.at("generator").get<std::string>();
        s.bc = parse_boundary_condition(meta.at("bc").get<std::string>());
        s.lambda_max = meta.at("lambda_max").get<double>();
        s.lambda_min = meta.value("lambda_min", 0.0);
        s.certificate = parse_certificate(meta.at("certificate").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MissingArtifact, "malformed spectrum sidecar " + stem.string() + ": " + e.what());
    }
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(ErrorCode::MissingArtifact, "malformed spectrum row: " + line);
        s.levels.push_back({std::stod(line.substr(0, comma)), std::stoi(line.substr(comma + 1))});
    }
    return s;
}

void write_boundary_data(const EigenBoundaryData& data, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    for (std::size_t i = 0; i < data.modes.size(); ++i) {
        const auto trace = data.normalized_trace(i);
        char name[64];
        std::snprintf(name, sizeof name, "mode_%04zu.csv", i);
        std::ofstream out(directory / name);
        out << "# lambda = " << format17(data.modes[i].lambda) << '\n';
        out << "s,u_b_real\n";
        for (std::size_t k = 0; k < trace.size(); ++k) out << format17(data.s[k]) << ',' << format17(trace[k]) << '\n';
    }
}

}  // namespace weylscope::spectra

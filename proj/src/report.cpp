#include "weylscope/experiment.hpp"

#include "format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace weylscope::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using detail::format17;

namespace {

struct RunRecord {
    std::string name;   // path relative to its input root
    fs::path dir;
    ojson manifest;
};

std::string cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) row.push_back(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string domain_label(const ojson& d) {
    std::string out = d.value("kind", "domain");
    std::string args;
    for (const auto& [key, value] : d.items()) {
        if (key == "kind") continue;
        args += (args.empty() ? "" : ", ") + key + "=" + value.dump();
    }
    return args.empty() ? out : out + "(" + args + ")";
}

std::string range_text(const ojson& check) {
    auto side = [](const ojson& v) { return v.is_null() ? std::string("-inf") : cell(v.get<double>()); };
    std::string hi = check["hi"].is_null() ? "inf" : cell(check["hi"].get<double>());
    return "[" + side(check["lo"]) + ", " + hi + "]";
}

void table(std::ostream& md, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    md << '|';
    for (const auto& h : header) md << ' ' << h << " |";
    md << "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) md << "---|";
    md << '\n';
    for (const auto& row : rows) {
        md << '|';
        for (const auto& c : row) md << ' ' << c << " |";
        md << '\n';
    }
    md << '\n';
}

std::string numeric_cell(const std::string& raw) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        return used == raw.size() ? cell(v) : raw;
    } catch (const std::exception&) {
        return raw;
    }
}

void csv_section(std::ostream& md, const RunRecord& run, const char* file, const char* title) {
    const auto rows = read_csv(run.dir / file);
    if (rows.size() < 2) return;
    md << "**" << title << "**\n\n";
    std::vector<std::vector<std::string>> body;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::vector<std::string> r;
        for (const auto& c : rows[i]) r.push_back(numeric_cell(c));
        body.push_back(std::move(r));
    }
    table(md, rows[0], body);
}

} // namespace

RunOutcome report(const std::vector<fs::path>& inputs, const fs::path& directory) {
    std::vector<RunRecord> runs;
    for (const auto& root : inputs) {
        if (!fs::exists(root)) throw Error(ErrorCode::MissingArtifact, "input " + root.string() + " does not exist");
        std::vector<fs::path> found;
        if (fs::is_regular_file(root) && root.filename() == "manifest.json") found.push_back(root);
        if (fs::is_directory(root))
            for (const auto& entry : fs::recursive_directory_iterator(root))
                if (entry.is_regular_file() && entry.path().filename() == "manifest.json") found.push_back(entry.path());
        std::sort(found.begin(), found.end());
        for (const auto& path : found) {
            std::ifstream in(path);
            RunRecord r;
            try {
                r.manifest = ojson::parse(in);
            } catch (const ojson::exception& e) {
                throw Error(ErrorCode::MissingArtifact, "malformed manifest " + path.string() + ": " + e.what());
            }
            r.dir = path.parent_path();
            const auto rel = fs::relative(r.dir, fs::is_directory(root) ? root : root.parent_path());
            r.name = rel.empty() || rel == "." ? r.dir.filename().string() : rel.generic_string();
            runs.push_back(std::move(r));
        }
    }
    if (runs.empty()) throw Error(ErrorCode::MissingArtifact, "no run artifacts (manifest.json) found in the inputs");

    fs::create_directories(directory);
    RunOutcome outcome{directory, {}};
    std::map<std::string, std::vector<const RunRecord*>> by_bc;
    for (const auto& r : runs) by_bc[r.manifest.value("bc", "unspecified")].push_back(&r);

    std::ofstream md(directory / "report.md");
    std::ofstream metrics_csv(directory / "report_metrics.csv");
    std::ofstream checks_csv(directory / "report_checks.csv");
    std::ofstream dyadic_csv(directory / "report_dyadic.csv");
    metrics_csv << "run,task,bc,metric,value\n";
    checks_csv << "run,task,bc,metric,lo,hi,value,pass\n";
    dyadic_csv << "run,bc,lambda,average,scaled\n";

    int total_checks = 0, failed = 0;
    md << "# weylscope report\n\n";
    for (const auto& [bc, list] : by_bc) {
        md << "## Boundary condition: " << bc << "\n\n";
        for (const RunRecord* run : list) {
            const auto& m = run->manifest;
            const std::string task = m.value("task", "?");
            md << "### " << task << " on " << domain_label(m["domain"]) << "\n\n";
            md << "Run directory: `" << run->name << "`";
            if (m.contains("spectrum"))
                md << "; spectrum " << m["spectrum"]["generator"].get<std::string>() << " to lambda "
                   << cell(m["spectrum"]["lambda_max"].get<double>()) << " ("
                   << m["spectrum"]["certificate"].get<std::string>() << ", " << m["spectrum"]["count"].get<long long>()
                   << " eigenvalues)";
            md << "\n\n";

            std::vector<std::vector<std::string>> rows;
            for (const auto& [name, value] : m["metrics"].items()) {
                rows.push_back({name, cell(value.get<double>())});
                metrics_csv << run->name << ',' << task << ',' << bc << ',' << name << ','
                            << format17(value.get<double>()) << '\n';
            }
            if (!rows.empty()) table(md, {"metric", "value"}, rows);

            if (task == "weyl") {
                const auto dyadic = read_csv(run->dir / "dyadic.csv");
                if (dyadic.size() > 1) {
                    const double p = m["weyl"].value("predicted_exponent", 0.5);
                    std::vector<std::vector<std::string>> body;
                    for (std::size_t i = 1; i < dyadic.size(); ++i) {
                        body.push_back({numeric_cell(dyadic[i][0]), numeric_cell(dyadic[i][1]), numeric_cell(dyadic[i][2])});
                        dyadic_csv << run->name << ',' << bc << ',' << dyadic[i][0] << ',' << dyadic[i][1] << ','
                                   << dyadic[i][2] << '\n';
                    }
                    md << "**Dyadic averages**\n\n";
                    table(md, {"lambda window start", "average", "average / lambda^" + cell(p)}, body);
                    if (m["metrics"].contains("alpha"))
                        md << "Fitted exponent: " << cell(m["metrics"]["alpha"].get<double>()) << " +/- "
                           << cell(m["metrics"]["alpha_half_width"].get<double>()) << "\n\n";
                }
                if (m.contains("third_term"))
                    md << "Third-term order prediction: " << m["third_term"]["predicted_order"].get<int>()
                       << (m["third_term"]["polyhedral"].get<bool>() ? " (polyhedral domain)" : "") << "\n\n";
            }
            if (task == "rellich") csv_section(md, *run, "rellich.csv", "Rellich residuals");
            if (task == "orbits") csv_section(md, *run, "admissibility.csv", "Admissibility");
            if (task == "trace") csv_section(md, *run, "peaks.csv", "Length-spectrum peaks");

            if (!m["checks"].empty()) {
                std::vector<std::vector<std::string>> body;
                for (const auto& c : m["checks"]) {
                    const bool pass = c["pass"].get<bool>();
                    ++total_checks;
                    if (!pass) {
                        ++failed;
                        outcome.failed_checks.push_back(run->name + ":" + c["metric"].get<std::string>());
                    }
                    body.push_back({c["metric"].get<std::string>(), range_text(c), cell(c["value"].get<double>()),
                                    pass ? "pass" : "FAIL"});
                    auto bound = [](const ojson& v) { return v.is_null() ? std::string() : format17(v.get<double>()); };
                    checks_csv << run->name << ',' << task << ',' << bc << ',' << c["metric"].get<std::string>() << ','
                               << bound(c["lo"]) << ',' << bound(c["hi"]) << ',' << format17(c["value"].get<double>())
                               << ',' << (pass ? 1 : 0) << '\n';
                }
                md << "**Checks**\n\n";
                table(md, {"metric", "expected", "value", "result"}, body);
            }
        }
    }
    md << "## Summary\n\n" << runs.size() << " runs, " << total_checks << " checks, " << failed << " failed.\n";
    return outcome;
}

} // namespace weylscope::cli

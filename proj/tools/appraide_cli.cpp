// Scenario runner.
//
//   appraide run <file> [--seed N] [--trace out.log] [--dump-world out.txt]
//   appraide fixtures
//
// Exit status: 0 pass, 1 failed assertion or scanner violation, 2 parse error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "appraide/scenario.hpp"

namespace fs = std::filesystem;

namespace {

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return static_cast<bool>(out);
}

int run(const std::string& file, std::optional<std::uint64_t> seed, const std::string& trace_path,
        const std::string& dump_path) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        std::cerr << "cannot read " << file << '\n';
        return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    appraide::scenario::Scenario scenario;
    try {
        scenario = appraide::scenario::parse_scenario(buf.str());
    } catch (const appraide::scenario::ParseError& e) {
        std::cerr << file << ": " << e.what() << '\n';
        return 2;
    }
    const auto report = appraide::scenario::run_scenario(scenario, seed);
    std::cout << report.str();
    if (!trace_path.empty() && !write_file(trace_path, report.trace)) {
        std::cerr << "cannot write " << trace_path << '\n';
    }
    if (!dump_path.empty() && !write_file(dump_path, report.world_dump)) {
        std::cerr << "cannot write " << dump_path << '\n';
    }
    return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"appraide scenario runner"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run a scenario file");
    std::string file;
    std::optional<std::uint64_t> seed;
    std::string trace_path;
    std::string dump_path;
    run_cmd->add_option("file", file, "scenario file")->required();
    run_cmd->add_option("--seed", seed, "override the scenario seed");
    run_cmd->add_option("--trace", trace_path, "write the event trace here");
    run_cmd->add_option("--dump-world", dump_path, "write the final world state here");

    auto* fixtures_cmd = app.add_subcommand("fixtures", "list bundled scenarios");
    std::string dir = APPRAIDE_SCENARIO_DIR;
    fixtures_cmd->add_option("--dir", dir, "scenario directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run_cmd) {
        return run(file, seed, trace_path, dump_path);
    }
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.path().extension() == ".txt") {
            names.push_back(entry.path().string());
        }
    }
    if (ec) {
        std::cerr << "cannot list " << dir << '\n';
        return 2;
    }
    std::sort(names.begin(), names.end());
    for (const auto& n : names) {
        std::cout << n << '\n';
    }
    return 0;
}

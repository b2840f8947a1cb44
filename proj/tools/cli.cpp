#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>

#include "director/inspection.hpp"
#include "director/scenario/fuzz.hpp"
#include "director/scenario/scenario.hpp"
#include "director/scenario/simulator.hpp"

namespace director::cli {

namespace {

namespace fs = std::filesystem;
using scenario::ParseResult;

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) return std::nullopt;
    return buf.str();
}

bool use_color(std::ostream& err) {
    if (std::getenv("NO_COLOR")) return false;
    return &err == &std::cerr && isatty(STDERR_FILENO);
}

void report(std::ostream& err, const std::vector<scenario::Diagnostic>& diags) {
    const bool color = use_color(err);
    for (const auto& d : diags) {
        if (color) {
            err << "\033[1m" << d.line << ":" << d.col << ":\033[0m \033[31m" << to_string(d.kind) << "\033[0m: " << d.message
                << "\n";
        } else {
            err << d.format() << "\n";
        }
    }
}

/// Opens the output target up front so that an unwritable path fails before
/// anything has been printed.
class Output {
public:
    bool open(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            stream_ = &fallback;
            return true;
        }
        file_.open(path, std::ios::binary | std::ios::trunc);
        stream_ = &file_;
        return file_.is_open();
    }
    std::ostream& get() { return *stream_; }
    bool good() {
        stream_->flush();
        return stream_->good();
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

struct Loaded {
    int code = kOk;
    std::optional<scenario::ScenarioFile> file;
};

Loaded load(const std::string& path, std::ostream& err) {
    Loaded l;
    auto text = read_file(path);
    if (!text) {
        l.code = kIoFailure;
        return l;
    }
    auto parsed = scenario::parse_scenario(*text);
    if (!parsed.ok()) {
        report(err, parsed.diagnostics);
        l.code = kValidationFailure;
        return l;
    }
    l.file = std::move(parsed.file);
    return l;
}

std::vector<std::int64_t> parse_steps(const std::string& csv) {
    std::vector<std::int64_t> out;
    std::stringstream in(csv);
    for (std::string item; std::getline(in, item, ',');) {
        if (item.empty()) continue;
        std::size_t used = 0;
        long long v = std::stoll(item, &used);
        if (used != item.size() || v < 0) throw std::invalid_argument(item);
        out.push_back(v);
    }
    return out;
}

int finish_run(const scenario::SimulationResult& result, std::ostream& err) {
    if (!result.error.empty()) {
        err << "engine error: " << result.error << "\n";
        if (!result.step_limit_exceeded) return kValidationFailure;
    }
    if (result.step_limit_exceeded) {
        err << "step limit exceeded after " << result.ticks << " steps\n";
        return kStepLimit;
    }
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Run and inspect Director behaviour scenarios.", "director"};
    app.require_subcommand(1);

    std::string path, out_path, snapshot_csv, range, snapshot_dir;
    std::int64_t max_steps = 10000;
    std::int64_t at_step = 0;
    std::uint64_t seed = 0;

    auto* validate = app.add_subcommand("validate", "Parse and check a scenario file");
    validate->add_option("file", path, "Scenario file")->required();

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and print its trace");
    run_cmd->add_option("file", path, "Scenario file")->required();
    run_cmd->add_option("--max-steps", max_steps, "Script step limit")->check(CLI::PositiveNumber);
    run_cmd->add_option("--snapshot-at", snapshot_csv, "Comma separated steps to write DOT snapshots for");
    run_cmd->add_option("--snapshot-dir", snapshot_dir, "Directory for snapshot-<N>.dot files");
    run_cmd->add_option("--out", out_path, "Trace output file (default stdout)");

    auto* dot = app.add_subcommand("export-dot", "Print the graph at a step as DOT");
    dot->add_option("file", path, "Scenario file")->required();
    dot->add_option("--at-step", at_step, "Step to snapshot")->required()->check(CLI::NonNegativeNumber);
    dot->add_option("--max-steps", max_steps, "Script step limit")->check(CLI::PositiveNumber);
    dot->add_option("--out", out_path, "Output file (default stdout)");

    auto* trace = app.add_subcommand("trace", "Run a scenario and print a slice of the trace");
    trace->add_option("file", path, "Scenario file")->required();
    trace->add_option("--range", range, "Half-open seq range A:B")->required();
    trace->add_option("--max-steps", max_steps, "Script step limit")->check(CLI::PositiveNumber);
    trace->add_option("--out", out_path, "Output file (default stdout)");

    auto* fuzz = app.add_subcommand("fuzz", "Print a random scenario for a seed");
    fuzz->add_option("--seed", seed, "Generator seed")->required();
    fuzz->add_option("--out", out_path, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kValidationFailure;
    }

    Output output;

    if (*fuzz) {
        if (!output.open(out_path, out)) return kIoFailure;
        output.get() << scenario::serialize(scenario::generate_fuzz_scenario(seed));
        return output.good() ? kOk : kIoFailure;
    }

    auto loaded = load(path, err);
    if (loaded.code == kIoFailure) return kIoFailure;

    if (*validate) {
        if (loaded.code != kOk) return loaded.code;
        out << "OK\n";
        return kOk;
    }
    if (loaded.code != kOk) return loaded.code;

    scenario::SimulationOptions options;
    options.max_steps = max_steps;

    if (*run_cmd) {
        try {
            options.snapshot_at = parse_steps(snapshot_csv);
        } catch (const std::exception&) {
            err << "--snapshot-at expects comma separated non-negative integers\n";
            return kValidationFailure;
        }
        fs::path dir = snapshot_dir.empty() ? fs::path(".") : fs::path(snapshot_dir);
        if (!options.snapshot_at.empty()) {
            std::error_code ec;
            if (!fs::is_directory(dir, ec)) return kIoFailure;
        }
        if (!output.open(out_path, out)) return kIoFailure;
        auto result = scenario::run_scenario(*loaded.file, options);
        for (const auto& [step, snap] : result.snapshots) {
            std::ofstream f(dir / ("snapshot-" + std::to_string(step) + ".dot"), std::ios::binary | std::ios::trunc);
            f << export_dot(snap);
            if (!f) return kIoFailure;
        }
        output.get() << result.trace_text();
        if (!output.good()) return kIoFailure;
        return finish_run(result, err);
    }

    if (*dot) {
        if (!output.open(out_path, out)) return kIoFailure;
        options.snapshot_at = {at_step};
        auto result = scenario::run_scenario(*loaded.file, options);
        auto it = result.snapshots.find(at_step);
        if (it == result.snapshots.end()) {
            err << "step " << at_step << " is beyond the end of the run (" << result.ticks << " steps)\n";
            return result.step_limit_exceeded ? kStepLimit : kValidationFailure;
        }
        output.get() << export_dot(it->second);
        return output.good() ? kOk : kIoFailure;
    }

    // trace
    std::uint64_t from = 0, to = 0;
    {
        auto colon = range.find(':');
        try {
            if (colon == std::string::npos) throw std::invalid_argument(range);
            std::size_t used = 0;
            from = std::stoull(range.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument(range);
            auto rest = range.substr(colon + 1);
            to = std::stoull(rest, &used);
            if (used != rest.size()) throw std::invalid_argument(range);
        } catch (const std::exception&) {
            err << "--range expects A:B\n";
            return kValidationFailure;
        }
    }
    if (!output.open(out_path, out)) return kIoFailure;
    auto result = scenario::run_scenario(*loaded.file, options);
    std::string text;
    for (const auto& e : result.trace) {
        if (e.seq >= from && e.seq < to) text += serialize(e) + "\n";
    }
    const std::uint64_t end = result.trace.empty() ? 0 : result.trace.back().seq + 1;
    if (from > to || to > end) {
        err << "RangeOutOfBounds: " << range << " outside 0:" << end << "\n";
        return kValidationFailure;
    }
    output.get() << text;
    if (!output.good()) return kIoFailure;
    return finish_run(result, err);
}

}  // namespace director::cli

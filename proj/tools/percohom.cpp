// percohom: command-line entry point.
//
//   percohom <command> [--config PATH | --preset NAME] [--seed U64] [--out DIR]
//                      [--threads N] [--set key=value]...
//   percohom validate [<command>] [--config PATH | --preset NAME] [--set key=value]...
//   percohom presets
//
// Exit codes: 0 success, 2 validation error, 3 solver failure, 1 other.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using percohom::cli::json;
namespace cli = percohom::cli;

struct Options {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out = "runs";
    std::vector<std::string> sets;
    std::string command; // validate only
};

json load_document(const Options& o, const std::string& command) {
    json doc = json::object();
    if (!o.preset.empty()) {
        const auto& p = cli::presets();
        const auto it = p.find(o.preset);
        if (it == p.end()) throw cli::ConfigError("preset", "unknown preset '" + o.preset + "'");
        doc = it->second;
    }
    if (!o.config.empty()) {
        std::ifstream is(o.config);
        if (!is) throw cli::ConfigError("config", "cannot open " + o.config);
        json file;
        try {
            file = json::parse(is);
        } catch (const json::parse_error& e) {
            throw cli::ConfigError("config", std::string("JSON parse error: ") + e.what());
        }
        if (!file.is_object()) throw cli::ConfigError("config", "top level must be an object");
        doc.merge_patch(file);
    }
    for (const auto& s : o.sets) cli::apply_override(doc, s);
    if (o.seed) doc["seed"] = *o.seed;
    if (o.threads) doc["threads"] = *o.threads;
    if (!command.empty() && !doc.contains("command")) doc["command"] = command;
    return doc;
}

void add_common(CLI::App* app, Options& o, bool run) {
    app->add_option("--config", o.config, "JSON config file");
    app->add_option("--preset", o.preset, "built-in preset (see `percohom presets`)");
    app->add_option("--set", o.sets, "override key=value (dotted keys, JSON values)");
    if (run) {
        app->add_option("--seed", o.seed, "master seed");
        app->add_option("--out", o.out, "output root directory")->capture_default_str();
        app->add_option("--threads", o.threads, "worker threads (job level)");
    }
}

int run(const Options& o, const std::string& command) {
    try {
        const auto doc = load_document(o, command);
        const auto cfg = cli::parse_config(doc, command);
        const auto diag = cli::semantic_diagnostics(cfg);
        if (!diag.empty()) {
            for (const auto& d : diag) std::cerr << "error: " << d << '\n';
            return cli::Exit::validation;
        }
        const auto art = cli::run_command(cfg, o.out);
        std::cout << art.dir.string() << '\n';
        return art.exit_code;
    } catch (const cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::Exit::validation;
    } catch (const percohom::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return cli::Exit::solver;
    } catch (const percohom::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::Exit::validation;
    } catch (const percohom::UnsupportedDimension& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::Exit::validation;
    } catch (const percohom::DegenerateInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::Exit::validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::Exit::failure;
    }
}

int validate(const Options& o) {
    try {
        const auto doc = load_document(o, o.command);
        const auto diag = cli::validate_config(doc, o.command);
        for (const auto& d : diag) std::cout << d << '\n';
        return diag.empty() ? cli::Exit::ok : cli::Exit::validation;
    } catch (const cli::ConfigError& e) {
        std::cout << e.what() << '\n';
        return cli::Exit::validation;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic homogenization experiments on perforated domains"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cli::tool_version));

    Options opt;
    std::string chosen;
    for (const auto& name : cli::command_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_common(sub, opt, true);
        sub->callback([&chosen, name] { chosen = name; });
    }
    auto* val = app.add_subcommand("validate", "report every config violation at once");
    add_common(val, opt, false);
    val->add_option("command", opt.command, "command the config is for (default: its \"command\" key)");
    val->callback([&chosen] { chosen = "validate"; });
    auto* list = app.add_subcommand("presets", "list built-in presets");
    list->callback([&chosen] { chosen = "presets"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::Exit::validation;
    }
    if (chosen == "presets") {
        for (const auto& [name, doc] : cli::presets())
            std::cout << name << "  (" << doc.value("command", std::string()) << ")\n";
        return 0;
    }
    if (chosen == "validate") return validate(opt);
    return run(opt, chosen);
}

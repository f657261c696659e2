#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <memory>

#include "commands.hpp"
#include "topox/complex_io.hpp"
#include "topox/errors.hpp"

namespace {

std::string flag_name(std::string key) {
    for (char& ch : key)
        if (ch == '_') ch = '-';
    return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
    using topox::cli::CommandSpec;
    CLI::App app{"Topological deep learning toolkit", "topox"};
    app.set_version_flag("--version", std::string(TOPOX_VERSION));
    app.require_subcommand(1);

    struct Bound {
        const CommandSpec* spec;
        CLI::App* sub;
        std::string config, out;
        std::map<std::string, std::string> values;
        std::map<std::string, CLI::Option*> opts;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    for (const auto& cmd : topox::cli::commands()) {
        auto b = std::make_unique<Bound>();
        b->spec = &cmd;
        b->sub = app.add_subcommand(cmd.name, cmd.help);
        b->sub->add_option("--config", b->config, "JSON config file (flags override it)");
        b->sub->add_option("--out", b->out, "output directory")->default_val("topox_out");
        bool has_seed = false;
        for (const auto& f : cmd.flags) {
            has_seed |= f.name == "seed";
            const std::string def = f.def.is_string() ? f.def.get<std::string>() : f.def.dump();
            b->opts[f.name] = b->sub->add_option(flag_name(f.name), b->values[f.name], f.help + " [" + def + "]");
        }
        if (!has_seed) b->opts["seed"] = b->sub->add_option("--seed", b->values["seed"], "seed [1]");
        bound.push_back(std::move(b));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    for (const auto& b : bound) {
        if (!b->sub->parsed()) continue;
        try {
            nlohmann::json file_cfg;
            if (!b->config.empty()) {
                try {
                    file_cfg = nlohmann::json::parse(topox::read_file(b->config));
                } catch (const nlohmann::json::exception& e) {
                    throw topox::ConfigError("config '" + b->config + "': " + e.what());
                }
            }
            std::vector<std::pair<std::string, std::string>> overrides;
            for (const auto& [name, opt] : b->opts)
                if (opt->count() > 0) overrides.emplace_back(name, b->values[name]);
            const auto params = topox::cli::merge_params(*b->spec, file_cfg, overrides);
            b->spec->run(params, b->out);
            return 0;
        } catch (const topox::ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n\n" << b->sub->help();
            return 2;
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n\n" << b->sub->help();
            return 2;
        } catch (const topox::NumericError& e) {
            std::cerr << "numeric failure: " << e.what() << "\n";
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}

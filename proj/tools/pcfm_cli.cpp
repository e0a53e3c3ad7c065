// pcfm command line: spp | fit | nli | oracle | compare | sweep-np
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include "pcfm/cli_io.hpp"
#include "pcfm/errors.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, nlohmann::json extra = {}) {
    nlohmann::json j = {{"status", "error"}, {"kind", kind}, {"message", message}};
    if (extra.is_object())
        for (auto& [k, v] : extra.items()) j[k] = v;
    std::cerr << j.dump() << '\n';
    return kind == "config" || kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polynomial closed-form NLI / GSNR_NLI estimator with a GN-model oracle"};
    app.require_subcommand(1);

    std::string config_arg, out_arg, mode_arg;
    std::optional<std::size_t> np_arg;
    std::optional<double> tol_arg;
    bool print_config = false;

    struct VerbDef {
        const char* name;
        pcfm::io::Verb verb;
        const char* help;
    };
    const VerbDef verbs[] = {
        {"spp", pcfm::io::Verb::spp, "solve the spatial power profiles"},
        {"fit", pcfm::io::Verb::fit, "solve and fit polynomial profiles"},
        {"nli", pcfm::io::Verb::nli, "PCFM NLI and GSNR_NLI report"},
        {"oracle", pcfm::io::Verb::oracle, "numerically integrated GN reference report"},
        {"compare", pcfm::io::Verb::compare, "PCFM vs oracle, delta GSNR_NLI"},
        {"sweep-np", pcfm::io::Verb::sweep_np, "one report per fit degree"},
    };
    for (const auto& v : verbs) {
        auto* sub = app.add_subcommand(v.name, v.help);
        sub->add_option("--config", config_arg, "scenario file or bundled scenario name")->required();
        sub->add_option("--out", out_arg, "output directory (default: the config's output_dir)");
        sub->add_option("--np", np_arg, "polynomial degree N_p");
        sub->add_option("--mode", mode_arg, "oracle domains: lozenge | rectangle | stretched")
            ->check(CLI::IsMember({"lozenge", "rectangle", "stretched"}));
        sub->add_option("--tol", tol_arg, "oracle relative tolerance");
        sub->add_flag("--print-config", print_config, "print the normalized scenario to stdout");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    pcfm::io::Verb verb = pcfm::io::Verb::nli;
    for (const auto& v : verbs)
        if (app.got_subcommand(v.name)) verb = v.verb;

    try {
        auto cfg = pcfm::io::load_named_scenario(config_arg);
        if (np_arg) {
            cfg.fit_degree = *np_arg;
            if (verb == pcfm::io::Verb::sweep_np) cfg.sweep_degrees = {*np_arg};
        }
        if (tol_arg) {
            if (!(*tol_arg > 0.0)) return fail("usage", "--tol must be positive");
            cfg.oracle.rel_tol = *tol_arg;
        }
        if (mode_arg == "lozenge") {
            cfg.oracle.lozenge_domains = true;
            cfg.oracle.stretch_xci = false;
        } else if (mode_arg == "rectangle") {
            cfg.oracle.lozenge_domains = false;
            cfg.oracle.stretch_xci = false;
        } else if (mode_arg == "stretched") {
            cfg.oracle.lozenge_domains = false;
            cfg.oracle.stretch_xci = true;
        }
        if (print_config) std::cout << pcfm::io::normalized_json(cfg).dump(2) << '\n';
        const std::string out = out_arg.empty() ? cfg.output_dir : out_arg;
        const auto summary = pcfm::io::run(cfg, verb, out);
        for (const auto& w : summary.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& p : summary.written) std::cout << p.string() << '\n';
        return 0;
    } catch (const pcfm::ConfigError& e) {
        return fail(e.kind(), e.what(), {{"path", e.path()}});
    } catch (const pcfm::BudgetExceeded& e) {
        return fail(e.kind(), e.what(), {{"completed_islands", e.completed().size()}, {"partial", true}});
    } catch (const pcfm::EvaluationError& e) {
        return fail(e.kind(), e.what(), {{"estimate", e.estimate()}, {"error_bound", e.error_bound()}});
    } catch (const pcfm::SolverError& e) {
        return fail(e.kind(), e.what(), {{"residual", e.residual()}});
    } catch (const pcfm::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
}

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcfm/gn_oracle.hpp"
#include "pcfm/link_engine.hpp"

namespace pcfm::io {

enum class EngineMode { pcfm, oracle, compare };

struct OracleConfig {
    bool include_mci = true;
    bool lozenge_domains = true;
    bool stretch_xci = false;
    /// Feed the oracle the fitted polynomials instead of the sampled SPP.
    bool use_polynomials = false;
    double rel_tol = 1e-4;
    std::size_t max_evaluations = 2'000'000'000;
};

struct ScenarioConfig {
    std::string name;
    std::vector<LinkSpan> spans;
    std::size_t fit_degree = 9;
    std::size_t grid_points = 1001;
    FitOptions fit;
    EngineMode mode = EngineMode::pcfm;
    OracleConfig oracle;
    std::vector<double> correction;  // per-channel NLI multipliers, empty = 1
    std::vector<std::size_t> sweep_degrees{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::string output_dir = "out";
};

/// Parse and normalize a scenario document. Every key carries its unit;
/// unknown keys, missing fields and ambiguous unit pairs throw ConfigError
/// with a JSON-pointer path.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);
/// Resolve a bundled scenario name ("desk_7ch") or a file path.
ScenarioConfig load_named_scenario(const std::string& name_or_path);

/// Fully explicit form (mW, THz, inline fibers and plans). Parsing it back
/// gives the same configuration.
nlohmann::json normalized_json(const ScenarioConfig& config);

enum class Verb { spp, fit, nli, oracle, compare, sweep_np };

struct RunSummary {
    std::vector<std::filesystem::path> written;
    std::vector<std::string> warnings;
};

/// Run one verb and write its CSV artifacts below `out_dir`.
RunSummary run(const ScenarioConfig& config, Verb verb, const std::filesystem::path& out_dir);
/// Run the config's own engine mode (nli, oracle or compare).
RunSummary run(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Oracle counterpart of evaluate_link: per-span GN reference with the same
/// incoherent accumulation and end-of-link channel powers.
NliReport oracle_link_report(const ScenarioConfig& config, const LinkResult& pcfm);

}  // namespace pcfm::io

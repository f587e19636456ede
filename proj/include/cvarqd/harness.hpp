#pragma once

#include "cvarqd/augmented_q.hpp"
#include "cvarqd/bellman_oracle.hpp"
#include "cvarqd/comm_graph.hpp"
#include "cvarqd/markov_game.hpp"
#include "cvarqd/qd_learner.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvarqd {

enum class RunMode { kLearner, kOracle, kBoth };

struct ExperimentConfig {
    std::string preset = "custom";
    RunMode mode = RunMode::kBoth;

    /// JSON game file; when empty the game is drawn from `random_game`.
    std::string game_file;
    RandomGameSpec random_game;

    /// "ring(N, k)" or an explicit edge list "0-1, 1-2, ...".
    std::string topology = "ring(8, 2)";
    /// Only consulted for explicit edge lists.
    std::size_t n_agents = 0;

    LearnerConfig learner;

    double oracle_tol = 1e-10;
    std::size_t oracle_max_iters = 10000;
    NextActionChoice oracle_next_action = NextActionChoice::kPerSuccessor;

    std::string out_dir = "out";
    bool svg = true;
};

/// fig1 | fig2 | paper-fig | oracle-check
ExperimentConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

/// Flat INI document with [experiment], [game], [topology], [learner] and
/// [oracle] sections. Missing keys keep the values of the named preset (or
/// the built-in defaults).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& is);
void write_config(std::ostream& os, const ExperimentConfig& cfg);

/// Raised when --strict is set and the weight schedule fails validation.
class StrictModeViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CellDifference {
    std::size_t s = 0;
    std::size_t a = 0;
    double y = 0.0;
    double difference = 0.0;  // |Qbar - Q*|
};

struct OracleComparison {
    std::vector<CellDifference> cells;
    double sup_distance = 0.0;
    double mean_distance = 0.0;
};

/// Diagnostic only: the learner's consensus value is not claimed to equal Q*.
OracleComparison compare_to_oracle(const AugmentedQ& learner_mean, const AugmentedQ& oracle);
OracleComparison compare_to_oracle(const RunHistory& history, const AugmentedQ& oracle);

struct ArtifactManifest {
    /// Paths of emitted files that exist and are non-empty.
    std::vector<std::string> files;
    nlohmann::json summary;
};

MarkovGame build_game(const ExperimentConfig& cfg, std::size_t n_agents);
GraphTopology build_topology(const ExperimentConfig& cfg);

/// Runs the learner and/or oracle and writes consensus.csv, q_profile.csv,
/// q_snapshots.csv (when snapshots are requested), oracle_q.csv, game.json,
/// config.ini, summary.json and optional SVG charts into cfg.out_dir.
ArtifactManifest run_experiment(const ExperimentConfig& cfg);

// CSV writers (fixed column order, header row).
void write_consensus_csv(std::ostream& os, const RunHistory& history);
void write_q_profile_csv(std::ostream& os, const std::vector<AgentState>& agents);
void write_snapshots_csv(std::ostream& os, const RunHistory& history);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal deterministic SVG line chart.
std::string render_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<Series>& series);

/// Monotonicity tolerance used in the summary's `monotone_in_y` flags.
inline constexpr double kLearnerMonotoneTolerance = 1e-6;
inline constexpr double kOracleMonotoneTolerance = 1e-9;

}  // namespace cvarqd

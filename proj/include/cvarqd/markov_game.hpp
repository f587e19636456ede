#pragma once

#include "cvarqd/random.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace cvarqd {

inline constexpr double kProbabilityTolerance = 1e-12;

/// Finite Markov game with global state/action, per-agent deterministic costs
/// and a known transition kernel. Immutable after construction.
class MarkovGame {
public:
    /// transitions[s][a][s'], costs[n][s][a]. If c_max is not given, the
    /// largest absolute cost is used.
    MarkovGame(std::vector<std::vector<std::vector<double>>> transitions,
               std::vector<std::vector<std::vector<double>>> costs,
               double gamma,
               std::optional<double> c_max = std::nullopt);

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    std::size_t n_agents() const { return n_agents_; }
    double gamma() const { return gamma_; }
    double c_max() const { return c_max_; }

    std::span<const double> transition_row(std::size_t s, std::size_t a) const { return transitions_[s][a]; }
    double transition(std::size_t s, std::size_t a, std::size_t s_next) const { return transitions_[s][a][s_next]; }
    double cost(std::size_t agent, std::size_t s, std::size_t a) const { return costs_[agent][s][a]; }

    const std::vector<std::vector<std::vector<double>>>& transitions() const { return transitions_; }
    const std::vector<std::vector<std::vector<double>>>& costs() const { return costs_; }

    /// (1/N) * sum_n c[n][s][a]
    double average_cost(std::size_t s, std::size_t a) const;

    /// Inverse-CDF draw from P[s][a][.].
    std::size_t sample_transition(std::size_t s, std::size_t a, Rng& rng) const;

    /// Copy of the same game with every agent's cost table replaced by the
    /// agent-average table.
    MarkovGame with_shared_costs() const;

private:
    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    std::size_t n_agents_ = 0;
    std::vector<std::vector<std::vector<double>>> transitions_;
    std::vector<std::vector<std::vector<double>>> costs_;
    double gamma_ = 0.0;
    double c_max_ = 0.0;
};

struct RandomGameSpec {
    std::size_t n_states = 2;
    std::size_t n_actions = 2;
    std::size_t n_agents = 8;
    double gamma = 0.7;
    /// Per-(s,a) mean drawn uniformly from [cost_mean_lo, cost_mean_hi].
    double cost_mean_lo = -1.0;
    double cost_mean_hi = 1.0;
    /// Per-agent cost drawn uniformly from mean +- cost_halfwidth.
    double cost_halfwidth = 0.5;
    /// Clamp bound; defaults to max(|lo|, |hi|) + halfwidth.
    std::optional<double> c_max;
    std::uint64_t seed = 1;
};

/// With two successor states each row is (p, 1 - p), p ~ U(0,1). Larger
/// state spaces draw U(0,1) weights and normalize. Costs are sampled once and
/// frozen.
MarkovGame random_game(const RandomGameSpec& spec);

/// sum_t gamma^t * costs[t]
double discounted_return(std::span<const double> costs, double gamma);

struct TrajectoryStep {
    std::size_t k = 0;
    std::size_t s = 0;
    std::size_t a = 0;
    std::vector<double> local_costs;
    std::size_t s_next = 0;
};

struct TrajectoryOptions {
    std::set<std::size_t> terminal_states;
    /// 0 means the trajectory never restarts on its own.
    std::size_t episode_cap = 0;
    /// Half-width of uniform noise added to observed costs; 0 keeps them
    /// deterministic.
    double cost_noise = 0.0;
};

/// Single trajectory under the uniform-random behaviour policy. Restarts from
/// a uniformly drawn state when a terminal state is reached or the episode cap
/// is hit.
class TrajectorySampler {
public:
    TrajectorySampler(const MarkovGame& game, Rng& rng, TrajectoryOptions options = {});

    TrajectoryStep next();
    std::size_t state() const { return state_; }

private:
    const MarkovGame& game_;
    Rng& rng_;
    TrajectoryOptions options_;
    std::size_t state_ = 0;
    std::size_t k_ = 0;
    std::size_t episode_len_ = 0;
};

nlohmann::json to_json(const MarkovGame& game);
MarkovGame game_from_json(const nlohmann::json& j);

}  // namespace cvarqd

#include "cvarqd/markov_game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cvarqd {

MarkovGame::MarkovGame(std::vector<std::vector<std::vector<double>>> transitions,
                       std::vector<std::vector<std::vector<double>>> costs,
                       double gamma,
                       std::optional<double> c_max)
    : transitions_(std::move(transitions)), costs_(std::move(costs)), gamma_(gamma) {
    n_states_ = transitions_.size();
    if (n_states_ == 0) throw std::invalid_argument("game needs at least one state");
    n_actions_ = transitions_[0].size();
    if (n_actions_ == 0) throw std::invalid_argument("game needs at least one action");
    n_agents_ = costs_.size();
    if (n_agents_ == 0) throw std::invalid_argument("game needs at least one agent cost table");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");

    for (std::size_t s = 0; s < n_states_; ++s) {
        if (transitions_[s].size() != n_actions_) throw std::invalid_argument("ragged transition table");
        for (std::size_t a = 0; a < n_actions_; ++a) {
            const auto& row = transitions_[s][a];
            if (row.size() != n_states_) throw std::invalid_argument("transition row has wrong length");
            double sum = 0.0;
            for (double p : row) {
                if (!(p >= 0.0)) throw std::invalid_argument("negative transition probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kProbabilityTolerance) {
                throw std::invalid_argument("transition row (" + std::to_string(s) + "," + std::to_string(a) +
                                            ") does not sum to 1");
            }
        }
    }

    double largest = 0.0;
    for (const auto& table : costs_) {
        if (table.size() != n_states_) throw std::invalid_argument("cost table has wrong number of states");
        for (const auto& row : table) {
            if (row.size() != n_actions_) throw std::invalid_argument("cost table has wrong number of actions");
            for (double c : row) {
                if (!std::isfinite(c)) throw std::invalid_argument("non-finite cost");
                largest = std::max(largest, std::abs(c));
            }
        }
    }
    c_max_ = c_max.value_or(largest);
    if (largest > c_max_) throw std::invalid_argument("cost exceeds c_max");
    if (c_max_ <= 0.0) c_max_ = 1.0;
}

double MarkovGame::average_cost(std::size_t s, std::size_t a) const {
    double sum = 0.0;
    for (const auto& table : costs_) sum += table[s][a];
    return sum / static_cast<double>(n_agents_);
}

std::size_t MarkovGame::sample_transition(std::size_t s, std::size_t a, Rng& rng) const {
    const auto& row = transitions_[s][a];
    const double u = rng.uniform01();
    double cumulative = 0.0;
    std::size_t last_support = 0;
    for (std::size_t s_next = 0; s_next < row.size(); ++s_next) {
        if (row[s_next] <= 0.0) continue;
        last_support = s_next;
        cumulative += row[s_next];
        if (u < cumulative) return s_next;
    }
    // u landed in the rounding gap above the accumulated mass.
    return last_support;
}

MarkovGame MarkovGame::with_shared_costs() const {
    std::vector<std::vector<double>> avg(n_states_, std::vector<double>(n_actions_));
    for (std::size_t s = 0; s < n_states_; ++s) {
        for (std::size_t a = 0; a < n_actions_; ++a) avg[s][a] = average_cost(s, a);
    }
    return MarkovGame(transitions_, std::vector(n_agents_, avg), gamma_, c_max_);
}

MarkovGame random_game(const RandomGameSpec& spec) {
    if (spec.n_states == 0 || spec.n_actions == 0 || spec.n_agents == 0) {
        throw std::invalid_argument("random game sizes must be >= 1");
    }
    if (spec.cost_mean_hi < spec.cost_mean_lo || spec.cost_halfwidth < 0.0) {
        throw std::invalid_argument("invalid cost ranges");
    }
    const double c_max = spec.c_max.value_or(
        std::max(std::abs(spec.cost_mean_lo), std::abs(spec.cost_mean_hi)) + spec.cost_halfwidth);

    Rng rng(spec.seed);
    const std::size_t S = spec.n_states;
    const std::size_t A = spec.n_actions;

    std::vector P(S, std::vector(A, std::vector<double>(S, 0.0)));
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            auto& row = P[s][a];
            if (S == 1) {
                row[0] = 1.0;
            } else if (S == 2) {
                row[0] = rng.uniform01();
                row[1] = 1.0 - row[0];
            } else {
                double total = 0.0;
                for (auto& p : row) {
                    p = rng.uniform01();
                    total += p;
                }
                if (total <= 0.0) {
                    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(S));
                } else {
                    for (auto& p : row) p /= total;
                    // Push the rounding residue onto the largest entry.
                    const double residue = 1.0 - std::accumulate(row.begin(), row.end(), 0.0);
                    *std::max_element(row.begin(), row.end()) += residue;
                }
            }
        }
    }

    std::vector means(S, std::vector<double>(A));
    for (auto& row : means) {
        for (auto& m : row) m = rng.uniform(spec.cost_mean_lo, spec.cost_mean_hi);
    }
    std::vector costs(spec.n_agents, std::vector(S, std::vector<double>(A)));
    for (auto& table : costs) {
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                const double c = rng.uniform(means[s][a] - spec.cost_halfwidth, means[s][a] + spec.cost_halfwidth);
                table[s][a] = std::clamp(c, -c_max, c_max);
            }
        }
    }
    return MarkovGame(std::move(P), std::move(costs), spec.gamma, c_max);
}

double discounted_return(std::span<const double> costs, double gamma) {
    double total = 0.0;
    double weight = 1.0;
    for (double c : costs) {
        total += weight * c;
        weight *= gamma;
    }
    return total;
}

TrajectorySampler::TrajectorySampler(const MarkovGame& game, Rng& rng, TrajectoryOptions options)
    : game_(game), rng_(rng), options_(std::move(options)) {
    state_ = rng_.index(game_.n_states());
}

TrajectoryStep TrajectorySampler::next() {
    const bool restart = options_.terminal_states.count(state_) > 0 ||
                         (options_.episode_cap > 0 && episode_len_ >= options_.episode_cap);
    if (restart) {
        state_ = rng_.index(game_.n_states());
        episode_len_ = 0;
    }

    TrajectoryStep step;
    step.k = k_++;
    step.s = state_;
    step.a = rng_.index(game_.n_actions());
    step.local_costs.resize(game_.n_agents());
    for (std::size_t n = 0; n < game_.n_agents(); ++n) {
        step.local_costs[n] = game_.cost(n, step.s, step.a);
        if (options_.cost_noise > 0.0) step.local_costs[n] += rng_.uniform(-options_.cost_noise, options_.cost_noise);
    }
    step.s_next = game_.sample_transition(step.s, step.a, rng_);
    state_ = step.s_next;
    ++episode_len_;
    return step;
}

nlohmann::json to_json(const MarkovGame& game) {
    return {
        {"n_states", game.n_states()},
        {"n_actions", game.n_actions()},
        {"n_agents", game.n_agents()},
        {"gamma", game.gamma()},
        {"c_max", game.c_max()},
        {"transitions", game.transitions()},
        {"costs", game.costs()},
    };
}

MarkovGame game_from_json(const nlohmann::json& j) {
    auto transitions = j.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
    auto costs = j.at("costs").get<std::vector<std::vector<std::vector<double>>>>();
    std::optional<double> c_max;
    if (j.contains("c_max")) c_max = j.at("c_max").get<double>();
    MarkovGame game(std::move(transitions), std::move(costs), j.at("gamma").get<double>(), c_max);
    if (j.contains("n_states") && j.at("n_states").get<std::size_t>() != game.n_states()) {
        throw std::invalid_argument("n_states disagrees with transition table");
    }
    if (j.contains("n_actions") && j.at("n_actions").get<std::size_t>() != game.n_actions()) {
        throw std::invalid_argument("n_actions disagrees with transition table");
    }
    if (j.contains("n_agents") && j.at("n_agents").get<std::size_t>() != game.n_agents()) {
        throw std::invalid_argument("n_agents disagrees with cost tables");
    }
    return game;
}

}  // namespace cvarqd

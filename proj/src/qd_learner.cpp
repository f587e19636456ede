#include "cvarqd/qd_learner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace cvarqd {

TransitionEstimator::TransitionEstimator(std::size_t n_states, std::size_t n_actions)
    : n_states_(n_states), n_actions_(n_actions), visits_(n_states * n_actions, 0),
      counts_(n_states * n_actions * n_states, 0), xi_bar_(n_states * n_actions * n_states, 1.0) {}

void TransitionEstimator::observe(std::size_t s, std::size_t a, std::size_t s_next) {
    if (s >= n_states_ || a >= n_actions_ || s_next >= n_states_) {
        throw std::out_of_range("transition index out of range");
    }
    const std::size_t row = s * n_actions_ + a;
    ++visits_[row];
    ++counts_[row * n_states_ + s_next];
    const double v = static_cast<double>(visits_[row]);
    for (std::size_t sn = 0; sn < n_states_; ++sn) {
        const std::size_t t = counts_[row * n_states_ + sn];
        if (t > 0) xi_bar_[row * n_states_ + sn] = v / static_cast<double>(t);
    }
}

double TransitionEstimator::p_hat(std::size_t s, std::size_t a, std::size_t s_next) const {
    const std::size_t v = visits(s, a);
    return v == 0 ? 0.0 : static_cast<double>(count(s, a, s_next)) / static_cast<double>(v);
}

std::size_t admissible_cutoff(const TransitionEstimator& est, std::size_t s, std::size_t a, std::size_t s_next,
                              std::size_t j, const YGrid& grid) {
    const double cap = est.xi_bar(s, a, s_next);
    const double y = grid[j];
    // i <= j gives xi <= 1 <= cap exactly; the tolerance only matters for
    // ratios that should equal cap but round above it.
    std::size_t last = j;
    while (last + 1 < grid.size() && grid[last + 1] / y <= cap * (1.0 + 1e-12)) ++last;
    return last;
}

std::vector<AdmissibleXi> admissible_xis(const TransitionEstimator& est, std::size_t s, std::size_t a,
                                         std::size_t s_next, std::size_t j, const YGrid& grid) {
    const std::size_t last = admissible_cutoff(est, s, a, s_next, j, grid);
    std::vector<AdmissibleXi> out;
    for (std::size_t i = 0; i <= last; ++i) out.push_back({i, i == j ? 1.0 : grid[i] / grid[j]});
    return out;
}

double innovation(const AugmentedQ& q, double cost, std::size_t s, std::size_t a, std::size_t s_next,
                  std::size_t j, const TransitionEstimator& est, double gamma, XiRule rule) {
    double best_action = std::numeric_limits<double>::infinity();
    if (rule == XiRule::kFixedOne) {
        for (std::size_t an = 0; an < q.n_actions(); ++an) best_action = std::min(best_action, q(s_next, an, j));
        return cost + gamma * best_action;
    }
    const YGrid& grid = q.grid();
    const std::size_t last = admissible_cutoff(est, s, a, s_next, j, grid);
    for (std::size_t an = 0; an < q.n_actions(); ++an) {
        // xi * Q(s', a', y_j xi) with xi = y_i / y_j is g_i / y_j, g_i = y_i Q_i.
        double best_g = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i <= last; ++i) best_g = std::max(best_g, grid[i] * q(s_next, an, i));
        best_action = std::min(best_action, best_g / grid[j]);
    }
    return cost + gamma * best_action;
}

void qd_step(std::vector<AgentState>& agents, const GraphTopology& g, const TrajectoryStep& step,
             const LearnerConfig& cfg, const TransitionEstimator& est, double gamma) {
    if (agents.size() != g.n_agents()) throw std::invalid_argument("agent count does not match the graph");
    if (step.local_costs.size() != agents.size()) throw std::invalid_argument("one local cost per agent required");

    const double alpha = cfg.schedule.alpha(step.k);
    const double beta = cfg.schedule.beta(step.k);
    const std::size_t m = cfg.grid.size();
    const std::size_t N = agents.size();

    const YGrid& grid = cfg.grid;
    const std::size_t A = agents.empty() ? 0 : agents[0].q.n_actions();
    std::vector<std::size_t> cutoff(m);
    for (std::size_t j = 0; j < m; ++j) cutoff[j] = admissible_cutoff(est, step.s, step.a, step.s_next, j, grid);

    // Same arithmetic as innovation(), with the max over the admissible prefix
    // shared across levels.
    std::vector<double> prefix_max(m);
    std::vector<double> best(m);
    std::vector<std::vector<double>> updated(N, std::vector<double>(m));
    for (std::size_t n = 0; n < N; ++n) {
        const auto& qn = agents[n].q;
        if (cfg.xi_rule == XiRule::kFixedOne) {
            for (std::size_t j = 0; j < m; ++j) {
                best[j] = std::numeric_limits<double>::infinity();
                for (std::size_t an = 0; an < A; ++an) best[j] = std::min(best[j], qn(step.s_next, an, j));
            }
        } else {
            std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
            for (std::size_t an = 0; an < A; ++an) {
                double running = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < m; ++i) {
                    running = std::max(running, grid[i] * qn(step.s_next, an, i));
                    prefix_max[i] = running;
                }
                for (std::size_t j = 0; j < m; ++j) best[j] = std::min(best[j], prefix_max[cutoff[j]] / grid[j]);
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            const double current = qn(step.s, step.a, j);
            double disagreement = 0.0;
            for (std::size_t l : g.neighbors(n)) disagreement += current - agents[l].q(step.s, step.a, j);
            const double target = step.local_costs[n] + gamma * best[j];
            updated[n][j] = (1.0 - alpha) * current + alpha * target - beta * disagreement;
        }
    }
    for (std::size_t n = 0; n < N; ++n) {
        auto slice = agents[n].q.slice(step.s, step.a);
        std::copy(updated[n].begin(), updated[n].end(), slice.begin());
        if (cfg.concavity_projection) project_concave(cfg.grid, slice);
    }
}

AugmentedQ mean_table(const std::vector<AgentState>& agents) {
    if (agents.empty()) throw std::invalid_argument("no agents");
    AugmentedQ mean(agents[0].q.n_states(), agents[0].q.n_actions(), agents[0].q.grid());
    auto out = mean.values();
    for (const auto& agent : agents) {
        const auto v = agent.q.values();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    }
    for (double& x : out) x /= static_cast<double>(agents.size());
    return mean;
}

double consensus_spread(const std::vector<AgentState>& agents) {
    if (agents.size() < 2) return 0.0;
    const AugmentedQ mean = mean_table(agents);
    double spread = 0.0;
    for (const auto& agent : agents) spread = std::max(spread, sup_distance(agent.q, mean));
    return spread;
}

std::vector<AgentState> initial_agents(const MarkovGame& game, const LearnerConfig& cfg) {
    const std::size_t N = game.n_agents();
    std::vector<AgentState> agents;
    agents.reserve(N);
    for (std::size_t n = 0; n < N; ++n) {
        const double q0 = cfg.q0_lo + (cfg.q0_hi - cfg.q0_lo) * static_cast<double>(n) / static_cast<double>(N);
        agents.push_back({n, AugmentedQ(game.n_states(), game.n_actions(), cfg.grid, q0)});
    }
    return agents;
}

namespace {

double agents_max_concavity_defect(const std::vector<AgentState>& agents) {
    double d = 0.0;
    for (const auto& agent : agents) d = std::max(d, max_concavity_defect(agent.q));
    return d;
}

bool due(std::size_t k, std::size_t every, std::size_t total) {
    return k == total || (every > 0 && k % every == 0);
}

}  // namespace

RunHistory run(const MarkovGame& game, const GraphTopology& g, const LearnerConfig& cfg) {
    if (game.n_agents() != g.n_agents()) throw std::invalid_argument("game and graph disagree on agent count");

    RunHistory history;
    history.schedule_report = validate_schedule(g, cfg.schedule);
    if (!history.schedule_report.all_passed()) {
        if (cfg.strict) enforce_schedule(history.schedule_report);
        for (const auto& c : history.schedule_report.checks) {
            if (!c.passed) std::cerr << "warning: schedule check " << c.name << " failed: " << c.detail << '\n';
        }
    }

    Rng rng(cfg.seed);
    std::vector<AgentState> agents = initial_agents(game, cfg);
    TransitionEstimator est(game.n_states(), game.n_actions());
    TrajectorySampler sampler(game, rng, cfg.trajectory);

    for (const auto& agent : agents) history.max_abs_q = std::max(history.max_abs_q, agent.q.max_abs());
    history.checkpoints.push_back({0, consensus_spread(agents), agents_max_concavity_defect(agents)});
    history.snapshots.push_back({0, agents});

    for (std::size_t k = 0; k < cfg.total_steps; ++k) {
        const TrajectoryStep step = sampler.next();
        est.observe(step.s, step.a, step.s_next);
        qd_step(agents, g, step, cfg, est, game.gamma());

        for (const auto& agent : agents) {
            for (double v : agent.q.slice(step.s, step.a)) {
                if (!std::isfinite(v)) throw std::runtime_error("Q table diverged at step " + std::to_string(k));
                history.max_abs_q = std::max(history.max_abs_q, std::abs(v));
            }
        }

        const std::size_t done = k + 1;
        if (due(done, cfg.checkpoint_every, cfg.total_steps)) {
            history.checkpoints.push_back({done, consensus_spread(agents), agents_max_concavity_defect(agents)});
        }
        if (cfg.snapshot_every > 0 ? due(done, cfg.snapshot_every, cfg.total_steps) : done == cfg.total_steps) {
            history.snapshots.push_back({done, agents});
        }
    }
    history.steps = cfg.total_steps;
    history.final_agents = std::move(agents);
    return history;
}

}  // namespace cvarqd

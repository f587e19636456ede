#pragma once

#include "cvarqd/augmented_q.hpp"
#include "cvarqd/comm_graph.hpp"
#include "cvarqd/markov_game.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

namespace cvarqd {

struct AgentState {
    std::size_t agent_id = 0;
    AugmentedQ q;
};

/// Shared empirical model of the trajectory: visit counts, transition counts
/// and the reweighting cap xi_bar(s'|s,a) = 1 / P_hat(s'|s,a) (1 where unseen).
class TransitionEstimator {
public:
    TransitionEstimator(std::size_t n_states, std::size_t n_actions);

    void observe(std::size_t s, std::size_t a, std::size_t s_next);

    std::size_t visits(std::size_t s, std::size_t a) const { return visits_[s * n_actions_ + a]; }
    std::size_t count(std::size_t s, std::size_t a, std::size_t s_next) const {
        return counts_[(s * n_actions_ + a) * n_states_ + s_next];
    }
    double p_hat(std::size_t s, std::size_t a, std::size_t s_next) const;
    double xi_bar(std::size_t s, std::size_t a, std::size_t s_next) const {
        return xi_bar_[(s * n_actions_ + a) * n_states_ + s_next];
    }

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<std::size_t> visits_;
    std::vector<std::size_t> counts_;
    std::vector<double> xi_bar_;
};

/// A reweighting xi = y_i / y_j that keeps y_j * xi on the grid.
struct AdmissibleXi {
    std::size_t level = 0;  // i
    double xi = 1.0;
};

/// Largest grid index i with y_i / y_j <= xi_bar(s'|s,a); never below j.
std::size_t admissible_cutoff(const TransitionEstimator& est, std::size_t s, std::size_t a, std::size_t s_next,
                              std::size_t j, const YGrid& grid);

/// { y_i / y_j : y_i / y_j <= xi_bar(s'|s,a) }, ascending. Always contains
/// xi = 1 because xi_bar >= 1.
std::vector<AdmissibleXi> admissible_xis(const TransitionEstimator& est, std::size_t s, std::size_t a,
                                         std::size_t s_next, std::size_t j, const YGrid& grid);

enum class XiRule {
    /// argmax of xi * Q(s', a', y_j xi) over the admissible set; ties go to
    /// the smaller xi.
    kMaximize,
    /// xi = 1 (risk-neutral innovation).
    kFixedOne,
};

/// c + gamma * min_{a'} max_xi xi * Q(s', a', y_j xi). Every lookup lands on a
/// grid level; xi * Q is evaluated as (y_i Q_i) / y_j.
double innovation(const AugmentedQ& q, double cost, std::size_t s, std::size_t a, std::size_t s_next,
                  std::size_t j, const TransitionEstimator& est, double gamma, XiRule rule = XiRule::kMaximize);

struct LearnerConfig {
    WeightSchedule schedule;
    YGrid grid = YGrid::uniform(20);
    std::size_t total_steps = 50000;
    std::uint64_t seed = 1;
    bool concavity_projection = false;
    XiRule xi_rule = XiRule::kMaximize;
    /// Record consensus spread every this many steps (and at the last step).
    std::size_t checkpoint_every = 100;
    /// Full per-agent Q snapshot cadence; 0 keeps only the initial and final
    /// tables.
    std::size_t snapshot_every = 0;
    /// Q_0 of agent n is q0_lo + (q0_hi - q0_lo) * n / N.
    double q0_lo = 0.0;
    double q0_hi = 1.0;
    TrajectoryOptions trajectory;
    /// Throw instead of warn when the weight schedule fails validation.
    bool strict = false;
};

/// Synchronous consensus + innovation update at the visited (s_k, a_k) for
/// every agent and every grid level:
///   Q_n <- (1 - alpha_k) Q_n + alpha_k * innovation_n
///          - beta_k * sum_{l in N(n)} (Q_n - Q_l)
/// All right-hand sides read the step-k tables.
void qd_step(std::vector<AgentState>& agents, const GraphTopology& g, const TrajectoryStep& step,
             const LearnerConfig& cfg, const TransitionEstimator& est, double gamma);

/// max_n || Q_n - Qbar ||_inf with Qbar the agent average.
double consensus_spread(const std::vector<AgentState>& agents);

/// Elementwise agent average.
AugmentedQ mean_table(const std::vector<AgentState>& agents);

struct Checkpoint {
    std::size_t k = 0;
    double spread = 0.0;
    double concavity_defect = 0.0;
};

struct Snapshot {
    std::size_t k = 0;
    std::vector<AgentState> agents;
};

struct RunHistory {
    std::vector<Checkpoint> checkpoints;
    std::vector<Snapshot> snapshots;
    std::vector<AgentState> final_agents;
    ScheduleReport schedule_report;
    /// Largest |Q| seen over the whole run.
    double max_abs_q = 0.0;
    std::size_t steps = 0;
};

std::vector<AgentState> initial_agents(const MarkovGame& game, const LearnerConfig& cfg);

RunHistory run(const MarkovGame& game, const GraphTopology& g, const LearnerConfig& cfg);

}  // namespace cvarqd

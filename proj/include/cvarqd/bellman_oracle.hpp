#pragma once

#include "cvarqd/augmented_q.hpp"
#include "cvarqd/markov_game.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace cvarqd {

/// How the successor reweighting max_xi is solved.
///
/// With u(s') = y * xi(s') the inner problem is
///   max (1/y) sum_{s'} P(s'|s,a) g_{s'}(u(s'))  s.t.  sum P u = y, 0 <= u <= y_m
/// where g_{s'} is the piecewise-linear interpolant of y -> y Q(s', a', y).
enum class InnerMaxMethod {
    /// Knot enumeration when the candidate count is small, greedy otherwise.
    kAuto,
    /// Every vertex of the piecewise-linear problem: all successors but one sit
    /// on a knot. Exact for any Q, exponential in the successor count.
    kKnotEnumeration,
    /// Fractional-knapsack fill over interpolant segments in order of slope,
    /// i.e. the LP over the knot representation. Exact when every g is
    /// concave; a feasible lower bound otherwise.
    kConcaveGreedy,
};

inline constexpr std::size_t kEnumerationBudget = 200000;

/// Where the minimization over the next action sits relative to the successor
/// reweighting.
enum class NextActionChoice {
    /// a' is chosen after s' is revealed: the curves are built from the
    /// successor value V(s', y_j) = min_{a'} Q(s', a', y_j), and
    ///   T[Q](s,a,y_j) = cbar(s,a) + gamma * inner_max_value(s, a, j).
    /// At y = 1 this is classical expected-cost Q iteration.
    kPerSuccessor,
    /// One a' is shared by every successor:
    ///   T[Q](s,a,y_j) = cbar(s,a) + gamma * min_{a'} inner_max(s, a, a', j).
    kShared,
};

struct OracleOptions {
    InnerMaxMethod method = InnerMaxMethod::kAuto;
    NextActionChoice next_action = NextActionChoice::kPerSuccessor;
};

/// Inner problem for the fixed next action a_next.
double inner_max(const MarkovGame& game, const AugmentedQ& q, std::size_t s, std::size_t a, std::size_t a_next,
                 std::size_t j, InnerMaxMethod method = InnerMaxMethod::kAuto);

/// Inner problem on the successor values min_{a'} Q(s', a', y_j).
double inner_max_value(const MarkovGame& game, const AugmentedQ& q, std::size_t s, std::size_t a, std::size_t j,
                       InnerMaxMethod method = InnerMaxMethod::kAuto);

AugmentedQ bellman_apply(const MarkovGame& game, const AugmentedQ& q, const OracleOptions& options = {});

struct ValueIterationResult {
    AugmentedQ q;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    /// Sup-norm change of each sweep; `residual` is the last one.
    std::vector<double> residuals;
};

/// Iterates bellman_apply from `initial` (zero table by default). With r the
/// sup-norm change of the last sweep, stops once max(gamma/(1-gamma), gamma) * r
/// <= tol, which bounds both the distance to the fixed point and the
/// returned table's own Bellman residual by tol. Does not throw on
/// non-convergence; check `converged`.
ValueIterationResult value_iterate(const MarkovGame& game, const YGrid& grid, double tol,
                                   std::size_t max_iters = 10000, std::optional<AugmentedQ> initial = std::nullopt,
                                   const OracleOptions& options = {});

/// Classical expected-cost Q iteration on the average cost; table[s][a].
struct RiskNeutralResult {
    std::vector<std::vector<double>> q;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

RiskNeutralResult risk_neutral_vi(const MarkovGame& game, double tol, std::size_t max_iters = 10000);

/// argmin_a q(s, a, j); ties go to the smallest action index.
std::size_t greedy_policy(const AugmentedQ& q, std::size_t s, std::size_t j);

/// Columns: s,a,y,q.
void write_q_csv(std::ostream& os, const AugmentedQ& q);

}  // namespace cvarqd

#include "cvarqd/bellman_oracle.hpp"

#include "cvarqd/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cvarqd {

namespace {

/// For a gamma-contraction, the step difference r = |Q_k - Q_{k-1}| bounds the
/// distance of Q_k to the fixed point by gamma/(1-gamma) r and the next step
/// difference by gamma r.
bool residual_converged(double residual, double gamma, double tol) {
    return std::max(gamma / (1.0 - gamma), gamma) * residual <= tol;
}

/// Interpolants g_{s'}(u) for the successors of one (s, a) under one a'.
struct SuccessorCurves {
    std::vector<double> knots;               // 0, y_1, ..., y_m
    std::vector<double> probs;               // P(s'|s,a) > 0 only
    std::vector<std::vector<double>> g;      // g[i][k] at knots[k]

    double eval(std::size_t i, double u) const {
        auto it = std::lower_bound(knots.begin(), knots.end(), u);
        if (it == knots.end()) return g[i].back();
        const auto k = static_cast<std::size_t>(it - knots.begin());
        if (*it == u || k == 0) return g[i][k];
        const double t = (u - knots[k - 1]) / (knots[k] - knots[k - 1]);
        return g[i][k - 1] + t * (g[i][k] - g[i][k - 1]);
    }
};

/// Curves for one fixed next action a', or, when a_next is empty, for the
/// successor value V(s', y_j) = min_{a'} Q(s', a', y_j).
SuccessorCurves build_curves(const MarkovGame& game, const AugmentedQ& q, std::size_t s, std::size_t a,
                             std::optional<std::size_t> a_next) {
    const YGrid& grid = q.grid();
    SuccessorCurves c;
    c.knots.reserve(grid.size() + 1);
    c.knots.push_back(0.0);
    for (double y : grid.levels()) c.knots.push_back(y);

    const auto row = game.transition_row(s, a);
    for (std::size_t sn = 0; sn < row.size(); ++sn) {
        if (row[sn] <= 0.0) continue;
        c.probs.push_back(row[sn]);
        std::vector<double> g(c.knots.size());
        g[0] = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double v = std::numeric_limits<double>::infinity();
            if (a_next) {
                v = q(sn, *a_next, j);
            } else {
                for (std::size_t an = 0; an < q.n_actions(); ++an) v = std::min(v, q(sn, an, j));
            }
            g[j + 1] = grid[j] * v;
        }
        c.g.push_back(std::move(g));
    }
    if (c.probs.empty()) throw std::logic_error("degenerate transition row with no support");
    return c;
}

double enumerate_knots(const SuccessorCurves& c, double y) {
    constexpr double kSlack = 1e-12;
    const std::size_t n = c.probs.size();
    const std::size_t K = c.knots.size();
    const double u_max = c.knots.back();

    if (n == 1) return c.eval(0, std::min(y / c.probs[0], u_max)) * c.probs[0] / y;

    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> choice(n - 1, 0);
    for (std::size_t free = 0; free < n; ++free) {
        std::fill(choice.begin(), choice.end(), 0);
        while (true) {
            double used = 0.0;
            double value = 0.0;
            std::size_t slot = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == free) continue;
                used += c.probs[i] * c.knots[choice[slot]];
                value += c.probs[i] * c.g[i][choice[slot]];
                ++slot;
            }
            const double u_free = (y - used) / c.probs[free];
            if (u_free >= -kSlack && u_free <= u_max + kSlack) {
                value += c.probs[free] * c.eval(free, std::clamp(u_free, 0.0, u_max));
                best = std::max(best, value);
            }
            // odometer
            std::size_t d = 0;
            while (d < choice.size() && ++choice[d] == K) choice[d++] = 0;
            if (d == choice.size()) break;
        }
    }
    return best / y;
}

double greedy_fill(const SuccessorCurves& c, double y) {
    const std::size_t n = c.probs.size();
    std::vector<std::size_t> next(n, 1);  // next segment [knots[k-1], knots[k]] per successor
    double remaining = y;
    double value = 0.0;
    while (remaining > 0.0) {
        std::size_t pick = n;
        double best_slope = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = next[i];
            if (k >= c.knots.size()) continue;
            const double slope = (c.g[i][k] - c.g[i][k - 1]) / (c.knots[k] - c.knots[k - 1]);
            if (slope > best_slope) {
                best_slope = slope;
                pick = i;
            }
        }
        if (pick == n) break;  // every successor saturated at y_m
        const std::size_t k = next[pick];
        const double capacity = c.probs[pick] * (c.knots[k] - c.knots[k - 1]);
        const double take = std::min(capacity, remaining);
        value += best_slope * take;
        remaining -= take;
        ++next[pick];
    }
    return value / y;
}

std::size_t enumeration_size(std::size_t successors, std::size_t knots) {
    double count = static_cast<double>(successors);
    for (std::size_t i = 1; i < successors; ++i) count *= static_cast<double>(knots);
    return count > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(count);
}

double solve_inner(const SuccessorCurves& c, double y, InnerMaxMethod method) {
    if (method == InnerMaxMethod::kAuto) {
        method = enumeration_size(c.probs.size(), c.knots.size()) <= kEnumerationBudget
                     ? InnerMaxMethod::kKnotEnumeration
                     : InnerMaxMethod::kConcaveGreedy;
    }
    return method == InnerMaxMethod::kKnotEnumeration ? enumerate_knots(c, y) : greedy_fill(c, y);
}

void check_shape(const MarkovGame& game, const AugmentedQ& q) {
    if (q.n_states() != game.n_states() || q.n_actions() != game.n_actions()) {
        throw std::invalid_argument("Q table shape does not match the game");
    }
}

}  // namespace

double inner_max(const MarkovGame& game, const AugmentedQ& q, std::size_t s, std::size_t a, std::size_t a_next,
                 std::size_t j, InnerMaxMethod method) {
    check_shape(game, q);
    return solve_inner(build_curves(game, q, s, a, a_next), q.grid()[j], method);
}

double inner_max_value(const MarkovGame& game, const AugmentedQ& q, std::size_t s, std::size_t a, std::size_t j,
                       InnerMaxMethod method) {
    check_shape(game, q);
    return solve_inner(build_curves(game, q, s, a, std::nullopt), q.grid()[j], method);
}

AugmentedQ bellman_apply(const MarkovGame& game, const AugmentedQ& q, const OracleOptions& options) {
    check_shape(game, q);
    AugmentedQ out(q.n_states(), q.n_actions(), q.grid());
    const std::size_t m = q.n_levels();
    const InnerMaxMethod method = options.method;
    std::vector<SuccessorCurves> curves;
    for (std::size_t s = 0; s < game.n_states(); ++s) {
        for (std::size_t a = 0; a < game.n_actions(); ++a) {
            curves.clear();
            if (options.next_action == NextActionChoice::kPerSuccessor) {
                curves.push_back(build_curves(game, q, s, a, std::nullopt));
            } else {
                for (std::size_t an = 0; an < game.n_actions(); ++an) curves.push_back(build_curves(game, q, s, a, an));
            }
            const double cbar = game.average_cost(s, a);
            for (std::size_t j = 0; j < m; ++j) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& c : curves) best = std::min(best, solve_inner(c, q.grid()[j], method));
                out(s, a, j) = cbar + game.gamma() * best;
            }
        }
    }
    return out;
}

ValueIterationResult value_iterate(const MarkovGame& game, const YGrid& grid, double tol, std::size_t max_iters,
                                   std::optional<AugmentedQ> initial, const OracleOptions& options) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    AugmentedQ q = initial ? std::move(*initial) : AugmentedQ(game.n_states(), game.n_actions(), grid);
    if (!(q.grid() == grid)) throw std::invalid_argument("initial Q grid does not match");

    ValueIterationResult result{q, 0, std::numeric_limits<double>::infinity(), false, {}};
    while (result.iterations < max_iters) {
        AugmentedQ next = bellman_apply(game, result.q, options);
        result.residual = sup_distance(next, result.q);
        result.residuals.push_back(result.residual);
        result.q = std::move(next);
        ++result.iterations;
        if (residual_converged(result.residual, game.gamma(), tol)) {
            result.converged = true;
            break;
        }
    }
    return result;
}

RiskNeutralResult risk_neutral_vi(const MarkovGame& game, double tol, std::size_t max_iters) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const std::size_t S = game.n_states();
    const std::size_t A = game.n_actions();
    RiskNeutralResult result{std::vector(S, std::vector<double>(A, 0.0)), 0, 0.0, false};
    std::vector<double> v(S);
    while (result.iterations < max_iters) {
        for (std::size_t s = 0; s < S; ++s) v[s] = *std::min_element(result.q[s].begin(), result.q[s].end());
        double residual = 0.0;
        auto next = result.q;
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                double expected = 0.0;
                for (std::size_t sn = 0; sn < S; ++sn) expected += game.transition(s, a, sn) * v[sn];
                next[s][a] = game.average_cost(s, a) + game.gamma() * expected;
                residual = std::max(residual, std::abs(next[s][a] - result.q[s][a]));
            }
        }
        result.q = std::move(next);
        result.residual = residual;
        ++result.iterations;
        if (residual_converged(residual, game.gamma(), tol)) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::size_t greedy_policy(const AugmentedQ& q, std::size_t s, std::size_t j) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.n_actions(); ++a) {
        if (q(s, a, j) < q(s, best, j)) best = a;
    }
    return best;
}

void write_q_csv(std::ostream& os, const AugmentedQ& q) {
    os << "s,a,y,q\n";
    for (std::size_t s = 0; s < q.n_states(); ++s) {
        for (std::size_t a = 0; a < q.n_actions(); ++a) {
            for (std::size_t j = 0; j < q.n_levels(); ++j) {
                os << s << ',' << a << ',' << format_double(q.grid()[j]) << ',' << format_double(q(s, a, j)) << '\n';
            }
        }
    }
}

}  // namespace cvarqd

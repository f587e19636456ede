#include "cvarqd/bellman_oracle.hpp"
#include "cvarqd/csv.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace cvarqd;

namespace {

using Tensor3 = std::vector<std::vector<std::vector<double>>>;

const OracleOptions kBothChoices[] = {{InnerMaxMethod::kAuto, NextActionChoice::kPerSuccessor},
                                      {InnerMaxMethod::kAuto, NextActionChoice::kShared}};

MarkovGame single_cell_game(double cost, double gamma) { return MarkovGame({{{1.0}}}, {{{cost}}}, gamma); }

MarkovGame game_with_seed(std::uint64_t seed, std::size_t states = 2) {
    RandomGameSpec spec;
    spec.seed = seed;
    spec.n_states = states;
    return random_game(spec);
}

AugmentedQ random_q(const MarkovGame& game, const YGrid& grid, std::mt19937_64& gen, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    AugmentedQ q(game.n_states(), game.n_actions(), grid);
    for (double& v : q.values()) v = u(gen);
    return q;
}

// Linear interpolation of g(u) = u Q(u) through (0,0) and the grid knots,
// written independently of the library.
double g_at(const YGrid& grid, std::span<const double> q, double u) {
    double x0 = 0.0;
    double g0 = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x1 = grid[k];
        const double g1 = x1 * q[k];
        if (u <= x1) return g0 + (u - x0) / (x1 - x0) * (g1 - g0);
        x0 = x1;
        g0 = g1;
    }
    return g0;
}

// Dense scan over u_0 for two successors: u_1 = (y - p_0 u_0) / p_1.
double dense_inner_max_two(const MarkovGame& game, const AugmentedQ& q, std::size_t s, std::size_t a,
                           std::size_t a_next, std::size_t j, std::size_t resolution) {
    const YGrid& grid = q.grid();
    const double y = grid[j];
    const double p0 = game.transition(s, a, 0);
    const double p1 = game.transition(s, a, 1);
    const double ym = grid.back();
    double best = -1e300;
    for (std::size_t i = 0; i <= resolution; ++i) {
        const double u0 = ym * static_cast<double>(i) / static_cast<double>(resolution);
        const double u1 = (y - p0 * u0) / p1;
        if (u1 < 0.0 || u1 > ym) continue;
        best = std::max(best, p0 * g_at(grid, q.slice(0, a_next), u0) + p1 * g_at(grid, q.slice(1, a_next), u1));
    }
    return best / y;
}

// CVaR of the successor-value distribution by integrating its upper quantile.
double tail_average(std::vector<double> values, std::vector<double> probs, double y) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto k) { return values[i] > values[k]; });
    double mass = 0.0;
    double total = 0.0;
    for (std::size_t i : order) {
        const double take = std::min(probs[i], y - mass);
        if (take <= 0.0) break;
        total += take * values[i];
        mass += take;
    }
    return total / y;
}

// Expected-cost Q iteration written directly against the kernel.
std::vector<std::vector<double>> classical_vi(const MarkovGame& game, std::size_t sweeps) {
    std::vector q(game.n_states(), std::vector<double>(game.n_actions(), 0.0));
    for (std::size_t it = 0; it < sweeps; ++it) {
        auto next = q;
        for (std::size_t s = 0; s < game.n_states(); ++s) {
            for (std::size_t a = 0; a < game.n_actions(); ++a) {
                double e = 0.0;
                for (std::size_t sn = 0; sn < game.n_states(); ++sn) {
                    e += game.transition(s, a, sn) * *std::min_element(q[sn].begin(), q[sn].end());
                }
                next[s][a] = game.average_cost(s, a) + game.gamma() * e;
            }
        }
        q = next;
    }
    return q;
}

}  // namespace

TEST_CASE("inner max with a single successor pins xi to one") {
    const MarkovGame game({{{0.0, 1.0}, {1.0, 0.0}}, {{0.0, 1.0}, {1.0, 0.0}}}, {{{0.0, 0.0}, {0.0, 0.0}}}, 0.5);
    std::mt19937_64 gen(1);
    const auto q = random_q(game, YGrid::uniform(10), gen, 5.0);
    for (std::size_t j = 0; j < 10; ++j) {
        for (auto method : {InnerMaxMethod::kKnotEnumeration, InnerMaxMethod::kConcaveGreedy}) {
            CHECK(inner_max(game, q, 0, 0, 1, j, method) == doctest::Approx(q(1, 1, j)).epsilon(1e-13));
            CHECK(inner_max(game, q, 0, 1, 0, j, method) == doctest::Approx(q(0, 0, j)).epsilon(1e-13));
        }
    }
}

TEST_CASE("inner max at y = 1 with y-constant Q is the plain expectation") {
    const auto game = game_with_seed(3);
    AugmentedQ q(2, 2, YGrid::uniform(8));
    for (std::size_t j = 0; j < 8; ++j) {
        q(0, 1, j) = 2.0;
        q(1, 1, j) = -1.5;
    }
    const double expected = game.transition(1, 0, 0) * 2.0 + game.transition(1, 0, 1) * -1.5;
    CHECK(inner_max(game, q, 1, 0, 1, 7) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("inner max on a fair coin between 0 and 10 at y = 0.5") {
    const MarkovGame game({{{0.5, 0.5}}, {{0.5, 0.5}}}, {{{0.0}, {0.0}}}, 0.5);
    AugmentedQ q(2, 1, YGrid::uniform(4));
    for (std::size_t j = 0; j < 4; ++j) q(1, 0, j) = 10.0;
    for (auto method : {InnerMaxMethod::kKnotEnumeration, InnerMaxMethod::kConcaveGreedy}) {
        CHECK(inner_max(game, q, 0, 0, 0, 1, method) == doctest::Approx(10.0).epsilon(1e-14));
    }
}

TEST_CASE("property: y-constant Q gives the CVaR of the successor values") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    const auto grid = YGrid::uniform(20);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto game = game_with_seed(seed, 3);
        AugmentedQ q(3, 2, grid);
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t a = 0; a < 2; ++a) {
                const double c = u(gen);
                for (std::size_t j = 0; j < grid.size(); ++j) q(s, a, j) = c;
            }
        }
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t a = 0; a < 2; ++a) {
                for (std::size_t an = 0; an < 2; ++an) {
                    std::vector<double> values;
                    std::vector<double> probs;
                    for (std::size_t sn = 0; sn < 3; ++sn) {
                        values.push_back(q(sn, an, 0));
                        probs.push_back(game.transition(s, a, sn));
                    }
                    for (std::size_t j = 0; j < grid.size(); ++j) {
                        const double oracle = tail_average(values, probs, grid[j]);
                        CHECK(std::abs(inner_max(game, q, s, a, an, j, InnerMaxMethod::kKnotEnumeration) - oracle) <= 1e-12);
                        CHECK(std::abs(inner_max(game, q, s, a, an, j, InnerMaxMethod::kConcaveGreedy) - oracle) <= 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("property: knot enumeration matches a dense scan for arbitrary Q") {
    std::mt19937_64 gen(23);
    const auto grid = YGrid::uniform(10);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto game = game_with_seed(seed);
        const auto q = random_q(game, grid, gen, 3.0);
        for (std::size_t s = 0; s < 2; ++s) {
            for (std::size_t j = 0; j < grid.size(); ++j) {
                const double dense = dense_inner_max_two(game, q, s, 1, 0, j, 20000);
                const double exact = inner_max(game, q, s, 1, 0, j, InnerMaxMethod::kKnotEnumeration);
                // The scan is a feasible lower bound; its gap is bounded by the
                // largest slope times the scan step divided by y.
                CHECK(exact >= dense - 1e-12);
                CHECK(exact - dense <= 1e-2);
            }
        }
    }
}

TEST_CASE("property: greedy fill equals enumeration on concave inputs and never exceeds it") {
    const auto grid = YGrid::uniform(20);
    std::mt19937_64 gen(31);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto game = game_with_seed(seed, 3);
        const auto fixed = value_iterate(game, grid, 1e-12).q;  // concave in y Q by construction
        const auto arbitrary = random_q(game, grid, gen, 3.0);
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t a = 0; a < 2; ++a) {
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    const double e = inner_max(game, fixed, s, a, 0, j, InnerMaxMethod::kKnotEnumeration);
                    const double g = inner_max(game, fixed, s, a, 0, j, InnerMaxMethod::kConcaveGreedy);
                    CHECK(std::abs(e - g) <= 1e-10);
                    const double e2 = inner_max(game, arbitrary, s, a, 1, j, InnerMaxMethod::kKnotEnumeration);
                    const double g2 = inner_max(game, arbitrary, s, a, 1, j, InnerMaxMethod::kConcaveGreedy);
                    CHECK(g2 <= e2 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("successor-value inner max takes the best next action per successor") {
    const MarkovGame game({{{0.0, 1.0}}, {{0.0, 1.0}}}, {{{0.0}, {0.0}}}, 0.5);
    AugmentedQ q(2, 1, YGrid::uniform(4));
    for (std::size_t j = 0; j < 4; ++j) q(1, 0, j) = 4.0 - static_cast<double>(j);
    for (std::size_t j = 0; j < 4; ++j) CHECK(inner_max_value(game, q, 0, 0, j) == doctest::Approx(q(1, 0, j)));

    // Two successors whose best actions differ: choosing per successor beats
    // any single shared action.
    const MarkovGame split({{{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}}, {{{0.0, 0.0}, {0.0, 0.0}}}, 0.5);
    AugmentedQ r(2, 2, YGrid::uniform(4));
    for (std::size_t j = 0; j < 4; ++j) {
        r(0, 0, j) = 0.0;
        r(0, 1, j) = 10.0;
        r(1, 0, j) = 10.0;
        r(1, 1, j) = 0.0;
    }
    CHECK(inner_max_value(split, r, 0, 0, 3) == doctest::Approx(0.0));
    CHECK(std::min(inner_max(split, r, 0, 0, 0, 3), inner_max(split, r, 0, 0, 1, 3)) == doctest::Approx(5.0));
}

TEST_CASE("property: per-successor choice is never above the shared choice") {
    std::mt19937_64 gen(71);
    const auto grid = YGrid::uniform(20);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto game = game_with_seed(seed, 3);
        const auto q = random_q(game, grid, gen, 4.0);
        const auto per = bellman_apply(game, q, kBothChoices[0]);
        const auto shared = bellman_apply(game, q, kBothChoices[1]);
        for (std::size_t i = 0; i < per.values().size(); ++i) CHECK(per.values()[i] <= shared.values()[i] + 1e-12);
    }
}

TEST_CASE("Bellman map on a degenerate game") {
    const auto game = single_cell_game(1.5, 0.7);
    const auto grid = YGrid::uniform(6);
    AugmentedQ q(1, 1, grid);
    for (std::size_t j = 0; j < 6; ++j) q(0, 0, j) = 2.0;
    const auto tq = bellman_apply(game, q);
    for (std::size_t j = 0; j < 6; ++j) CHECK(tq(0, 0, j) == doctest::Approx(1.5 + 0.7 * 2.0).epsilon(1e-15));
}

TEST_CASE("Bellman map of the zero table is the average cost") {
    const auto game = game_with_seed(4);
    const auto tq = bellman_apply(game, AugmentedQ(2, 2, YGrid::uniform(20)));
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t j = 0; j < 20; ++j) CHECK(tq(s, a, j) == game.average_cost(s, a));
        }
    }
}

TEST_CASE("property: constant shift, monotonicity and contraction") {
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const auto grid = YGrid::uniform(20);
    for (const auto& opts : kBothChoices)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto game = game_with_seed(seed);
        for (int trial = 0; trial < 10; ++trial) {
            const auto q1 = random_q(game, grid, gen, 5.0);
            const double c = u(gen) - 1.0;
            auto shifted = q1;
            shifted += c;
            const auto t1 = bellman_apply(game, q1, opts);
            const auto ts = bellman_apply(game, shifted, opts);
            for (std::size_t i = 0; i < t1.values().size(); ++i) {
                CHECK(std::abs(ts.values()[i] - (t1.values()[i] + game.gamma() * c)) <= 1e-12);
            }

            auto above = q1;
            for (double& v : above.values()) v += u(gen);
            const auto ta = bellman_apply(game, above, opts);
            for (std::size_t i = 0; i < t1.values().size(); ++i) CHECK(ta.values()[i] >= t1.values()[i] - 1e-12);

            const auto q2 = random_q(game, grid, gen, 5.0);
            const auto t2 = bellman_apply(game, q2, opts);
            CHECK(sup_distance(t1, t2) <= game.gamma() * sup_distance(q1, q2) + 1e-10);
        }
    }
}

TEST_CASE("value iteration on the geometric series") {
    const auto res = value_iterate(single_cell_game(1.0, 0.7), YGrid::uniform(20), 1e-8);
    CHECK(res.converged);
    CHECK(res.iterations <= 60);
    for (double v : res.q.values()) CHECK(std::abs(v - 10.0 / 3.0) <= 1e-8);
}

TEST_CASE("value iteration with no discount stops after one sweep") {
    RandomGameSpec spec;
    spec.gamma = 0.0;
    const auto game = random_game(spec);
    const auto res = value_iterate(game, YGrid::uniform(20), 1e-10);
    CHECK(res.converged);
    CHECK(res.iterations == 1);
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t j = 0; j < 20; ++j) CHECK(res.q(s, a, j) == game.average_cost(s, a));
        }
    }
    const auto rn = risk_neutral_vi(game, 1e-10);
    CHECK(rn.iterations == 1);
    CHECK(rn.q[1][0] == game.average_cost(1, 0));
}

TEST_CASE("value iteration reports non-convergence without throwing") {
    const auto res = value_iterate(game_with_seed(1), YGrid::uniform(20), 1e-12, 3);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 3);
    CHECK(res.residuals.size() == 3);
    CHECK_THROWS(value_iterate(game_with_seed(1), YGrid::uniform(20), 0.0));
}

TEST_CASE("property: the fixed point is unique and risk-monotone") {
    const auto grid = YGrid::uniform(20);
    for (const auto& opts : kBothChoices)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto game = game_with_seed(seed);
        const auto from_zero = value_iterate(game, grid, 1e-11, 10000, std::nullopt, opts);
        const auto from_far = value_iterate(game, grid, 1e-11, 10000, AugmentedQ(2, 2, grid, 100.0), opts);
        REQUIRE(from_zero.converged);
        REQUIRE(from_far.converged);
        CHECK(sup_distance(from_zero.q, from_far.q) <= 1e-9);
        CHECK(max_monotonicity_violation(from_zero.q) <= 1e-9);
        CHECK(max_concavity_defect(from_zero.q) <= 1e-8);
        CHECK(from_zero.q.max_abs() <= game.c_max() / (1.0 - game.gamma()) + 1e-9);
        CHECK(sup_distance(bellman_apply(game, from_zero.q, opts), from_zero.q) <= 1e-11);
    }
}

TEST_CASE("property: deterministic chains have y-independent values") {
    // 0 -> 1 -> 2 -> 0 under action 0, self-loop under action 1.
    const Tensor3 P{{{0, 1, 0}, {1, 0, 0}}, {{0, 0, 1}, {0, 1, 0}}, {{1, 0, 0}, {0, 0, 1}}};
    const Tensor3 c{{{1.0, 3.0}, {-2.0, 0.5}, {4.0, 2.0}}};
    const MarkovGame game(P, c, 0.8);
    const auto res = value_iterate(game, YGrid::uniform(10), 1e-12);
    const auto rn = classical_vi(game, 400);
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(res.q(s, a, j) - rn[s][a]) <= 1e-10);
        }
    }
    // Rolling out the greedy policy from state 1 reproduces its optimal value.
    std::vector<double> path;
    std::size_t s = 1;
    for (int t = 0; t < 400; ++t) {
        const std::size_t a = greedy_policy(res.q, s, 9);
        path.push_back(c[0][s][a]);
        for (std::size_t sn = 0; sn < 3; ++sn) {
            if (P[s][a][sn] == 1.0) {
                s = sn;
                break;
            }
        }
    }
    CHECK(std::abs(discounted_return(path, 0.8) - *std::min_element(rn[1].begin(), rn[1].end())) <= 1e-10);
}

TEST_CASE("property: the y = 1 slice is classical value iteration") {
    const auto grid = YGrid::uniform(20);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto game = game_with_seed(seed);
        const auto res = value_iterate(game, grid, 1e-11);
        const auto oracle = classical_vi(game, 200);
        const auto rn = risk_neutral_vi(game, 1e-11);
        CHECK(rn.converged);
        CHECK(rn.residual <= 1e-11);
        CHECK(res.residual <= 1e-11);
        for (std::size_t s = 0; s < 2; ++s) {
            for (std::size_t a = 0; a < 2; ++a) {
                CHECK(std::abs(res.q(s, a, 19) - oracle[s][a]) <= 1e-8);
                CHECK(std::abs(rn.q[s][a] - oracle[s][a]) <= 1e-9);
            }
            const std::size_t rn_policy = rn.q[s][0] <= rn.q[s][1] ? 0 : 1;
            CHECK(greedy_policy(res.q, s, 19) == rn_policy);
        }
    }
}

TEST_CASE("greedy policy picks the smaller value and breaks ties low") {
    AugmentedQ q(1, 3, YGrid::uniform(2));
    q(0, 0, 0) = 1.0;
    q(0, 1, 0) = 2.0;
    q(0, 2, 0) = 3.0;
    CHECK(greedy_policy(q, 0, 0) == 0);
    q(0, 1, 1) = -1.0;
    q(0, 2, 1) = -1.0;
    CHECK(greedy_policy(q, 0, 1) == 1);
    CHECK(greedy_policy(AugmentedQ(1, 3, YGrid::uniform(2)), 0, 0) == 0);
}

TEST_CASE("Q table CSV round trip") {
    const auto res = value_iterate(game_with_seed(2), YGrid::uniform(5), 1e-10);
    std::stringstream ss;
    write_q_csv(ss, res.q);
    const auto table = read_csv(ss);
    CHECK(table.header == std::vector<std::string>{"s", "a", "y", "q"});
    REQUIRE(table.rows.size() == 2 * 2 * 5);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto s = static_cast<std::size_t>(table.number(r, "s"));
        const auto a = static_cast<std::size_t>(table.number(r, "a"));
        const auto j = static_cast<std::size_t>(res.q.grid().find(table.number(r, "y")));
        CHECK(table.number(r, "q") == res.q(s, a, j));
    }
}

TEST_CASE("shape mismatches are rejected") {
    const auto game = game_with_seed(1);
    CHECK_THROWS_AS(bellman_apply(game, AugmentedQ(3, 2, YGrid::uniform(4))), std::invalid_argument);
    CHECK_THROWS_AS(value_iterate(game, YGrid::uniform(4), 1e-8, 10, AugmentedQ(2, 2, YGrid::uniform(5))),
                    std::invalid_argument);
}

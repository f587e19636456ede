#include "cvarqd/risk_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cvarqd {

namespace {

void check_confidence(double y) {
    if (!(y > 0.0 && y <= 1.0)) {
        throw std::invalid_argument("confidence level must lie in (0, 1], got " + std::to_string(y));
    }
}

}  // namespace

YGrid::YGrid(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw std::invalid_argument("y-grid must not be empty");
    if (!(levels_.front() > 0.0) || levels_.back() > 1.0) {
        throw std::invalid_argument("y-grid levels must lie in (0, 1]");
    }
    for (std::size_t j = 1; j < levels_.size(); ++j) {
        if (!(levels_[j] > levels_[j - 1])) throw std::invalid_argument("y-grid must be strictly increasing");
    }
}

YGrid YGrid::uniform(std::size_t m) {
    if (m == 0) throw std::invalid_argument("y-grid needs m >= 1");
    std::vector<double> levels(m);
    for (std::size_t i = 0; i < m; ++i) levels[i] = static_cast<double>(i + 1) / static_cast<double>(m);
    return YGrid(std::move(levels));
}

std::ptrdiff_t YGrid::find(double y, double tol) const {
    auto it = std::lower_bound(levels_.begin(), levels_.end(), y - tol);
    if (it != levels_.end() && std::abs(*it - y) <= tol) return it - levels_.begin();
    return -1;
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> values, std::vector<double> probs)
    : values_(std::move(values)), probs_(std::move(probs)) {
    if (values_.empty()) throw std::invalid_argument("distribution must have at least one atom");
    if (values_.size() != probs_.size()) throw std::invalid_argument("values and probs differ in length");
    double total = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) throw std::invalid_argument("negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("probabilities do not sum to 1");
}

double DiscreteDistribution::mean() const {
    return std::inner_product(values_.begin(), values_.end(), probs_.begin(), 0.0);
}

double value_at_risk(const DiscreteDistribution& d, double y) {
    check_confidence(y);
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return d.values()[i] < d.values()[j]; });

    double cdf = 0.0;
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
        const std::size_t i = order[idx];
        cdf += d.probs()[i];
        const bool tie_follows = idx + 1 < order.size() && d.values()[order[idx + 1]] == d.values()[i];
        if (!tie_follows && d.probs()[i] > 0.0 && cdf >= 1.0 - y - 1e-12) return d.values()[i];
    }
    return d.values()[order.back()];
}

double cvar(const DiscreteDistribution& d, double y) {
    check_confidence(y);
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return d.values()[i] > d.values()[j]; });

    double remaining = y;
    double total = 0.0;
    for (std::size_t i : order) {
        if (remaining <= 0.0) break;
        const double take = std::min(d.probs()[i], remaining);
        total += take * d.values()[i];
        remaining -= take;
    }
    return total / y;
}

double cvar_bruteforce(const DiscreteDistribution& d, double y) {
    check_confidence(y);
    const std::size_t n = d.size();
    if (n > kBruteForceMaxAtoms) {
        throw std::invalid_argument("brute-force CVaR supports at most " + std::to_string(kBruteForceMaxAtoms) +
                                    " atoms");
    }
    const auto& z = d.values();
    std::vector<double> cap(n);
    for (std::size_t i = 0; i < n; ++i) cap[i] = d.probs()[i] / y;

    // A vertex of the box-plus-hyperplane polytope has every coordinate but
    // one at a bound.
    constexpr double kSlack = 1e-12;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t free = 0; free < n; ++free) {
        const std::size_t others = n - 1;
        for (std::size_t mask = 0; mask < (std::size_t{1} << others); ++mask) {
            double used = 0.0;
            double objective = 0.0;
            std::size_t bit = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == free) continue;
                if (mask & (std::size_t{1} << bit)) {
                    used += cap[i];
                    objective += cap[i] * z[i];
                }
                ++bit;
            }
            const double w_free = 1.0 - used;
            if (w_free < -kSlack || w_free > cap[free] + kSlack) continue;
            best = std::max(best, objective + w_free * z[free]);
        }
    }
    return best;
}

double cvar_rockafellar_uryasev(const DiscreteDistribution& d, double y) {
    check_confidence(y);
    double best = std::numeric_limits<double>::infinity();
    for (double t : d.values()) {
        double excess = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) excess += d.probs()[i] * std::max(d.values()[i] - t, 0.0);
        best = std::min(best, t + excess / y);
    }
    return best;
}

double interpolate_g(const YGrid& grid, std::span<const double> q_slice, double y_query) {
    if (q_slice.size() != grid.size()) throw std::invalid_argument("q slice length does not match y-grid");
    if (y_query < 0.0 || y_query > grid.back()) {
        throw std::invalid_argument("interpolation query outside [0, y_m]: " + std::to_string(y_query));
    }
    const auto& levels = grid.levels();
    auto it = std::lower_bound(levels.begin(), levels.end(), y_query);
    const auto j = static_cast<std::size_t>(it - levels.begin());
    if (levels[j] == y_query) return y_query * q_slice[j];

    const double y_hi = levels[j];
    const double g_hi = y_hi * q_slice[j];
    const double y_lo = j == 0 ? 0.0 : levels[j - 1];
    const double g_lo = j == 0 ? 0.0 : y_lo * q_slice[j - 1];
    const double t = (y_query - y_lo) / (y_hi - y_lo);
    return g_lo + t * (g_hi - g_lo);
}

double interpolate_yq(const YGrid& grid, std::span<const double> q_slice, double y_query) {
    if (!(y_query > 0.0)) throw std::invalid_argument("interpolation query must be > 0");
    const auto j = grid.find(y_query, 0.0);
    if (j >= 0) return q_slice[static_cast<std::size_t>(j)];
    return interpolate_g(grid, q_slice, y_query) / y_query;
}

double concavity_defect(const YGrid& grid, std::span<const double> q_slice) {
    if (q_slice.size() != grid.size()) throw std::invalid_argument("q slice length does not match y-grid");
    double defect = 0.0;
    for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
        const double y0 = grid[j - 1], y1 = grid[j], y2 = grid[j + 1];
        const double g0 = y0 * q_slice[j - 1], g1 = y1 * q_slice[j], g2 = y2 * q_slice[j + 1];
        const double chord = g0 + (g2 - g0) * (y1 - y0) / (y2 - y0);
        defect = std::max(defect, chord - g1);
    }
    return defect;
}

void project_concave(const YGrid& grid, std::span<double> q_slice) {
    if (q_slice.size() != grid.size()) throw std::invalid_argument("q slice length does not match y-grid");
    const std::size_t m = grid.size();
    if (m < 3) return;
    std::vector<double> g(m);
    for (std::size_t j = 0; j < m; ++j) g[j] = grid[j] * q_slice[j];

    // Upper hull by monotone chain.
    std::vector<std::size_t> hull;
    for (std::size_t j = 0; j < m; ++j) {
        while (hull.size() >= 2) {
            const std::size_t p = hull[hull.size() - 2], q = hull.back();
            const double cross = (grid[q] - grid[p]) * (g[j] - g[p]) - (g[q] - g[p]) * (grid[j] - grid[p]);
            if (cross >= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(j);
    }
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        const std::size_t lo = hull[h], hi = hull[h + 1];
        for (std::size_t j = lo + 1; j < hi; ++j) {
            const double t = (grid[j] - grid[lo]) / (grid[hi] - grid[lo]);
            q_slice[j] = (g[lo] + t * (g[hi] - g[lo])) / grid[j];
        }
    }
}

}  // namespace cvarqd

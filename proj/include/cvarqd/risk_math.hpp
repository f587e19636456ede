#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cvarqd {

/// Ascending confidence levels y_1 < ... < y_m in (0, 1].
class YGrid {
public:
    explicit YGrid(std::vector<double> levels);

    /// m equally spaced levels i/m, i = 1..m.
    static YGrid uniform(std::size_t m);

    std::size_t size() const { return levels_.size(); }
    double operator[](std::size_t j) const { return levels_[j]; }
    double front() const { return levels_.front(); }
    double back() const { return levels_.back(); }
    const std::vector<double>& levels() const { return levels_; }

    /// Index of the level equal to y within tol, if any.
    std::ptrdiff_t find(double y, double tol = 1e-12) const;

    bool operator==(const YGrid& other) const { return levels_ == other.levels_; }

private:
    std::vector<double> levels_;
};

class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<double> values, std::vector<double> probs);

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }
    double mean() const;

private:
    std::vector<double> values_;
    std::vector<double> probs_;
};

/// min { z in support : F(z) >= 1 - y }
double value_at_risk(const DiscreteDistribution& d, double y);

/// Dual form: max over xi in [0, 1/y] with E[xi] = 1 of E[xi Z], solved by
/// stacking weight 1/y on the largest values until mass y is used.
double cvar(const DiscreteDistribution& d, double y);

/// Exhaustive maximization of the same dual objective over every vertex of
/// the feasible polytope {w : 0 <= w_i <= p_i / y, sum w_i = 1}. Independent
/// of the sorting used by cvar(). Supports at most kBruteForceMaxAtoms atoms.
double cvar_bruteforce(const DiscreteDistribution& d, double y);
inline constexpr std::size_t kBruteForceMaxAtoms = 6;

/// Rockafellar-Uryasev form: min_t { t + E[(Z - t)^+] / y }. The objective is
/// convex piecewise linear in t with kinks at the atoms, so the minimum is
/// attained at one of them.
double cvar_rockafellar_uryasev(const DiscreteDistribution& d, double y);

/// Piecewise-linear interpolation of g(y) = y * Q(y) through (0, 0) and the
/// knots (y_j, y_j * q_slice[j]), returned as g(y_query) / y_query.
double interpolate_yq(const YGrid& grid, std::span<const double> q_slice, double y_query);

/// Same interpolant, returned as g(y_query); y_query = 0 gives 0.
double interpolate_g(const YGrid& grid, std::span<const double> q_slice, double y_query);

/// Largest amount by which an interior g_j = y_j q_j lies below the chord of
/// its neighbours. 0 means the sampled g is concave.
double concavity_defect(const YGrid& grid, std::span<const double> q_slice);

/// Replaces q_slice by the values of the upper concave envelope of the points
/// (y_j, y_j q_j), divided back by y_j.
void project_concave(const YGrid& grid, std::span<double> q_slice);

}  // namespace cvarqd

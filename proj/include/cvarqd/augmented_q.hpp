#pragma once

#include "cvarqd/risk_math.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cvarqd {

/// Value table Q(s, a, y_j) over a fixed y-grid. Storage is contiguous in j so
/// that slice(s, a) is the curve y_j -> Q(s, a, y_j).
class AugmentedQ {
public:
    AugmentedQ(std::size_t n_states, std::size_t n_actions, YGrid grid, double fill = 0.0);

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    std::size_t n_levels() const { return grid_.size(); }
    const YGrid& grid() const { return grid_; }

    double& operator()(std::size_t s, std::size_t a, std::size_t j) { return data_[index(s, a, j)]; }
    double operator()(std::size_t s, std::size_t a, std::size_t j) const { return data_[index(s, a, j)]; }

    std::span<double> slice(std::size_t s, std::size_t a) { return {data_.data() + index(s, a, 0), grid_.size()}; }
    std::span<const double> slice(std::size_t s, std::size_t a) const {
        return {data_.data() + index(s, a, 0), grid_.size()};
    }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool same_shape(const AugmentedQ& other) const;
    double max_abs() const;
    bool all_finite() const;

    AugmentedQ& operator+=(double c);

    bool operator==(const AugmentedQ& other) const;

private:
    std::size_t index(std::size_t s, std::size_t a, std::size_t j) const {
        return (s * n_actions_ + a) * grid_.size() + j;
    }

    std::size_t n_states_;
    std::size_t n_actions_;
    YGrid grid_;
    std::vector<double> data_;
};

/// sup_{s,a,j} |lhs - rhs|; throws std::invalid_argument on shape mismatch.
double sup_distance(const AugmentedQ& lhs, const AugmentedQ& rhs);

/// Largest concavity_defect over all (s, a) slices.
double max_concavity_defect(const AugmentedQ& q);

/// Largest increase Q(s,a,y_{j+1}) - Q(s,a,y_j) over all cells; <= 0 means
/// every slice is nonincreasing in y.
double max_monotonicity_violation(const AugmentedQ& q);

}  // namespace cvarqd

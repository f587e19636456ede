#include "cvarqd/augmented_q.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvarqd {

AugmentedQ::AugmentedQ(std::size_t n_states, std::size_t n_actions, YGrid grid, double fill)
    : n_states_(n_states), n_actions_(n_actions), grid_(std::move(grid)),
      data_(n_states * n_actions * grid_.size(), fill) {
    if (n_states == 0 || n_actions == 0) throw std::invalid_argument("Q table needs at least one state and action");
}

bool AugmentedQ::same_shape(const AugmentedQ& other) const {
    return n_states_ == other.n_states_ && n_actions_ == other.n_actions_ && grid_ == other.grid_;
}

double AugmentedQ::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool AugmentedQ::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

AugmentedQ& AugmentedQ::operator+=(double c) {
    for (double& v : data_) v += c;
    return *this;
}

bool AugmentedQ::operator==(const AugmentedQ& other) const {
    return same_shape(other) && data_ == other.data_;
}

double sup_distance(const AugmentedQ& lhs, const AugmentedQ& rhs) {
    if (!lhs.same_shape(rhs)) throw std::invalid_argument("Q tables differ in shape");
    double d = 0.0;
    const auto a = lhs.values();
    const auto b = rhs.values();
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double max_concavity_defect(const AugmentedQ& q) {
    double defect = 0.0;
    for (std::size_t s = 0; s < q.n_states(); ++s) {
        for (std::size_t a = 0; a < q.n_actions(); ++a) {
            defect = std::max(defect, concavity_defect(q.grid(), q.slice(s, a)));
        }
    }
    return defect;
}

double max_monotonicity_violation(const AugmentedQ& q) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < q.n_states(); ++s) {
        for (std::size_t a = 0; a < q.n_actions(); ++a) {
            const auto slice = q.slice(s, a);
            for (std::size_t j = 0; j + 1 < slice.size(); ++j) worst = std::max(worst, slice[j + 1] - slice[j]);
        }
    }
    return q.n_levels() < 2 ? 0.0 : worst;
}

}  // namespace cvarqd

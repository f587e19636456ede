#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace cvarqd {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected, simple, connected communication graph over agents 0..N-1.
/// Construction validates every invariant and throws std::invalid_argument
/// on violation; the object is immutable afterwards.
class GraphTopology {
public:
    GraphTopology(std::size_t n_agents, std::vector<Edge> edges);

    std::size_t n_agents() const { return n_agents_; }
    /// Edges normalized so that first < second, sorted lexicographically.
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::size_t>& neighbors(std::size_t agent) const { return adjacency_.at(agent); }
    std::size_t degree(std::size_t agent) const { return adjacency_.at(agent).size(); }
    bool has_edge(std::size_t i, std::size_t j) const;

private:
    std::size_t n_agents_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

/// Circulant ring: each node is joined to k_nearest/2 neighbours on each side.
GraphTopology ring_topology(std::size_t n_agents, std::size_t k_nearest);

/// Parses "ring(N, k)" or an explicit edge list "0-1, 1-2, ..." (the latter
/// needs n_agents).
GraphTopology parse_topology(const std::string& text, std::size_t n_agents = 0);
std::string describe_topology(const GraphTopology& g);

Eigen::MatrixXd laplacian(const GraphTopology& g);
/// Ascending eigenvalues of the Laplacian.
Eigen::VectorXd laplacian_spectrum(const GraphTopology& g);

/// Step-size sequences alpha_k = a/(k+1)^tau1 (innovation) and
/// beta_k = b/(k+1)^tau2 (consensus).
struct WeightSchedule {
    double a = 0.2;
    double b = 0.1;
    double tau1 = 0.6;
    double tau2 = 0.05;

    double alpha(std::size_t k) const;
    double beta(std::size_t k) const;
};

struct ScheduleCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ScheduleReport {
    std::vector<ScheduleCheck> checks;
    /// Smallest eigenvalue of I - beta_0 L - alpha_0 I.
    double min_psd_eigenvalue = 0.0;

    bool all_passed() const;
    const ScheduleCheck& find(const std::string& name) const;
};

inline constexpr const char* kCheckSumBound = "a_plus_N_b";
inline constexpr const char* kCheckTau1 = "tau1_range";
inline constexpr const char* kCheckTau2 = "tau2_range";
inline constexpr const char* kCheckPsd = "psd_k0";
inline constexpr double kPsdTolerance = 1e-10;

/// Never throws on a failed condition; callers decide whether to abort.
ScheduleReport validate_schedule(const GraphTopology& g, const WeightSchedule& w);

/// Smallest eigenvalue of I - beta_k L - alpha_k I.
double consensus_matrix_min_eigenvalue(const GraphTopology& g, const WeightSchedule& w, std::size_t k);

/// Throws std::runtime_error listing the failed checks, if any.
void enforce_schedule(const ScheduleReport& report);

}  // namespace cvarqd

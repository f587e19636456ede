#include "cvarqd/comm_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace cvarqd {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

GraphTopology::GraphTopology(std::size_t n_agents, std::vector<Edge> edges)
    : n_agents_(n_agents), adjacency_(n_agents) {
    if (n_agents == 0) {
        throw std::invalid_argument("graph needs at least one agent");
    }
    for (auto& [i, j] : edges) {
        if (i >= n_agents || j >= n_agents) {
            throw std::invalid_argument("edge endpoint out of range: (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")");
        }
        if (i == j) {
            throw std::invalid_argument("self-loop at node " + std::to_string(i));
        }
        if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw std::invalid_argument("duplicate edge");
    }

    std::vector<std::size_t> parent(n_agents);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::size_t components = n_agents;
    for (const auto& [i, j] : edges) {
        adjacency_[i].push_back(j);
        adjacency_[j].push_back(i);
        const auto ri = find_root(parent, i);
        const auto rj = find_root(parent, j);
        if (ri != rj) {
            parent[ri] = rj;
            --components;
        }
    }
    if (components != 1) {
        throw std::invalid_argument("graph is not connected (" + std::to_string(components) + " components)");
    }
    for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
    edges_ = std::move(edges);
}

bool GraphTopology::has_edge(std::size_t i, std::size_t j) const {
    if (i >= n_agents_) return false;
    const auto& nb = adjacency_[i];
    return std::binary_search(nb.begin(), nb.end(), j);
}

GraphTopology ring_topology(std::size_t n_agents, std::size_t k_nearest) {
    if (n_agents < 3) throw std::invalid_argument("ring needs at least 3 agents");
    if (k_nearest == 0 || k_nearest % 2 != 0) throw std::invalid_argument("ring k_nearest must be even and positive");
    if (k_nearest >= n_agents) throw std::invalid_argument("ring k_nearest must be < n_agents");

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n_agents; ++i) {
        for (std::size_t d = 1; d <= k_nearest / 2; ++d) {
            std::size_t j = (i + d) % n_agents;
            Edge e = std::minmax(i, j);
            if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
        }
    }
    return GraphTopology(n_agents, std::move(edges));
}

GraphTopology parse_topology(const std::string& text, std::size_t n_agents) {
    static const std::regex ring_re(R"(^\s*ring\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, ring_re)) {
        return ring_topology(std::stoul(m[1]), std::stoul(m[2]));
    }
    static const std::regex edge_re(R"((\d+)\s*-\s*(\d+))");
    std::vector<Edge> edges;
    std::size_t max_node = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), edge_re); it != std::sregex_iterator(); ++it) {
        const std::size_t i = std::stoul((*it)[1]);
        const std::size_t j = std::stoul((*it)[2]);
        edges.emplace_back(i, j);
        max_node = std::max({max_node, i, j});
    }
    if (edges.empty()) throw std::invalid_argument("cannot parse topology: '" + text + "'");
    if (n_agents == 0) n_agents = max_node + 1;
    return GraphTopology(n_agents, std::move(edges));
}

std::string describe_topology(const GraphTopology& g) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [i, j] : g.edges()) {
        if (!first) os << ", ";
        os << i << '-' << j;
        first = false;
    }
    return os.str();
}

Eigen::MatrixXd laplacian(const GraphTopology& g) {
    const auto n = static_cast<Eigen::Index>(g.n_agents());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j] : g.edges()) {
        const auto a = static_cast<Eigen::Index>(i);
        const auto b = static_cast<Eigen::Index>(j);
        L(a, b) = -1.0;
        L(b, a) = -1.0;
        L(a, a) += 1.0;
        L(b, b) += 1.0;
    }
    return L;
}

Eigen::VectorXd laplacian_spectrum(const GraphTopology& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian(g), Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

double WeightSchedule::alpha(std::size_t k) const {
    return a / std::pow(static_cast<double>(k) + 1.0, tau1);
}

double WeightSchedule::beta(std::size_t k) const {
    return b / std::pow(static_cast<double>(k) + 1.0, tau2);
}

bool ScheduleReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ScheduleCheck& c) { return c.passed; });
}

const ScheduleCheck& ScheduleReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw std::out_of_range("no schedule check named " + name);
}

double consensus_matrix_min_eigenvalue(const GraphTopology& g, const WeightSchedule& w, std::size_t k) {
    const auto n = static_cast<Eigen::Index>(g.n_agents());
    const Eigen::MatrixXd M =
        Eigen::MatrixXd::Identity(n, n) * (1.0 - w.alpha(k)) - w.beta(k) * laplacian(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

ScheduleReport validate_schedule(const GraphTopology& g, const WeightSchedule& w) {
    ScheduleReport report;
    const double n = static_cast<double>(g.n_agents());

    {
        const double sum = w.a + n * w.b;
        std::ostringstream os;
        os << "a + N*b = " << w.a << " + " << n << "*" << w.b << " = " << sum << (sum <= 1.0 ? " <= 1" : " > 1");
        report.checks.push_back({kCheckSumBound, w.a > 0 && w.b > 0 && sum <= 1.0, os.str()});
    }
    {
        std::ostringstream os;
        os << "tau1 = " << w.tau1 << ", required in (0.5, 1]";
        report.checks.push_back({kCheckTau1, w.tau1 > 0.5 && w.tau1 <= 1.0, os.str()});
    }
    {
        std::ostringstream os;
        os << "tau2 = " << w.tau2 << ", required in (0, tau1 - 0.5) = (0, " << (w.tau1 - 0.5) << ")";
        report.checks.push_back({kCheckTau2, w.tau2 > 0.0 && w.tau2 < w.tau1 - 0.5, os.str()});
    }
    {
        // alpha_k and beta_k are nonincreasing, so k = 0 is the worst case.
        report.min_psd_eigenvalue = consensus_matrix_min_eigenvalue(g, w, 0);
        std::ostringstream os;
        os << "min eig(I - beta_0 L - alpha_0 I) = " << report.min_psd_eigenvalue;
        report.checks.push_back({kCheckPsd, report.min_psd_eigenvalue >= -kPsdTolerance, os.str()});
    }
    return report;
}

void enforce_schedule(const ScheduleReport& report) {
    std::string failed;
    for (const auto& c : report.checks) {
        if (!c.passed) failed += "\n  " + c.name + ": " + c.detail;
    }
    if (!failed.empty()) throw std::runtime_error("weight schedule validation failed:" + failed);
}

}  // namespace cvarqd

#include "hmmpc/topology/graph.hpp"

#include "hmmpc/error.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

namespace hmmpc::topology {

bool is_connected(const Eigen::MatrixXi& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    if (n == 0) return false;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int reached = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v = 0; v < n; ++v) {
            if (adjacency(u, v) && !seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == n;
}

Topology Topology::from_adjacency(const Eigen::MatrixXi& adjacency) {
    const Eigen::Index n = adjacency.rows();
    if (n < 1 || adjacency.cols() != n) throw DomainError("adjacency must be square and non-empty");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0) throw InvariantError("self-loop at agent " + std::to_string(i));
        for (Eigen::Index j = 0; j < n; ++j) {
            if (adjacency(i, j) != 0 && adjacency(i, j) != 1) throw InvariantError("adjacency entries must be 0 or 1");
            if (adjacency(i, j) != adjacency(j, i)) throw InvariantError("adjacency is not symmetric");
        }
    }
    if (!is_connected(adjacency)) throw InvariantError("graph is not connected");

    Topology t;
    t.adjacency_ = adjacency;
    t.neighbor_sets_.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || adjacency(i, j)) t.neighbor_sets_[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
        }
    }
    return t;
}

Topology Topology::from_edges(int n_agents, const std::vector<Edge>& edges) {
    if (n_agents < 1) throw DomainError("graph needs at least one agent");
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n_agents, n_agents);
    for (const auto& [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n_agents || j >= n_agents) {
            throw DomainError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") is out of range");
        }
        if (i == j) throw InvariantError("self-loop at agent " + std::to_string(i));
        a(i, j) = 1;
        a(j, i) = 1;
    }
    return from_adjacency(a);
}

std::vector<int> Topology::neighbors(int i) const {
    std::vector<int> out;
    for (int j : neighbor_set(i)) {
        if (j != i) out.push_back(j);
    }
    return out;
}

bool Topology::contains(int i, int j) const { return i == j || adjacency_(i, j) != 0; }

Eigen::MatrixXd Topology::laplacian() const {
    const Eigen::MatrixXd a = adjacency_.cast<double>();
    Eigen::MatrixXd l = -a;
    l.diagonal() = a.rowwise().sum();
    return l;
}

bool Topology::is_complete() const {
    for (int i = 0; i < n_agents(); ++i) {
        if (cardinality(i) != n_agents()) return false;
    }
    return true;
}

std::vector<Edge> Topology::edges() const {
    std::vector<Edge> out;
    for (int i = 0; i < n_agents(); ++i)
        for (int j = i + 1; j < n_agents(); ++j)
            if (adjacency_(i, j)) out.emplace_back(i, j);
    return out;
}

Topology complete_graph(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Topology::from_edges(n, e);
}

Topology ring_graph(int n) {
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    if (n > 2) e.emplace_back(n - 1, 0);
    return Topology::from_edges(n, e);
}

Topology path_graph(int n) {
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Topology::from_edges(n, e);
}

Topology random_connected_graph(int n, double p_extra, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        std::uniform_int_distribution<int> parent(0, k - 1);
        const int u = order[static_cast<std::size_t>(k)];
        const int v = order[static_cast<std::size_t>(parent(rng))];
        a(u, v) = a(v, u) = 1;
    }
    std::bernoulli_distribution extra(p_extra);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!a(i, j) && extra(rng)) a(i, j) = a(j, i) = 1;
    return Topology::from_adjacency(a);
}

Topology parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<Edge> edges;
    int max_index = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first)) continue;
        int i = 0, j = 0;
        std::string rest;
        std::istringstream first_field(first);
        if (!(first_field >> i) || !first_field.eof() || !(fields >> j) || (fields >> rest)) {
            throw ParseError(line_no, "expected two agent indices 'i j'");
        }
        if (i < 0 || j < 0) throw ParseError(line_no, "agent indices must be non-negative");
        if (i == j) throw ParseError(line_no, "self-loop at agent " + std::to_string(i));
        edges.emplace_back(i, j);
        max_index = std::max({max_index, i, j});
    }
    if (edges.empty()) throw ParseError(0, "graph file contains no edges");
    try {
        return Topology::from_edges(max_index + 1, edges);
    } catch (const DomainError& e) {
        throw ParseError(0, e.what());
    }
}

Topology load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open graph file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_graph(os.str());
}

std::string format_graph(const Topology& topology) {
    std::ostringstream os;
    os << "# " << topology.n_agents() << " agents\n";
    for (const auto& [i, j] : topology.edges()) os << i << ' ' << j << '\n';
    return os.str();
}

}  // namespace hmmpc::topology

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hmmpc::topology {

using Edge = std::pair<int, int>;

/// Connected undirected graph. Neighbor sets include the agent itself and
/// are sorted ascending.
class Topology {
public:
    /// Throws DomainError on self-loops, out-of-range indices or a
    /// disconnected graph.
    static Topology from_edges(int n_agents, const std::vector<Edge>& edges);
    static Topology from_adjacency(const Eigen::MatrixXi& adjacency);

    int n_agents() const { return static_cast<int>(adjacency_.rows()); }
    const Eigen::MatrixXi& adjacency() const { return adjacency_; }
    const std::vector<int>& neighbor_set(int i) const { return neighbor_sets_[static_cast<std::size_t>(i)]; }
    /// Neighbors without the agent itself.
    std::vector<int> neighbors(int i) const;
    int cardinality(int i) const { return static_cast<int>(neighbor_sets_[static_cast<std::size_t>(i)].size()); }
    bool contains(int i, int j) const;  ///< j in N_i
    bool is_link(int from, int to) const { return from != to && adjacency_(from, to) != 0; }
    Eigen::MatrixXd laplacian() const;
    bool is_complete() const;
    std::vector<Edge> edges() const;  ///< i < j, lexicographic

private:
    Eigen::MatrixXi adjacency_;
    std::vector<std::vector<int>> neighbor_sets_;
};

bool is_connected(const Eigen::MatrixXi& adjacency);

Topology complete_graph(int n);
Topology ring_graph(int n);
Topology path_graph(int n);
/// Random spanning tree plus each remaining pair with probability `p_extra`.
Topology random_connected_graph(int n, double p_extra, std::uint64_t seed);

/// Edge-list text: one "i j" pair per line, 0-based, '#' starts a comment.
/// The agent count is one more than the largest index.
Topology parse_graph(const std::string& text);
Topology load_graph(const std::filesystem::path& path);
std::string format_graph(const Topology& topology);

}  // namespace hmmpc::topology

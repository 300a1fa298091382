#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qwalk {

using Vertex = int;

struct Edge {
    Vertex u;
    Vertex v;
    double weight;
};

enum class Side { A, B };

/// Weighted simple undirected graph with an optional bipartition.
///
/// Vertices are dense ids 0..n-1. Edges keep the order they were given in;
/// that index is the stable basis ordering used by the walk construction.
/// The stored orientation u -> v of each edge is its canonical orientation.
/// Construction validates every invariant and throws InvalidInstance.
class ElectricNetwork {
  public:
    ElectricNetwork() = default;
    ElectricNetwork(int num_vertices, std::vector<Edge> edges,
                    std::optional<std::vector<Side>> sides = std::nullopt);

    int num_vertices() const { return num_vertices_; }
    std::size_t num_edges() const { return edges_.size(); }
    std::span<const Edge> edges() const { return edges_; }
    const Edge& edge(std::size_t e) const { return edges_[e]; }

    /// Edge indices incident to u, in increasing order.
    std::span<const std::size_t> incident(Vertex u) const { return incident_[u]; }
    Vertex other_end(std::size_t e, Vertex u) const {
        return edges_[e].u == u ? edges_[e].v : edges_[e].u;
    }
    double weighted_degree(Vertex u) const;
    std::optional<std::size_t> find_edge(Vertex u, Vertex v) const;

    bool has_partition() const { return sides_.has_value(); }
    Side side(Vertex u) const { return (*sides_)[u]; }
    const std::optional<std::vector<Side>>& sides() const { return sides_; }
    std::vector<Vertex> part(Side s) const;

    /// Same graph with a different (or no) bipartition; revalidated.
    ElectricNetwork with_sides(std::optional<std::vector<Side>> sides) const;

  private:
    int num_vertices_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> incident_;
    std::optional<std::vector<Side>> sides_;
};

/// Probability distribution on the vertices; sums to one within 1e-12.
class SourceDistribution {
  public:
    SourceDistribution() = default;
    explicit SourceDistribution(std::vector<double> probabilities);

    static SourceDistribution point_mass(int num_vertices, Vertex u);
    static SourceDistribution uniform(int num_vertices, std::span<const Vertex> over);

    double operator[](Vertex u) const { return p_[u]; }
    std::size_t size() const { return p_.size(); }
    std::span<const double> probabilities() const { return p_; }
    /// Vertices with nonzero probability, increasing.
    std::vector<Vertex> support() const;

  private:
    std::vector<double> p_;
};

class MarkedSet {
  public:
    MarkedSet() = default;
    MarkedSet(int num_vertices, std::span<const Vertex> marked);

    static MarkedSet none(int num_vertices) { return MarkedSet(num_vertices, {}); }

    bool contains(Vertex u) const { return mask_[u]; }
    bool empty() const { return vertices_.empty(); }
    std::size_t size() const { return vertices_.size(); }
    std::span<const Vertex> vertices() const { return vertices_; }

  private:
    std::vector<bool> mask_;
    std::vector<Vertex> vertices_;
};

struct Instance {
    ElectricNetwork graph;
    SourceDistribution sigma;
    MarkedSet marked;
};

/// Raw, unchecked description of an instance (what the JSON file holds).
struct InstanceData {
    int num_vertices = 0;
    std::vector<Edge> edges;
    std::optional<std::pair<std::vector<Vertex>, std::vector<Vertex>>> partition;
    std::vector<std::pair<Vertex, double>> sigma;
    std::vector<Vertex> marked;
};

struct Diagnostic {
    enum class Kind {
        VertexOutOfRange,
        SelfLoop,
        DuplicateEdge,
        NonPositiveWeight,
        PartitionCover,
        PartitionOverlap,
        PartitionEdge,
        SigmaNegative,
        SigmaNormalization,
        MarkedOutOfRange,
    };
    Kind kind;
    std::string message;
};

/// Every violated invariant of the graph, distribution, and marked set.
std::vector<Diagnostic> validate(const InstanceData& data);

/// Validated construction; throws InvalidInstance listing all diagnostics.
Instance make_instance(const InstanceData& data);
InstanceData to_data(const Instance& instance);

double total_weight(const ElectricNetwork& g);
SourceDistribution stationary_distribution(const ElectricNetwork& g);
/// Row-stochastic transition matrix of the weighted random walk.
Eigen::MatrixXd transition_matrix(const ElectricNetwork& g);

/// Instance prepared for the walk construction: bipartite, source support in A.
struct WalkReadyInstance {
    Instance instance;
    /// origin[v'] is the vertex of the caller's instance that v' stands for.
    std::vector<Vertex> origin;
    bool doubled = false;
};

/// Doubles G into V x {0,1}; vertex (u, b) gets id u + b*n.
WalkReadyInstance bipartite_double(const Instance& instance);

/// Uses the declared or an inferred bipartition when it puts every source in A;
/// doubles the graph otherwise.
WalkReadyInstance prepare_for_walk(const Instance& instance);

/// Same graph and distribution with no marked vertices.
Instance without_marks(const Instance& instance);

}  // namespace qwalk

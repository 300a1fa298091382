#include "qwalk/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

constexpr double kSigmaTolerance = 1e-12;

std::string pair_name(Vertex u, Vertex v) {
    std::ostringstream os;
    os << "{" << std::min(u, v) << ", " << std::max(u, v) << "}";
    return os.str();
}

std::string join(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        if (!out.empty()) out += "; ";
        out += d.message;
    }
    return out;
}

void check_graph(int n, std::span<const Edge> edges, std::vector<Diagnostic>& out) {
    std::set<std::pair<Vertex, Vertex>> seen;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& [u, v, w] = edges[e];
        if (u < 0 || u >= n || v < 0 || v >= n) {
            out.push_back({Diagnostic::Kind::VertexOutOfRange,
                           "edge " + std::to_string(e) + " endpoint out of range " + pair_name(u, v)});
            continue;
        }
        if (u == v) {
            out.push_back({Diagnostic::Kind::SelfLoop, "self-loop at vertex " + std::to_string(u)});
        }
        if (!(w > 0.0) || !std::isfinite(w)) {
            out.push_back({Diagnostic::Kind::NonPositiveWeight,
                           "edge " + pair_name(u, v) + " has non-positive weight " + std::to_string(w)});
        }
        if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
            out.push_back({Diagnostic::Kind::DuplicateEdge, "duplicate edge " + pair_name(u, v)});
        }
    }
}

void check_sides(int n, std::span<const Edge> edges, const std::vector<int>& count_a,
                 const std::vector<int>& count_b, std::vector<Diagnostic>& out) {
    for (Vertex u = 0; u < n; ++u) {
        if (count_a[u] + count_b[u] == 0) {
            out.push_back({Diagnostic::Kind::PartitionCover,
                           "vertex " + std::to_string(u) + " is in neither part"});
        } else if (count_a[u] > 0 && count_b[u] > 0) {
            out.push_back({Diagnostic::Kind::PartitionOverlap,
                           "vertex " + std::to_string(u) + " is in both parts"});
        }
    }
    for (const auto& [u, v, w] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n) continue;
        bool ua = count_a[u] > 0, va = count_a[v] > 0;
        bool ub = count_b[u] > 0, vb = count_b[v] > 0;
        if ((ua && va) || (ub && vb)) {
            out.push_back({Diagnostic::Kind::PartitionEdge,
                           "edge " + pair_name(u, v) + " lies within one part"});
        }
    }
}

}  // namespace

ElectricNetwork::ElectricNetwork(int num_vertices, std::vector<Edge> edges,
                                 std::optional<std::vector<Side>> sides)
    : num_vertices_(num_vertices), edges_(std::move(edges)), sides_(std::move(sides)) {
    if (num_vertices_ < 0) throw InvalidInstance("negative vertex count");
    std::vector<Diagnostic> diags;
    check_graph(num_vertices_, edges_, diags);
    if (sides_) {
        if (static_cast<int>(sides_->size()) != num_vertices_) {
            diags.push_back({Diagnostic::Kind::PartitionCover, "partition does not cover every vertex"});
        } else {
            std::vector<int> a(num_vertices_), b(num_vertices_);
            for (Vertex u = 0; u < num_vertices_; ++u) ((*sides_)[u] == Side::A ? a : b)[u] = 1;
            check_sides(num_vertices_, edges_, a, b, diags);
        }
    }
    if (!diags.empty()) throw InvalidInstance(join(diags));

    incident_.assign(num_vertices_, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        incident_[edges_[e].u].push_back(e);
        incident_[edges_[e].v].push_back(e);
    }
}

double ElectricNetwork::weighted_degree(Vertex u) const {
    double d = 0.0;
    for (auto e : incident_[u]) d += edges_[e].weight;
    return d;
}

std::optional<std::size_t> ElectricNetwork::find_edge(Vertex u, Vertex v) const {
    for (auto e : incident_[u]) {
        if (other_end(e, u) == v) return e;
    }
    return std::nullopt;
}

std::vector<Vertex> ElectricNetwork::part(Side s) const {
    std::vector<Vertex> out;
    if (!sides_) return out;
    for (Vertex u = 0; u < num_vertices_; ++u) {
        if ((*sides_)[u] == s) out.push_back(u);
    }
    return out;
}

ElectricNetwork ElectricNetwork::with_sides(std::optional<std::vector<Side>> sides) const {
    return ElectricNetwork(num_vertices_, edges_, std::move(sides));
}

SourceDistribution::SourceDistribution(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    double sum = 0.0;
    for (std::size_t u = 0; u < p_.size(); ++u) {
        if (!(p_[u] >= 0.0) || !std::isfinite(p_[u])) {
            throw InvalidInstance("sigma has negative entry at vertex " + std::to_string(u));
        }
        sum += p_[u];
    }
    if (std::abs(sum - 1.0) > kSigmaTolerance) {
        throw InvalidInstance("sigma sums to " + std::to_string(sum) + ", not 1");
    }
}

SourceDistribution SourceDistribution::point_mass(int num_vertices, Vertex u) {
    std::vector<double> p(num_vertices, 0.0);
    p.at(u) = 1.0;
    return SourceDistribution(std::move(p));
}

SourceDistribution SourceDistribution::uniform(int num_vertices, std::span<const Vertex> over) {
    if (over.empty()) throw InvalidInstance("uniform distribution over an empty set");
    std::vector<double> p(num_vertices, 0.0);
    for (auto u : over) p.at(u) = 1.0 / static_cast<double>(over.size());
    return SourceDistribution(std::move(p));
}

std::vector<Vertex> SourceDistribution::support() const {
    std::vector<Vertex> s;
    for (std::size_t u = 0; u < p_.size(); ++u) {
        if (p_[u] != 0.0) s.push_back(static_cast<Vertex>(u));
    }
    return s;
}

MarkedSet::MarkedSet(int num_vertices, std::span<const Vertex> marked) : mask_(num_vertices, false) {
    for (auto u : marked) {
        if (u < 0 || u >= num_vertices) {
            throw InvalidInstance("marked vertex " + std::to_string(u) + " out of range");
        }
        mask_[u] = true;
    }
    for (Vertex u = 0; u < num_vertices; ++u) {
        if (mask_[u]) vertices_.push_back(u);
    }
}

std::vector<Diagnostic> validate(const InstanceData& data) {
    std::vector<Diagnostic> out;
    const int n = data.num_vertices;
    check_graph(n, data.edges, out);

    if (data.partition) {
        std::vector<int> a(std::max(n, 0)), b(std::max(n, 0));
        auto tally = [&](const std::vector<Vertex>& part, std::vector<int>& count) {
            for (auto u : part) {
                if (u < 0 || u >= n) {
                    out.push_back({Diagnostic::Kind::VertexOutOfRange,
                                   "partition vertex " + std::to_string(u) + " out of range"});
                } else {
                    ++count[u];
                }
            }
        };
        tally(data.partition->first, a);
        tally(data.partition->second, b);
        check_sides(n, data.edges, a, b, out);
    }

    double sum = 0.0;
    for (const auto& [u, p] : data.sigma) {
        if (u < 0 || u >= n) {
            out.push_back({Diagnostic::Kind::VertexOutOfRange,
                           "sigma vertex " + std::to_string(u) + " out of range"});
        }
        if (!(p >= 0.0)) {
            out.push_back({Diagnostic::Kind::SigmaNegative,
                           "sigma is negative at vertex " + std::to_string(u)});
        }
        sum += p;
    }
    if (!(std::abs(sum - 1.0) <= kSigmaTolerance)) {
        out.push_back({Diagnostic::Kind::SigmaNormalization,
                       "sigma sums to " + std::to_string(sum) + ", not 1"});
    }

    for (auto u : data.marked) {
        if (u < 0 || u >= n) {
            out.push_back({Diagnostic::Kind::MarkedOutOfRange,
                           "marked vertex " + std::to_string(u) + " out of range"});
        }
    }
    return out;
}

Instance make_instance(const InstanceData& data) {
    auto diags = validate(data);
    if (!diags.empty()) throw InvalidInstance(join(diags));

    std::optional<std::vector<Side>> sides;
    if (data.partition) {
        sides.emplace(data.num_vertices, Side::A);
        for (auto u : data.partition->second) (*sides)[u] = Side::B;
    }
    std::vector<double> p(data.num_vertices, 0.0);
    for (const auto& [u, w] : data.sigma) p[u] += w;
    return Instance{ElectricNetwork(data.num_vertices, data.edges, std::move(sides)),
                    SourceDistribution(std::move(p)), MarkedSet(data.num_vertices, data.marked)};
}

InstanceData to_data(const Instance& instance) {
    InstanceData d;
    d.num_vertices = instance.graph.num_vertices();
    d.edges.assign(instance.graph.edges().begin(), instance.graph.edges().end());
    if (instance.graph.has_partition()) {
        d.partition.emplace(instance.graph.part(Side::A), instance.graph.part(Side::B));
    }
    for (auto u : instance.sigma.support()) d.sigma.emplace_back(u, instance.sigma[u]);
    d.marked.assign(instance.marked.vertices().begin(), instance.marked.vertices().end());
    return d;
}

double total_weight(const ElectricNetwork& g) {
    double w = 0.0;
    for (const auto& e : g.edges()) w += e.weight;
    return w;
}

SourceDistribution stationary_distribution(const ElectricNetwork& g) {
    const double w = total_weight(g);
    if (w <= 0.0) throw EmptyGraphError("stationary distribution needs positive total weight");
    std::vector<double> pi(g.num_vertices());
    for (Vertex u = 0; u < g.num_vertices(); ++u) pi[u] = g.weighted_degree(u) / (2.0 * w);
    // Renormalize away the rounding of the 2W division so the 1e-12 check holds for large graphs.
    const double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (auto& p : pi) p /= sum;
    return SourceDistribution(std::move(pi));
}

Eigen::MatrixXd transition_matrix(const ElectricNetwork& g) {
    const int n = g.num_vertices();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Vertex u = 0; u < n; ++u) {
        const double deg = g.weighted_degree(u);
        if (deg == 0.0) {
            p(u, u) = 1.0;
            continue;
        }
        for (auto e : g.incident(u)) p(u, g.other_end(e, u)) += g.edge(e).weight / deg;
    }
    return p;
}

WalkReadyInstance bipartite_double(const Instance& instance) {
    const auto& g = instance.graph;
    const int n = g.num_vertices();
    std::vector<Edge> edges;
    edges.reserve(2 * g.num_edges());
    for (const auto& [u, v, w] : g.edges()) {
        edges.push_back({u, v + n, w});
        edges.push_back({u + n, v, w});
    }
    std::vector<Side> sides(2 * n, Side::A);
    std::fill(sides.begin() + n, sides.end(), Side::B);

    std::vector<double> p(2 * n, 0.0);
    for (Vertex u = 0; u < n; ++u) p[u] = instance.sigma[u];
    std::vector<Vertex> marked;
    for (auto m : instance.marked.vertices()) {
        marked.push_back(m);
        marked.push_back(m + n);
    }
    std::vector<Vertex> origin(2 * n);
    for (Vertex u = 0; u < 2 * n; ++u) origin[u] = u % n;

    return WalkReadyInstance{Instance{ElectricNetwork(2 * n, std::move(edges), std::move(sides)),
                                      SourceDistribution(std::move(p)), MarkedSet(2 * n, marked)},
                             std::move(origin), true};
}

namespace {

// Two-colours each component, anchoring sources to A. Empty result when impossible.
std::optional<std::vector<Side>> infer_sides(const Instance& instance) {
    const auto& g = instance.graph;
    const int n = g.num_vertices();
    std::vector<int> colour(n, -1);
    auto support = instance.sigma.support();
    std::vector<Vertex> order = support;
    for (Vertex u = 0; u < n; ++u) order.push_back(u);

    for (auto root : order) {
        if (colour[root] != -1) continue;
        colour[root] = 0;
        std::queue<Vertex> q;
        q.push(root);
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto e : g.incident(u)) {
                auto v = g.other_end(e, u);
                if (colour[v] == -1) {
                    colour[v] = 1 - colour[u];
                    q.push(v);
                } else if (colour[v] == colour[u]) {
                    return std::nullopt;
                }
            }
        }
    }
    for (auto s : support) {
        if (colour[s] != 0) return std::nullopt;
    }
    std::vector<Side> sides(n);
    for (Vertex u = 0; u < n; ++u) sides[u] = colour[u] == 0 ? Side::A : Side::B;
    return sides;
}

}  // namespace

WalkReadyInstance prepare_for_walk(const Instance& instance) {
    const auto& g = instance.graph;
    std::vector<Vertex> identity(g.num_vertices());
    std::iota(identity.begin(), identity.end(), 0);
    auto support = instance.sigma.support();

    if (g.has_partition()) {
        auto all_on = [&](Side s) {
            return std::all_of(support.begin(), support.end(), [&](Vertex u) { return g.side(u) == s; });
        };
        if (all_on(Side::A)) return {instance, identity, false};
        if (all_on(Side::B)) {
            auto sides = *g.sides();
            for (auto& s : sides) s = s == Side::A ? Side::B : Side::A;
            return {Instance{g.with_sides(std::move(sides)), instance.sigma, instance.marked}, identity, false};
        }
        return bipartite_double(instance);
    }
    if (auto sides = infer_sides(instance)) {
        return {Instance{g.with_sides(std::move(sides)), instance.sigma, instance.marked}, identity, false};
    }
    return bipartite_double(instance);
}

Instance without_marks(const Instance& instance) {
    return Instance{instance.graph, instance.sigma, MarkedSet::none(instance.graph.num_vertices())};
}

}  // namespace qwalk

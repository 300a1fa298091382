#include "qwalk/electric.hpp"

#include <cmath>
#include <queue>

#include <nlohmann/json.hpp>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

// Vertices that can reach the marked set.
std::vector<bool> reaches_marked(const ElectricNetwork& g, const MarkedSet& marked) {
    std::vector<bool> seen(g.num_vertices(), false);
    std::queue<Vertex> q;
    for (auto m : marked.vertices()) {
        seen[m] = true;
        q.push(m);
    }
    while (!q.empty()) {
        auto u = q.front();
        q.pop();
        for (auto e : g.incident(u)) {
            auto v = g.other_end(e, u);
            if (!seen[v]) {
                seen[v] = true;
                q.push(v);
            }
        }
    }
    return seen;
}

// Dense indices of the unmarked vertices that take part in the linear system.
struct FreeVertices {
    std::vector<int> index;  // -1 when excluded
    std::vector<Vertex> vertices;
};

FreeVertices free_vertices(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked,
                           const char* what) {
    if (marked.empty()) throw PreconditionError(std::string(what) + " needs a nonempty marked set");
    if (static_cast<int>(sigma.size()) != g.num_vertices()) {
        throw PreconditionError(std::string(what) + ": sigma size does not match the graph");
    }
    auto reach = reaches_marked(g, marked);
    FreeVertices fv;
    fv.index.assign(g.num_vertices(), -1);
    for (Vertex u = 0; u < g.num_vertices(); ++u) {
        if (!reach[u]) {
            if (sigma[u] > 0.0) {
                throw DisconnectedSourceError("source vertex " + std::to_string(u) + " has no path to the marked set");
            }
            continue;
        }
        if (marked.contains(u)) continue;
        fv.index[u] = static_cast<int>(fv.vertices.size());
        fv.vertices.push_back(u);
    }
    return fv;
}

}  // namespace

double Flow::net_out(const ElectricNetwork& g, Vertex u) const {
    double s = 0.0;
    for (auto e : g.incident(u)) s += leaving(g, e, u);
    return s;
}

double flow_energy(const Flow& f, const ElectricNetwork& g) {
    if (f.size() != g.num_edges()) throw PreconditionError("flow is not defined on every edge");
    double energy = 0.0;
    for (std::size_t e = 0; e < g.num_edges(); ++e) energy += f[e] * f[e] / g.edge(e).weight;
    return energy;
}

double max_conservation_residual(const Flow& f, const ElectricNetwork& g, const SourceDistribution& sigma,
                                 const MarkedSet& marked) {
    double worst = 0.0;
    for (Vertex u = 0; u < g.num_vertices(); ++u) {
        if (marked.contains(u)) continue;
        worst = std::max(worst, std::abs(sigma[u] - f.net_out(g, u)));
    }
    return worst;
}

Flow electric_flow(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked) {
    auto fv = free_vertices(g, sigma, marked, "electric_flow");
    const auto m = static_cast<Eigen::Index>(fv.vertices.size());

    // Grounded Laplacian: L_UU phi = sigma_U, phi = 0 on M.
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) rhs(i) = sigma[fv.vertices[i]];
    for (const auto& [u, v, w] : g.edges()) {
        int iu = fv.index[u], iv = fv.index[v];
        if (iu >= 0) lap(iu, iu) += w;
        if (iv >= 0) lap(iv, iv) += w;
        if (iu >= 0 && iv >= 0) {
            lap(iu, iv) -= w;
            lap(iv, iu) -= w;
        }
    }
    Eigen::VectorXd phi = m > 0 ? Eigen::VectorXd(lap.ldlt().solve(rhs)) : Eigen::VectorXd();

    auto potential = [&](Vertex u) { return fv.index[u] >= 0 ? phi(fv.index[u]) : 0.0; };
    std::vector<double> p(g.num_edges());
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        p[e] = ed.weight * (potential(ed.u) - potential(ed.v));
    }
    return Flow(std::move(p));
}

double effective_resistance(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked) {
    return flow_energy(electric_flow(g, sigma, marked), g);
}

double effective_resistance(const ElectricNetwork& g, Vertex s, Vertex t) {
    std::vector<Vertex> target{t};
    return effective_resistance(g, SourceDistribution::point_mass(g.num_vertices(), s),
                                MarkedSet(g.num_vertices(), target));
}

double hitting_time(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked) {
    auto fv = free_vertices(g, sigma, marked, "hitting_time");
    const auto m = static_cast<Eigen::Index>(fv.vertices.size());

    // (I - P_UU) h = 1, with P the weighted random-walk transition matrix.
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vertex u = fv.vertices[i];
        const double deg = g.weighted_degree(u);
        for (auto e : g.incident(u)) {
            int j = fv.index[g.other_end(e, u)];
            if (j >= 0) a(i, j) -= g.edge(e).weight / deg;
        }
    }
    Eigen::VectorXd h = m > 0 ? Eigen::VectorXd(a.partialPivLu().solve(Eigen::VectorXd::Ones(m))) : Eigen::VectorXd();

    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) total += sigma[fv.vertices[i]] * h(i);
    return total;
}

double hitting_time(const ElectricNetwork& g, Vertex s, Vertex t) {
    std::vector<Vertex> target{t};
    return hitting_time(g, SourceDistribution::point_mass(g.num_vertices(), s), MarkedSet(g.num_vertices(), target));
}

double commute_time(const ElectricNetwork& g, Vertex s, Vertex t) {
    if (s == t) throw PreconditionError("commute_time needs distinct vertices");
    return hitting_time(g, s, t) + hitting_time(g, t, s);
}

nlohmann::json flow_to_json(const Flow& f, const ElectricNetwork& g) {
    auto out = nlohmann::json::array();
    for (std::size_t e = 0; e < g.num_edges(); ++e) out.push_back({g.edge(e).u, g.edge(e).v, f[e]});
    return out;
}

}  // namespace qwalk

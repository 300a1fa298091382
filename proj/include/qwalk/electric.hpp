#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qwalk/network.hpp"

namespace qwalk {

/// Edge function stored once per edge under the canonical orientation
/// edge.u -> edge.v; the reverse direction carries the negated value.
class Flow {
  public:
    Flow() = default;
    explicit Flow(std::vector<double> values) : values_(std::move(values)) {}
    static Flow zero(const ElectricNetwork& g) { return Flow(std::vector<double>(g.num_edges(), 0.0)); }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t e) const { return values_[e]; }
    std::span<const double> values() const { return values_; }

    /// Flow along edge e when leaving vertex `from`.
    double leaving(const ElectricNetwork& g, std::size_t e, Vertex from) const {
        return g.edge(e).u == from ? values_[e] : -values_[e];
    }
    /// Net flow out of u.
    double net_out(const ElectricNetwork& g, Vertex u) const;

  private:
    std::vector<double> values_;
};

constexpr double kConservationTolerance = 1e-9;

double flow_energy(const Flow& f, const ElectricNetwork& g);

/// Largest |sigma_u - net_out(u)| over unmarked vertices.
double max_conservation_residual(const Flow& f, const ElectricNetwork& g, const SourceDistribution& sigma,
                                 const MarkedSet& marked);

/// The energy-minimizing flow from sigma to the marked set, computed from
/// vertex potentials of the weighted Laplacian with every marked vertex grounded.
Flow electric_flow(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked);

double effective_resistance(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked);
inline double effective_resistance(const Instance& in) { return effective_resistance(in.graph, in.sigma, in.marked); }
double effective_resistance(const ElectricNetwork& g, Vertex s, Vertex t);

/// Expected number of random-walk steps from sigma to the marked set.
double hitting_time(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked);
double hitting_time(const ElectricNetwork& g, Vertex s, Vertex t);

/// H_{s,t} + H_{t,s}.
double commute_time(const ElectricNetwork& g, Vertex s, Vertex t);

/// [[u, v, p_uv], ...] under the canonical orientation.
nlohmann::json flow_to_json(const Flow& f, const ElectricNetwork& g);

}  // namespace qwalk

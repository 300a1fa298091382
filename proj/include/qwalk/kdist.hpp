#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/detect.hpp"
#include "qwalk/electric.hpp"
#include "qwalk/network.hpp"
#include "qwalk/walk.hpp"

namespace qwalk::kdist {

using Subset = std::uint32_t;

constexpr int kMaxLength = 24;
constexpr std::size_t kMaxGraphSize = 5000;

/// Input string x with collision arity k and level sizes r_1..r_{k-1}.
struct KDistInstance {
    std::vector<int> x;
    int k = 3;
    std::vector<int> r;

    int n() const { return static_cast<int>(x.size()); }
    /// Throws InvalidInstance: k >= 2, |r| = k-1, 1 <= r_i <= n/4, no value
    /// occurring more than k times, at most one k-collision.
    void validate() const;
    /// The indices of the unique k-collision, increasing, if x has one.
    std::optional<std::vector<int>> collision() const;
};

/// tau_i = |S_i| / i for i = 1..k, where S_i holds the j in S whose value
/// occurs exactly i times within S. Index 0 of the result is tau_1.
std::vector<int> subset_type(Subset s, const std::vector<int>& x, int k);

struct DeadEnd {
    Subset set;
    int index;
};

struct KDistGraph {
    /// levels[i] = V_i, sorted by mask.
    std::vector<std::vector<Subset>> levels;
    /// deadends[i] = Z_i for i = 1..k; deadends[0] is empty.
    std::vector<std::vector<DeadEnd>> deadends;

    ElectricNetwork network;
    /// Uniform on V_0; absent when V_0 is empty.
    std::optional<SourceDistribution> sigma;
    MarkedSet marked;

    /// Network vertex of a level subset. Level vertices come first (by level,
    /// then mask), followed by dead-ends in level order.
    std::map<Subset, Vertex> vertex_of;
    /// Level of each network vertex; dead-ends in Z_i report i.
    std::vector<int> level;
    std::vector<bool> is_deadend;

    std::size_t size() const;
    Instance instance() const;
};

/// Exhaustive construction; throws ScaleExceededError above kMaxGraphSize vertices.
KDistGraph build_kdist_graph(const KDistInstance& inst);

struct InvariantReport {
    bool degrees = true;
    bool preimages = true;
    bool level_sizes = true;
    bool marked_contain_collision = true;
    std::vector<std::string> failures;
    bool ok() const { return degrees && preimages && level_sizes && marked_contain_collision; }
};

/// Degrees (n on V \ V_k, k on V_k, 1 on dead-ends), r_i + 1 preimages in V_0
/// for every S in V_i, |V_i| <= n C(k,i) |V_0| / (r_i + 1), and V_k containing the collision.
InvariantReport check_invariants(const KDistGraph& g, const KDistInstance& inst);

/// Subsets of V_0 disjoint from the k-collision.
std::vector<Subset> disjoint_sources(const KDistGraph& g, const KDistInstance& inst);

/// Flow 1/|V_0'| along a_1, ..., a_k; throws PreconditionError on negative inputs.
Flow kdist_flow(const KDistGraph& g, const KDistInstance& inst);

/// psi_u written out directly in the level convention, on the walk space of uniform sigma on V_0.
LocalVector level_psi(const KDistGraph& g, const WalkSpace& space, Vertex u, double c1);

/// Walk parameters of the level convention: R = 1 / |V_0|.
WalkParams level_params(const KDistGraph& g, double c1, double c2);

struct PositiveWitness {
    Eigen::VectorXd phi;
    double norm_squared;      // ||phi||^2
    double expected_norm_squared; // (k + c1) / |V_0'|
    double overlap;           // <phi / ||phi||, start>
    double expected_overlap;  // sqrt(c1 |V_0'| / ((k + c1) |V_0|))
    double fixed_point_error; // ||U phi - phi|| / ||phi||
};

PositiveWitness positive_witness(const KDistGraph& g, const KDistInstance& inst, const WalkOperator& op);

struct NegativeWitness {
    double norm_squared;      // ||w||^2 = 1 + c1 |E| / |V_0|
    double kernel_a;          // ||Pi_A w|| / ||w||
    double image_b;           // ||Pi_B w - start|| / ||w||
};

NegativeWitness negative_witness(const KDistGraph& g, const WalkOperator& op);

/// Detection with R = 1/|V_0| (the level convention); the resistance bound is not verified.
std::vector<DetectionResult> kdist_detect(const KDistInstance& inst, const WalkParams& params,
                                          std::span<const DetectionModel> models);

}  // namespace qwalk::kdist

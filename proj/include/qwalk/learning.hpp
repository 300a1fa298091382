#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/detect.hpp"
#include "qwalk/network.hpp"
#include "qwalk/walk.hpp"

namespace qwalk::learning {

/// Subset of the input indices {0, ..., n-1} as a bitmask.
using Subset = std::uint32_t;
using Input = std::vector<int>;

constexpr int kMaxIndices = 24;

std::vector<int> members(Subset s);
Subset subset_of(const std::vector<int>& indices);
std::string format_subset(Subset s);

/// f : D -> {0,1} over D inside [q]^n.
///
/// Known names: "or", "and", "parity" (nonzero entries count as ones),
/// "threshold" (at least k nonzero entries), "distinctness" (some value occurs
/// at least k times). Without an explicit domain, D is all of [q]^n.
class BooleanFunction {
  public:
    BooleanFunction() = default;
    BooleanFunction(std::string name, int q, int k = 0, std::optional<std::vector<Input>> domain = std::nullopt);

    const std::string& name() const { return name_; }
    int q() const { return q_; }
    int k() const { return k_; }
    const std::optional<std::vector<Input>>& domain() const { return domain_; }

    bool operator()(const Input& x) const;
    bool in_domain(const Input& x, int n) const;
    /// True when f(z) = 1 for every z in D agreeing with x on s.
    bool is_certificate(Subset s, const Input& x, int n) const;

  private:
    std::string name_;
    int q_ = 2;
    int k_ = 0;
    std::optional<std::vector<Input>> domain_;
};

struct LearningEdge {
    Subset from;
    int index;  // the edge joins `from` and `from | (1 << index)`
    double weight;
};

class LearningGraph {
  public:
    LearningGraph(int n, std::vector<LearningEdge> edges, BooleanFunction f);

    int n() const { return n_; }
    const std::vector<LearningEdge>& edges() const { return edges_; }
    const BooleanFunction& function() const { return f_; }
    /// The empty set followed by every edge endpoint, ordered by size then mask.
    const std::vector<Subset>& vertices() const { return vertices_; }

  private:
    int n_;
    std::vector<LearningEdge> edges_;
    BooleanFunction f_;
    std::vector<Subset> vertices_;
};

/// ∅ -> {j} with unit weights for f = OR on n bits.
LearningGraph or_star_graph(int n);

struct CompiledInstance {
    Instance instance;
    /// subsets[v] is the subset behind network vertex v; vertex 0 is the empty set.
    std::vector<Subset> subsets;
    bool positive = false;
    /// Certificate subsets removed with the part of the graph unreachable from ∅.
    std::vector<Subset> pruned_marked;
};

/// Electric network of the learning graph for input x. Throws DomainError for x outside D.
CompiledInstance compile(const LearningGraph& lg, const Input& x);

/// sqrt(W * max_x R_{∅, M(x)}) over the given positive inputs.
double complexity(const LearningGraph& lg, const std::vector<Input>& positives);

struct CertifyEntry {
    Input input;
    bool positive = false;
    std::vector<DetectionResult> results;
    double resistance = 0.0;  // R_{∅,M(x)} for positives
    long long step_bound = 0; // ceil(C sqrt(W R)) with the certifying R
    long long queries = 0;    // two per walk step of the ideal model
    bool passed = false;
    std::string error;
};

struct CertifyReport {
    double resistance_bound = 0.0;
    double total_weight = 0.0;
    double complexity = 0.0;
    std::vector<CertifyEntry> entries;
    bool passed() const;
};

/// Runs detection on every compiled input with R = max positive resistance and
/// checks accept >= 2/3 on positives, <= 1/3 on negatives, and the step bound.
/// Per-input failures (including detection preconditions) are reported, not thrown.
CertifyReport certify_detection(const LearningGraph& lg, const std::vector<Input>& positives,
                                const std::vector<Input>& negatives, WalkParams params,
                                const std::vector<DetectionModel>& models = {DetectionModel::IdealThreshold,
                                                                            DetectionModel::QpeKernel});

}  // namespace qwalk::learning

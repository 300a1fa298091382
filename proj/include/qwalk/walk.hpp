#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/electric.hpp"
#include "qwalk/network.hpp"

namespace qwalk {

/// Constants of the walk. `resistance_bound` is the known upper bound R on
/// the effective resistance from sigma to any marked set that may appear.
struct WalkParams {
    double c1 = 8.0;
    double c2 = 4.0;
    double resistance_bound = 1.0;

    /// Throws PreconditionError unless c1 >= 1, c2 >= 1, R > 0.
    void validate() const;
    /// Phase-estimation constant C = c2 * sqrt(1 + c1).
    double c() const;
    /// Precision 1 / (c2 * sqrt(1 + c1 * R * W)) used by detection.
    double theta(double total_weight) const;
    /// 1 / (C * sqrt(R * W)); never larger than theta() when R * W >= 1.
    double algorithm_precision(double total_weight) const;
};

struct BasisLabel {
    enum class Kind { Vertex, Edge };
    Kind kind;
    int id;  // vertex id or edge index
    std::string str() const;
};

/// Basis {|u> : u in S} followed by {|e> : e in E}, with local spaces H_u.
class WalkSpace {
  public:
    WalkSpace() = default;
    WalkSpace(const ElectricNetwork& g, const SourceDistribution& sigma);

    Eigen::Index dim() const { return static_cast<Eigen::Index>(labels_.size()); }
    const std::vector<BasisLabel>& labels() const { return labels_; }
    /// Index of |u>, or -1 when u is not a source vertex.
    Eigen::Index vertex_index(Vertex u) const { return vertex_index_[u]; }
    Eigen::Index edge_index(std::size_t e) const { return num_sources_ + static_cast<Eigen::Index>(e); }
    Eigen::Index num_sources() const { return num_sources_; }
    /// Basis indices spanning H_u: |u> first when u in S, then incident edges.
    const std::vector<Eigen::Index>& local(Vertex u) const { return local_[u]; }

  private:
    std::vector<BasisLabel> labels_;
    std::vector<Eigen::Index> vertex_index_;
    std::vector<std::vector<Eigen::Index>> local_;
    Eigen::Index num_sources_ = 0;
};

/// Vector supported on one local space: amplitudes[i] sits at basis index indices[i].
struct LocalVector {
    std::vector<Eigen::Index> indices;
    Eigen::VectorXd amplitudes;

    Eigen::VectorXd embed(Eigen::Index dim) const;
};

/// psi_u = sqrt(sigma_u / (c1 R)) |u> + sum_{uv in E} sqrt(w_uv) |uv>.
LocalVector build_psi(const WalkSpace& space, Vertex u, const ElectricNetwork& g, const SourceDistribution& sigma,
                      const WalkParams& params);

/// Eigenphases in (-pi, pi] with orthonormal complex eigenvectors as columns.
struct Spectrum {
    Eigen::VectorXd phases;
    Eigen::MatrixXcd vectors;

    /// Squared overlaps |<v_j, state>|^2.
    Eigen::VectorXd weights(const Eigen::VectorXcd& state) const;
    /// P_theta x: projection onto eigenvectors with |phase| <= theta.
    Eigen::VectorXcd project(const Eigen::VectorXcd& x, double theta) const;
    /// V diag(e^{i phase}) V^H.
    Eigen::MatrixXcd reassemble() const;
};

/// Phase threshold below which an eigenvalue counts as exactly 1.
constexpr double kUnitPhaseThreshold = 1e-9;

/// Spectral decomposition of a real orthogonal matrix via its real Schur form.
Spectrum orthogonal_spectrum(const Eigen::MatrixXd& u);

/// R_A, R_B, U = R_B R_A, the +1 eigenspace projectors, and the spectrum of U.
/// Immutable once built.
class WalkOperator {
  public:
    const WalkSpace& space() const { return space_; }
    Eigen::Index dim() const { return space_.dim(); }
    const Eigen::MatrixXd& reflection_a() const { return reflection_a_; }
    const Eigen::MatrixXd& reflection_b() const { return reflection_b_; }
    const Eigen::MatrixXd& step() const { return step_; }
    const Eigen::MatrixXd& projector_a() const { return projector_a_; }
    const Eigen::MatrixXd& projector_b() const { return projector_b_; }
    const Spectrum& spectrum() const { return spectrum_; }

    /// The start state sum_u sqrt(sigma_u) |u>.
    const Eigen::VectorXd& start_state() const { return start_; }
    double total_weight() const { return total_weight_; }
    const WalkParams& params() const { return params_; }

    /// psi_u of an unmarked vertex; empty amplitudes for marked vertices.
    const LocalVector& psi(Vertex u) const { return psi_[u]; }
    bool is_marked(Vertex u) const { return marked_[u]; }
    Side side(Vertex u) const { return sides_[u]; }
    std::size_t num_vertices() const { return psi_.size(); }

    /// D_u restricted to the given basis indices (which must contain H_u).
    Eigen::MatrixXd local_reflection(Vertex u, const std::vector<Eigen::Index>& on) const;

    friend WalkOperator build_walk_operator(const ElectricNetwork&, const SourceDistribution&, const MarkedSet&,
                                            const WalkParams&);

  private:
    WalkSpace space_;
    Eigen::MatrixXd reflection_a_, reflection_b_, step_, projector_a_, projector_b_;
    Spectrum spectrum_;
    Eigen::VectorXd start_;
    std::vector<LocalVector> psi_;
    std::vector<bool> marked_;
    std::vector<Side> sides_;
    double total_weight_ = 0.0;
    WalkParams params_;
};

/// Needs a bipartite graph with the support of sigma inside A; see prepare_for_walk.
WalkOperator build_walk_operator(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked,
                                 const WalkParams& params);
inline WalkOperator build_walk_operator(const Instance& in, const WalkParams& params) {
    return build_walk_operator(in.graph, in.sigma, in.marked, params);
}

/// Eigenvalue-1 eigenvector sqrt(c1 R) sum sqrt(sigma_u)|u> - sum p_e/sqrt(w_e)|e>,
/// with p_e re-signed to the A -> B orientation.
Eigen::VectorXd positive_witness(const WalkSpace& space, const ElectricNetwork& g, const SourceDistribution& sigma,
                                 const MarkedSet& marked, const WalkParams& params, const Flow& f);

/// sqrt(c1 R) [sum sqrt(sigma_u/(c1 R))|u> + sum sqrt(w_e)|e>], for M empty.
Eigen::VectorXd negative_witness(const WalkSpace& space, const ElectricNetwork& g, const SourceDistribution& sigma,
                                 const WalkParams& params);

struct GapCheck {
    double lhs;    // ||P_theta Pi_B w||
    double bound;  // (theta / 2) ||w||
    bool holds() const { return lhs <= bound + 1e-9; }
};

/// Numerical check of ||P_theta Pi_B w|| <= (theta/2) ||w|| for w in ker Pi_A.
GapCheck effective_gap_check(const WalkOperator& op, const Eigen::VectorXd& w, double theta);

struct RwBound {
    double rw;           // energy(f) * W
    double l1_squared;   // (sum_e |p_e|)^2
};

/// R W >= (sum |p_e|)^2 >= 1 for R = energy(f); throws PreconditionError if violated.
RwBound check_rw_lower_bound(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked,
                             const Flow& f);

/// Soundness figures of a built operator.
struct OperatorDiagnostics {
    double unitarity;        // ||U^T U - I||
    double reflection_a;     // ||R_A^2 - I||
    double reflection_b;     // ||R_B^2 - I||
    double reassembly;       // ||V e^{i theta} V^H - U||
    double local_commutator; // max ||[D_u, D_v]|| over checked same-part pairs
};

/// Commutators are checked for all same-part pairs when a part has at most
/// `all_pairs_limit` vertices, and for pairs sharing a neighbour otherwise.
OperatorDiagnostics diagnose(const WalkOperator& op, const ElectricNetwork& g, std::size_t all_pairs_limit = 64);

/// Dense row-major text with a basis-label header line.
void write_matrix(std::ostream& os, const WalkSpace& space, const Eigen::MatrixXd& m);

}  // namespace qwalk

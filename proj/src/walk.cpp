#include "qwalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "qwalk/errors.hpp"

namespace qwalk {

void WalkParams::validate() const {
    if (!(c1 >= 1.0)) throw PreconditionError("walk constant c1 must be >= 1");
    if (!(c2 >= 1.0)) throw PreconditionError("walk constant c2 must be >= 1");
    if (!(resistance_bound > 0.0)) throw PreconditionError("resistance bound R must be positive");
}

double WalkParams::c() const { return c2 * std::sqrt(1.0 + c1); }

double WalkParams::theta(double total_weight) const {
    return 1.0 / (c2 * std::sqrt(1.0 + c1 * resistance_bound * total_weight));
}

double WalkParams::algorithm_precision(double total_weight) const {
    return 1.0 / (c() * std::sqrt(resistance_bound * total_weight));
}

std::string BasisLabel::str() const { return (kind == Kind::Vertex ? "v" : "e") + std::to_string(id); }

WalkSpace::WalkSpace(const ElectricNetwork& g, const SourceDistribution& sigma) {
    const int n = g.num_vertices();
    vertex_index_.assign(n, -1);
    local_.assign(n, {});
    for (auto u : sigma.support()) {
        vertex_index_[u] = static_cast<Eigen::Index>(labels_.size());
        labels_.push_back({BasisLabel::Kind::Vertex, u});
        local_[u].push_back(vertex_index_[u]);
    }
    num_sources_ = static_cast<Eigen::Index>(labels_.size());
    for (std::size_t e = 0; e < g.num_edges(); ++e) labels_.push_back({BasisLabel::Kind::Edge, static_cast<int>(e)});
    for (Vertex u = 0; u < n; ++u) {
        for (auto e : g.incident(u)) local_[u].push_back(edge_index(e));
    }
}

Eigen::VectorXd LocalVector::embed(Eigen::Index dim) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < indices.size(); ++i) out(indices[i]) = amplitudes(static_cast<Eigen::Index>(i));
    return out;
}

LocalVector build_psi(const WalkSpace& space, Vertex u, const ElectricNetwork& g, const SourceDistribution& sigma,
                      const WalkParams& params) {
    LocalVector psi;
    psi.indices = space.local(u);
    psi.amplitudes.resize(static_cast<Eigen::Index>(psi.indices.size()));
    Eigen::Index k = 0;
    if (space.vertex_index(u) >= 0) {
        psi.amplitudes(k++) = std::sqrt(sigma[u] / (params.c1 * params.resistance_bound));
    }
    for (auto e : g.incident(u)) psi.amplitudes(k++) = std::sqrt(g.edge(e).weight);
    return psi;
}

Eigen::VectorXd Spectrum::weights(const Eigen::VectorXcd& state) const {
    return (vectors.adjoint() * state).cwiseAbs2();
}

Eigen::VectorXcd Spectrum::project(const Eigen::VectorXcd& x, double theta) const {
    Eigen::VectorXcd coeff = vectors.adjoint() * x;
    for (Eigen::Index j = 0; j < coeff.size(); ++j) {
        if (std::abs(phases(j)) > theta) coeff(j) = 0.0;
    }
    return vectors * coeff;
}

Eigen::MatrixXcd Spectrum::reassemble() const {
    Eigen::VectorXcd eig(phases.size());
    for (Eigen::Index j = 0; j < phases.size(); ++j) eig(j) = std::polar(1.0, phases(j));
    return vectors * eig.asDiagonal() * vectors.adjoint();
}

Spectrum orthogonal_spectrum(const Eigen::MatrixXd& u) {
    using cd = std::complex<double>;
    const Eigen::Index d = u.rows();
    Spectrum s;
    s.phases.resize(d);
    s.vectors.resize(d, d);
    if (d == 0) return s;

    Eigen::RealSchur<Eigen::MatrixXd> schur(u);
    const Eigen::MatrixXd& t = schur.matrixT();
    const Eigen::MatrixXd& q = schur.matrixU();

    for (Eigen::Index i = 0; i < d;) {
        if (i + 1 < d && t(i + 1, i) != 0.0) {
            // 2x2 rotation block: eigenvalues alpha +- i beta.
            const double a = t(i, i), b = t(i, i + 1), c = t(i + 1, i), dd = t(i + 1, i + 1);
            const double alpha = 0.5 * (a + dd);
            const double disc = 0.25 * (a - dd) * (a - dd) + b * c;
            const double beta = std::sqrt(std::max(-disc, 0.0));
            const cd lambda(alpha, beta);
            cd v1, v2;
            if (std::abs(b) >= std::abs(c)) {
                v1 = b;
                v2 = lambda - a;
            } else {
                v1 = lambda - dd;
                v2 = c;
            }
            const double norm = std::sqrt(std::norm(v1) + std::norm(v2));
            v1 /= norm;
            v2 /= norm;
            Eigen::VectorXcd v = q.col(i).cast<cd>() * v1 + q.col(i + 1).cast<cd>() * v2;
            const double phase = std::atan2(beta, alpha);
            s.phases(i) = phase;
            s.vectors.col(i) = v;
            s.phases(i + 1) = -phase;
            s.vectors.col(i + 1) = v.conjugate();
            i += 2;
        } else {
            s.phases(i) = t(i, i) >= 0.0 ? 0.0 : std::numbers::pi;
            s.vectors.col(i) = q.col(i).cast<cd>();
            i += 1;
        }
    }
    return s;
}

Eigen::MatrixXd WalkOperator::local_reflection(Vertex u, const std::vector<Eigen::Index>& on) const {
    const auto m = static_cast<Eigen::Index>(on.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(m, m);
    const auto& p = psi_[u];
    if (p.amplitudes.size() == 0) return out;
    Eigen::VectorXd local = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < p.indices.size(); ++i) {
        auto it = std::find(on.begin(), on.end(), p.indices[i]);
        if (it == on.end()) throw PreconditionError("local_reflection: index set does not contain H_u");
        local(it - on.begin()) = p.amplitudes(static_cast<Eigen::Index>(i));
    }
    out -= 2.0 * local * local.transpose() / local.squaredNorm();
    return out;
}

WalkOperator build_walk_operator(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked,
                                 const WalkParams& params) {
    params.validate();
    const int n = g.num_vertices();
    if (static_cast<int>(sigma.size()) != n) throw PreconditionError("sigma size does not match the graph");
    if (!g.has_partition()) throw PreconditionError("walk construction needs a bipartite graph with parts A, B");
    for (auto u : sigma.support()) {
        if (g.side(u) != Side::A) {
            throw PreconditionError("source vertex " + std::to_string(u) + " is not in part A");
        }
    }

    WalkOperator op;
    op.space_ = WalkSpace(g, sigma);
    op.params_ = params;
    op.total_weight_ = total_weight(g);
    const Eigen::Index d = op.space_.dim();
    op.psi_.resize(n);
    op.marked_.assign(n, false);
    op.sides_ = *g.sides();

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> ta, tb;
    op.projector_a_ = Eigen::MatrixXd::Zero(d, d);
    op.projector_b_ = Eigen::MatrixXd::Zero(d, d);

    for (Vertex u = 0; u < n; ++u) {
        const auto& h = op.space_.local(u);
        auto& refl = g.side(u) == Side::A ? ta : tb;
        auto& proj = g.side(u) == Side::A ? op.projector_a_ : op.projector_b_;
        // Projector onto H_u; on the B side the source-vertex states are excluded from H_u.
        std::vector<Eigen::Index> span;
        for (auto i : h) {
            if (g.side(u) == Side::A || i >= op.space_.num_sources()) span.push_back(i);
        }
        for (auto i : span) proj(i, i) += 1.0;

        if (marked.contains(u)) {
            op.marked_[u] = true;
            op.psi_[u].indices = span;
            for (auto i : span) refl.emplace_back(i, i, 1.0);
            continue;
        }
        op.psi_[u] = build_psi(op.space_, u, g, sigma, params);
        const auto& psi = op.psi_[u];
        const double norm2 = psi.amplitudes.squaredNorm();
        for (std::size_t a = 0; a < psi.indices.size(); ++a) {
            refl.emplace_back(psi.indices[a], psi.indices[a], 1.0);
            for (std::size_t b = 0; b < psi.indices.size(); ++b) {
                const double outer = psi.amplitudes(static_cast<Eigen::Index>(a)) *
                                     psi.amplitudes(static_cast<Eigen::Index>(b)) / norm2;
                refl.emplace_back(psi.indices[a], psi.indices[b], -2.0 * outer);
                proj(psi.indices[a], psi.indices[b]) -= outer;
            }
        }
    }
    // R_B acts as the identity on the source-vertex states.
    for (Eigen::Index i = 0; i < op.space_.num_sources(); ++i) {
        tb.emplace_back(i, i, 1.0);
        op.projector_b_(i, i) += 1.0;
    }

    Eigen::SparseMatrix<double> ra(d, d), rb(d, d);
    ra.setFromTriplets(ta.begin(), ta.end());
    rb.setFromTriplets(tb.begin(), tb.end());
    op.reflection_a_ = Eigen::MatrixXd(ra);
    op.reflection_b_ = Eigen::MatrixXd(rb);
    op.step_ = Eigen::MatrixXd(rb * ra);
    op.spectrum_ = orthogonal_spectrum(op.step_);

    op.start_ = Eigen::VectorXd::Zero(d);
    for (auto u : sigma.support()) op.start_(op.space_.vertex_index(u)) = std::sqrt(sigma[u]);
    return op;
}

namespace {

// Sign turning the canonical orientation of edge e into the A -> B orientation.
double a_to_b_sign(const ElectricNetwork& g, std::size_t e) { return g.side(g.edge(e).u) == Side::A ? 1.0 : -1.0; }

}  // namespace

Eigen::VectorXd positive_witness(const WalkSpace& space, const ElectricNetwork& g, const SourceDistribution& sigma,
                                 const MarkedSet& marked, const WalkParams& params, const Flow& f) {
    if (marked.empty()) throw PreconditionError("positive witness needs a nonempty marked set");
    if (!g.has_partition()) throw PreconditionError("positive witness needs a bipartite graph");
    for (auto u : sigma.support()) {
        if (marked.contains(u)) {
            throw PreconditionError("positive witness needs the source support disjoint from the marked set");
        }
    }
    if (f.size() != g.num_edges()) throw InvalidFlowError("flow is not defined on every edge");
    const double residual = max_conservation_residual(f, g, sigma, marked);
    if (residual > kConservationTolerance) {
        throw InvalidFlowError("flow violates conservation by " + std::to_string(residual));
    }

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(space.dim());
    const double scale = std::sqrt(params.c1 * params.resistance_bound);
    for (auto u : sigma.support()) phi(space.vertex_index(u)) = scale * std::sqrt(sigma[u]);
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        phi(space.edge_index(e)) = -a_to_b_sign(g, e) * f[e] / std::sqrt(g.edge(e).weight);
    }
    return phi;
}

Eigen::VectorXd negative_witness(const WalkSpace& space, const ElectricNetwork& g, const SourceDistribution& sigma,
                                 const WalkParams& params) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(space.dim());
    const double cr = params.c1 * params.resistance_bound;
    const double scale = std::sqrt(cr);
    for (auto u : sigma.support()) w(space.vertex_index(u)) = scale * std::sqrt(sigma[u] / cr);
    for (std::size_t e = 0; e < g.num_edges(); ++e) w(space.edge_index(e)) = scale * std::sqrt(g.edge(e).weight);
    return w;
}

GapCheck effective_gap_check(const WalkOperator& op, const Eigen::VectorXd& w, double theta) {
    const double norm = w.norm();
    if ((op.projector_a() * w).norm() > 1e-9 * std::max(1.0, norm)) {
        throw PreconditionError("effective_gap_check needs w in the kernel of Pi_A");
    }
    Eigen::VectorXcd pb = (op.projector_b() * w).cast<std::complex<double>>();
    return GapCheck{op.spectrum().project(pb, theta).norm(), 0.5 * theta * norm};
}

RwBound check_rw_lower_bound(const ElectricNetwork& g, const SourceDistribution& sigma, const MarkedSet& marked,
                             const Flow& f) {
    if (marked.empty()) throw PreconditionError("R W bound needs a nonempty marked set");
    for (auto u : sigma.support()) {
        if (marked.contains(u)) throw PreconditionError("R W bound needs the source support disjoint from M");
    }
    const double residual = max_conservation_residual(f, g, sigma, marked);
    if (residual > kConservationTolerance) {
        throw PreconditionError("R W bound needs a valid flow (residual " + std::to_string(residual) + ")");
    }
    double l1 = 0.0;
    for (auto p : f.values()) l1 += std::abs(p);
    RwBound out{flow_energy(f, g) * total_weight(g), l1 * l1};
    constexpr double slack = 1e-12;
    if (out.rw < out.l1_squared * (1.0 - slack) || out.l1_squared < 1.0 - slack) {
        throw PreconditionError("R W >= (sum |p_e|)^2 >= 1 violated");
    }
    return out;
}

OperatorDiagnostics diagnose(const WalkOperator& op, const ElectricNetwork& g, std::size_t all_pairs_limit) {
    // Frobenius norms bound the operator norm from above.
    const Eigen::Index d = op.dim();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    OperatorDiagnostics out{};
    out.unitarity = (op.step().transpose() * op.step() - id).norm();
    out.reflection_a = (op.reflection_a() * op.reflection_a() - id).norm();
    out.reflection_b = (op.reflection_b() * op.reflection_b() - id).norm();
    out.reassembly = (op.spectrum().reassemble() - op.step().cast<std::complex<double>>()).norm();

    const auto n = static_cast<Vertex>(op.num_vertices());
    std::set<std::pair<Vertex, Vertex>> pairs;
    for (auto side : {Side::A, Side::B}) {
        auto members = g.part(side);
        if (members.size() <= all_pairs_limit) {
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) pairs.insert({members[i], members[j]});
            }
        }
    }
    for (Vertex w = 0; w < n; ++w) {
        const auto inc = g.incident(w);
        for (std::size_t i = 0; i < inc.size(); ++i) {
            for (std::size_t j = i + 1; j < inc.size(); ++j) {
                Vertex a = g.other_end(inc[i], w), b = g.other_end(inc[j], w);
                pairs.insert({std::min(a, b), std::max(a, b)});
            }
        }
    }
    for (const auto& [a, b] : pairs) {
        std::vector<Eigen::Index> on = op.space().local(a);
        for (auto i : op.space().local(b)) {
            if (std::find(on.begin(), on.end(), i) == on.end()) on.push_back(i);
        }
        // Restrict to the indices each reflection acts on in its own part.
        auto keep = [&](Vertex u, Eigen::Index i) {
            return op.side(u) == Side::A || i >= op.space().num_sources();
        };
        std::vector<Eigen::Index> restricted;
        for (auto i : on) {
            if (keep(a, i) || keep(b, i)) restricted.push_back(i);
        }
        Eigen::MatrixXd da = op.local_reflection(a, restricted);
        Eigen::MatrixXd db = op.local_reflection(b, restricted);
        out.local_commutator = std::max(out.local_commutator, (da * db - db * da).norm());
    }
    return out;
}

void write_matrix(std::ostream& os, const WalkSpace& space, const Eigen::MatrixXd& m) {
    os << "#";
    for (const auto& l : space.labels()) os << ' ' << l.str();
    os << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            os << (j ? " " : "") << buf;
        }
        os << '\n';
    }
}

}  // namespace qwalk

#include "qwalk/kdist.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "qwalk/errors.hpp"

namespace qwalk::kdist {

namespace {

std::map<int, int> value_counts(const std::vector<int>& x) {
    std::map<int, int> c;
    for (int v : x) ++c[v];
    return c;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

/// Target type of level i: (r_1, ..., r_{k-1}, 0) with component i incremented.
std::vector<int> level_type(const KDistInstance& inst, int i) {
    std::vector<int> t(inst.r.begin(), inst.r.end());
    t.push_back(0);
    if (i > 0) ++t[i - 1];
    return t;
}

int type_size(const std::vector<int>& t) {
    int s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) s += static_cast<int>(i + 1) * t[i];
    return s;
}

}  // namespace

void KDistInstance::validate() const {
    const int len = n();
    if (len < 1 || len > kMaxLength) throw InvalidInstance("k-distinctness input length must be in [1, 24]");
    if (k < 2) throw InvalidInstance("collision arity k must be at least 2");
    if (static_cast<int>(r.size()) != k - 1) {
        throw InvalidInstance("expected " + std::to_string(k - 1) + " level sizes, got " + std::to_string(r.size()));
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < 1 || 4 * r[i] > len) {
            throw InvalidInstance("level size r_" + std::to_string(i + 1) + " = " + std::to_string(r[i]) +
                                  " must lie in [1, n/4]");
        }
    }
    int collisions = 0;
    for (const auto& [value, count] : value_counts(x)) {
        if (count > k) {
            throw InvalidInstance("value " + std::to_string(value) + " occurs " + std::to_string(count) +
                                  " times; more than one k-collision");
        }
        if (count == k) ++collisions;
    }
    if (collisions > 1) throw InvalidInstance("input has " + std::to_string(collisions) + " k-collisions");
}

std::optional<std::vector<int>> KDistInstance::collision() const {
    for (const auto& [value, count] : value_counts(x)) {
        if (count != k) continue;
        std::vector<int> out;
        for (int j = 0; j < n(); ++j) {
            if (x[j] == value) out.push_back(j);
        }
        return out;
    }
    return std::nullopt;
}

std::vector<int> subset_type(Subset s, const std::vector<int>& x, int k) {
    std::map<int, int> within;
    for (int j = 0; j < static_cast<int>(x.size()); ++j) {
        if (s >> j & 1u) ++within[x[j]];
    }
    std::vector<int> tau(k, 0);
    for (const auto& [value, m] : within) {
        if (m > k) throw PreconditionError("subset holds more than k equal values");
        ++tau[m - 1];  // one group of size m contributes m elements to S_m, i.e. 1 to tau_m
    }
    return tau;
}

std::size_t KDistGraph::size() const { return level.size(); }

Instance KDistGraph::instance() const {
    if (!sigma) throw PreconditionError("V_0 is empty; there is no start distribution");
    return Instance{network, *sigma, marked};
}

KDistGraph build_kdist_graph(const KDistInstance& inst) {
    inst.validate();
    const int n = inst.n();
    const int k = inst.k;

    KDistGraph g;
    g.levels.assign(k + 1, {});
    g.deadends.assign(k + 1, {});

    std::vector<std::vector<int>> types;
    for (int i = 0; i <= k; ++i) types.push_back(level_type(inst, i));
    std::map<Subset, int> level_of;
    for (Subset s = 0; s < (Subset{1} << n); ++s) {
        const int pop = std::popcount(s);
        for (int i = 0; i <= k; ++i) {
            if (pop != type_size(types[i])) continue;
            if (subset_type(s, inst.x, k) == types[i]) {
                g.levels[i].push_back(s);
                level_of[s] = i;
                break;
            }
        }
    }

    std::size_t count = level_of.size();
    for (int i = 1; i <= k; ++i) {
        for (Subset s : g.levels[i - 1]) {
            for (int j = 0; j < n; ++j) {
                if (!level_of.count(s ^ (Subset{1} << j))) g.deadends[i].push_back({s, j});
            }
        }
        count += g.deadends[i].size();
        if (count > kMaxGraphSize) {
            throw ScaleExceededError("k-distinctness graph exceeds " + std::to_string(kMaxGraphSize) + " vertices",
                                     count);
        }
    }

    std::vector<Side> sides;
    for (int i = 0; i <= k; ++i) {
        for (Subset s : g.levels[i]) {
            g.vertex_of[s] = static_cast<Vertex>(g.level.size());
            g.level.push_back(i);
            g.is_deadend.push_back(false);
            sides.push_back(i % 2 == 0 ? Side::A : Side::B);
        }
    }
    std::vector<Edge> edges;
    for (int i = 1; i <= k; ++i) {
        for (const auto& d : g.deadends[i]) {
            const auto v = static_cast<Vertex>(g.level.size());
            g.level.push_back(i);
            g.is_deadend.push_back(true);
            sides.push_back(i % 2 == 0 ? Side::A : Side::B);
            edges.push_back({g.vertex_of.at(d.set), v, 1.0});
        }
    }
    // Level edges join adjacent levels; add each once from its lower end.
    for (int i = 0; i < k; ++i) {
        for (Subset s : g.levels[i]) {
            for (int j = 0; j < n; ++j) {
                const Subset t = s ^ (Subset{1} << j);
                auto it = level_of.find(t);
                if (it != level_of.end() && it->second == i + 1) {
                    edges.push_back({g.vertex_of.at(s), g.vertex_of.at(t), 1.0});
                }
            }
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::pair(a.u, a.v) < std::pair(b.u, b.v);
    });

    const int total = static_cast<int>(g.level.size());
    g.network = ElectricNetwork(total, std::move(edges), std::move(sides));
    std::vector<Vertex> v0, vk;
    for (Subset s : g.levels[0]) v0.push_back(g.vertex_of.at(s));
    for (Subset s : g.levels[k]) vk.push_back(g.vertex_of.at(s));
    if (!v0.empty()) g.sigma = SourceDistribution::uniform(total, v0);
    g.marked = MarkedSet(total, vk);
    return g;
}

InvariantReport check_invariants(const KDistGraph& g, const KDistInstance& inst) {
    InvariantReport rep;
    const int n = inst.n();
    const int k = inst.k;
    auto fail = [&](bool& flag, std::string what) {
        flag = false;
        rep.failures.push_back(std::move(what));
    };

    for (Vertex u = 0; u < g.network.num_vertices(); ++u) {
        const auto deg = static_cast<int>(g.network.incident(u).size());
        const int expect = g.is_deadend[u] ? 1 : (g.level[u] == k ? k : n);
        if (deg != expect) {
            fail(rep.degrees, "vertex " + std::to_string(u) + " has degree " + std::to_string(deg) + ", expected " +
                                  std::to_string(expect));
        }
    }

    std::map<Subset, bool> in_v0;
    for (Subset s : g.levels[0]) in_v0[s] = true;
    for (int i = 1; i <= k; ++i) {
        const int expect = (i < k ? inst.r[i - 1] : 0) + 1;
        for (Subset s : g.levels[i]) {
            // Preimages: S \ X in V_0 for X a set of i equal elements of S.
            std::map<int, std::vector<int>> groups;
            for (int j = 0; j < n; ++j) {
                if (s >> j & 1u) groups[inst.x[j]].push_back(j);
            }
            int pre = 0;
            for (const auto& [value, idx] : groups) {
                if (static_cast<int>(idx.size()) < i) continue;
                const auto m = static_cast<int>(idx.size());
                for (Subset pick = 0; pick < (Subset{1} << m); ++pick) {
                    if (std::popcount(pick) != i) continue;
                    Subset x = 0;
                    for (int b = 0; b < m; ++b) {
                        if (pick >> b & 1u) x |= Subset{1} << idx[b];
                    }
                    if (in_v0.count(s & ~x)) ++pre;
                }
            }
            if (pre != expect) {
                fail(rep.preimages, "subset in V_" + std::to_string(i) + " has " + std::to_string(pre) +
                                        " preimages, expected " + std::to_string(expect));
            }
        }
        if (i < k) {
            const double bound = n * binomial(k, i) * static_cast<double>(g.levels[0].size()) / (inst.r[i - 1] + 1);
            if (static_cast<double>(g.levels[i].size()) > bound) {
                fail(rep.level_sizes, "|V_" + std::to_string(i) + "| = " + std::to_string(g.levels[i].size()) +
                                          " exceeds " + std::to_string(bound));
            }
        }
    }

    const auto col = inst.collision();
    Subset cmask = 0;
    if (col) {
        for (int j : *col) cmask |= Subset{1} << j;
    }
    for (Subset s : g.levels[k]) {
        if (!col || (s & cmask) != cmask) fail(rep.marked_contain_collision, "a V_k subset misses the k-collision");
    }
    return rep;
}

std::vector<Subset> disjoint_sources(const KDistGraph& g, const KDistInstance& inst) {
    const auto col = inst.collision();
    Subset cmask = 0;
    if (col) {
        for (int j : *col) cmask |= Subset{1} << j;
    }
    std::vector<Subset> out;
    for (Subset s : g.levels[0]) {
        if ((s & cmask) == 0) out.push_back(s);
    }
    return out;
}

Flow kdist_flow(const KDistGraph& g, const KDistInstance& inst) {
    const auto col = inst.collision();
    if (!col) throw PreconditionError("input has no k-collision; there is no flow to V_k");
    const auto sources = disjoint_sources(g, inst);
    if (sources.empty()) throw PreconditionError("no subset of V_0 is disjoint from the k-collision");
    const double unit = 1.0 / static_cast<double>(sources.size());

    std::vector<double> p(g.network.num_edges(), 0.0);
    Subset prefix = 0;
    Subset cmask = 0;
    for (int j : *col) cmask |= Subset{1} << j;
    for (int i = 0; i < inst.k; ++i) {
        const Subset next = Subset{1} << (*col)[i];
        for (Subset s : g.levels[i]) {
            if ((s & cmask) != prefix) continue;
            const Vertex from = g.vertex_of.at(s);
            const auto e = g.network.find_edge(from, g.vertex_of.at(s | next));
            if (!e) throw Error("missing level edge on the flow path");
            p[*e] = g.network.edge(*e).u == from ? unit : -unit;
        }
        prefix |= next;
    }
    return Flow(std::move(p));
}

LocalVector level_psi(const KDistGraph& g, const WalkSpace& space, Vertex u, double c1) {
    LocalVector psi;
    psi.indices = space.local(u);
    psi.amplitudes = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(psi.indices.size()));
    if (!g.is_deadend[u] && g.level[u] == 0) psi.amplitudes(0) = 1.0 / std::sqrt(c1);
    return psi;
}

WalkParams level_params(const KDistGraph& g, double c1, double c2) {
    if (g.levels[0].empty()) throw PreconditionError("V_0 is empty");
    return WalkParams{c1, c2, 1.0 / static_cast<double>(g.levels[0].size())};
}

PositiveWitness positive_witness(const KDistGraph& g, const KDistInstance& inst, const WalkOperator& op) {
    const auto sources = disjoint_sources(g, inst);
    std::vector<Vertex> ids;
    for (Subset s : sources) ids.push_back(g.vertex_of.at(s));
    const auto total = g.network.num_vertices();
    const auto sigma_prime = SourceDistribution::uniform(total, ids);
    const auto f = kdist_flow(g, inst);

    WalkParams wp = op.params();
    wp.resistance_bound = 1.0 / static_cast<double>(sources.size());
    PositiveWitness out;
    out.phi = qwalk::positive_witness(op.space(), g.network, sigma_prime, g.marked, wp, f);
    out.norm_squared = out.phi.squaredNorm();
    const double c1 = wp.c1;
    const double v0 = static_cast<double>(g.levels[0].size());
    const double v0p = static_cast<double>(sources.size());
    out.expected_norm_squared = (inst.k + c1) / v0p;
    out.overlap = out.phi.dot(op.start_state()) / out.phi.norm();
    out.expected_overlap = std::sqrt(c1 * v0p / ((inst.k + c1) * v0));
    out.fixed_point_error = (op.step() * out.phi - out.phi).norm() / out.phi.norm();
    return out;
}

NegativeWitness negative_witness(const KDistGraph& g, const WalkOperator& op) {
    const auto w = qwalk::negative_witness(op.space(), g.network, *g.sigma, op.params());
    NegativeWitness out;
    out.norm_squared = w.squaredNorm();
    out.kernel_a = (op.projector_a() * w).norm() / w.norm();
    out.image_b = (op.projector_b() * w - op.start_state()).norm() / w.norm();
    return out;
}

std::vector<DetectionResult> kdist_detect(const KDistInstance& inst, const WalkParams& params,
                                          std::span<const DetectionModel> models) {
    const auto g = build_kdist_graph(inst);
    const auto wp = level_params(g, params.c1, params.c2);
    return detect(g.instance(), wp, models, DetectOptions{false});
}

}  // namespace qwalk::kdist

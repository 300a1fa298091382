#include "qwalk/learning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <queue>

#include "qwalk/electric.hpp"
#include "qwalk/errors.hpp"

namespace qwalk::learning {

std::vector<int> members(Subset s) {
    std::vector<int> out;
    for (int i = 0; s != 0; ++i, s >>= 1) {
        if (s & 1u) out.push_back(i);
    }
    return out;
}

Subset subset_of(const std::vector<int>& indices) {
    Subset s = 0;
    for (int i : indices) {
        if (i < 0 || i >= kMaxIndices) throw InvalidInstance("subset index " + std::to_string(i) + " out of range");
        s |= Subset{1} << i;
    }
    return s;
}

std::string format_subset(Subset s) {
    std::string out = "{";
    bool first = true;
    for (int i : members(s)) {
        if (!first) out += ",";
        out += std::to_string(i);
        first = false;
    }
    return out + "}";
}

BooleanFunction::BooleanFunction(std::string name, int q, int k, std::optional<std::vector<Input>> domain)
    : name_(std::move(name)), q_(q), k_(k), domain_(std::move(domain)) {
    static const char* known[] = {"or", "and", "parity", "threshold", "distinctness"};
    if (std::find(std::begin(known), std::end(known), name_) == std::end(known)) {
        throw InvalidInstance("unknown function '" + name_ + "'");
    }
    if (q_ < 2) throw InvalidInstance("alphabet size q must be at least 2");
    if ((name_ == "threshold" || name_ == "distinctness") && k_ < 1) {
        throw InvalidInstance(name_ + " needs a positive parameter k");
    }
    if (domain_) {
        for (const auto& x : *domain_) {
            for (int v : x) {
                if (v < 0 || v >= q_) throw InvalidInstance("domain entry outside [q]");
            }
        }
    }
}

bool BooleanFunction::operator()(const Input& x) const {
    const auto ones = std::count_if(x.begin(), x.end(), [](int v) { return v != 0; });
    if (name_ == "or") return ones > 0;
    if (name_ == "and") return ones == static_cast<long>(x.size());
    if (name_ == "parity") return ones % 2 == 1;
    if (name_ == "threshold") return ones >= k_;
    std::map<int, int> count;
    for (int v : x) {
        if (++count[v] >= k_) return true;
    }
    return false;
}

bool BooleanFunction::in_domain(const Input& x, int n) const {
    if (static_cast<int>(x.size()) != n) return false;
    if (domain_) return std::find(domain_->begin(), domain_->end(), x) != domain_->end();
    return std::all_of(x.begin(), x.end(), [&](int v) { return v >= 0 && v < q_; });
}

bool BooleanFunction::is_certificate(Subset s, const Input& x, int n) const {
    if (domain_) {
        for (const auto& z : *domain_) {
            bool agrees = true;
            for (int i : members(s)) agrees = agrees && z[i] == x[i];
            if (agrees && !(*this)(z)) return false;
        }
        return true;
    }
    // Odometer over the free coordinates of [q]^n.
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
        if (!(s >> i & 1u)) free.push_back(i);
    }
    Input z = x;
    for (int i : free) z[i] = 0;
    while (true) {
        if (!(*this)(z)) return false;
        std::size_t pos = 0;
        while (pos < free.size() && ++z[free[pos]] == q_) z[free[pos++]] = 0;
        if (pos == free.size()) return true;
    }
}

LearningGraph::LearningGraph(int n, std::vector<LearningEdge> edges, BooleanFunction f)
    : n_(n), edges_(std::move(edges)), f_(std::move(f)) {
    if (n_ < 1 || n_ > kMaxIndices) throw InvalidInstance("learning graph needs 1 <= n <= 24");
    std::vector<Subset> v{0};
    for (const auto& e : edges_) {
        if (e.index < 0 || e.index >= n_) throw InvalidInstance("edge index " + std::to_string(e.index) + " outside [n]");
        if (e.from >> n_) throw InvalidInstance("edge source " + format_subset(e.from) + " outside [n]");
        if (e.from >> e.index & 1u) {
            throw InvalidInstance("edge from " + format_subset(e.from) + " adds index " + std::to_string(e.index) +
                                  " it already contains");
        }
        if (!(e.weight > 0.0)) throw InvalidInstance("learning graph weights must be positive");
        v.push_back(e.from);
        v.push_back(e.from | Subset{1} << e.index);
    }
    std::sort(v.begin(), v.end(), [](Subset a, Subset b) {
        const int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    v.erase(std::unique(v.begin(), v.end()), v.end());
    vertices_ = std::move(v);
}

LearningGraph or_star_graph(int n) {
    std::vector<LearningEdge> edges;
    for (int j = 0; j < n; ++j) edges.push_back({0, j, 1.0});
    return LearningGraph(n, std::move(edges), BooleanFunction("or", 2));
}

CompiledInstance compile(const LearningGraph& lg, const Input& x) {
    const auto& f = lg.function();
    if (!f.in_domain(x, lg.n())) throw DomainError("input is outside the domain of " + f.name());

    const auto& all = lg.vertices();
    std::map<Subset, int> index;
    for (std::size_t i = 0; i < all.size(); ++i) index[all[i]] = static_cast<int>(i);
    std::vector<std::vector<int>> adjacent(all.size());
    for (const auto& e : lg.edges()) {
        const int a = index[e.from], b = index[e.from | Subset{1} << e.index];
        adjacent[a].push_back(b);
        adjacent[b].push_back(a);
    }
    std::vector<bool> reached(all.size(), false);
    std::queue<int> frontier;
    reached[0] = true;
    frontier.push(0);
    while (!frontier.empty()) {
        const int a = frontier.front();
        frontier.pop();
        for (int b : adjacent[a]) {
            if (!reached[b]) {
                reached[b] = true;
                frontier.push(b);
            }
        }
    }

    CompiledInstance out;
    out.positive = f(x);
    std::map<Subset, int> vertex;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (reached[i]) {
            vertex[all[i]] = static_cast<int>(out.subsets.size());
            out.subsets.push_back(all[i]);
        } else if (out.positive && f.is_certificate(all[i], x, lg.n())) {
            out.pruned_marked.push_back(all[i]);
        }
    }
    const int n = static_cast<int>(out.subsets.size());
    std::vector<Edge> edges;
    for (const auto& e : lg.edges()) {
        auto it = vertex.find(e.from);
        if (it == vertex.end()) continue;
        edges.push_back({it->second, vertex.at(e.from | Subset{1} << e.index), e.weight});
    }
    std::vector<Side> sides(n);
    std::vector<Vertex> marked;
    for (int v = 0; v < n; ++v) {
        sides[v] = std::popcount(out.subsets[v]) % 2 == 0 ? Side::A : Side::B;
        if (out.positive && f.is_certificate(out.subsets[v], x, lg.n())) marked.push_back(v);
    }
    out.instance = Instance{ElectricNetwork(n, std::move(edges), std::move(sides)), SourceDistribution::point_mass(n, 0),
                            MarkedSet(n, marked)};
    return out;
}

namespace {

double positive_resistance(const CompiledInstance& c) {
    if (c.instance.marked.empty()) {
        std::string what = "no 1-certificate is reachable from the empty set";
        if (!c.pruned_marked.empty()) what += " (certificate " + format_subset(c.pruned_marked.front()) + " is disconnected)";
        throw DisconnectedSourceError(what);
    }
    return effective_resistance(c.instance);
}

}  // namespace

double complexity(const LearningGraph& lg, const std::vector<Input>& positives) {
    double r = -1.0;
    double w = 0.0;
    for (const auto& x : positives) {
        auto c = compile(lg, x);
        if (!c.positive) throw PreconditionError("complexity was given an input with f(x) = 0");
        r = std::max(r, positive_resistance(c));
        w = total_weight(c.instance.graph);
    }
    if (r < 0.0) throw PreconditionError("complexity needs at least one positive input");
    return std::sqrt(w * r);
}

bool CertifyReport::passed() const {
    return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

CertifyReport certify_detection(const LearningGraph& lg, const std::vector<Input>& positives,
                                const std::vector<Input>& negatives, WalkParams params,
                                const std::vector<DetectionModel>& models) {
    if (positives.empty()) throw PreconditionError("certification needs at least one positive input");
    CertifyReport report;
    std::vector<std::optional<CompiledInstance>> compiled;
    auto add = [&](const Input& x, bool positive) {
        CertifyEntry e;
        e.input = x;
        e.positive = positive;
        try {
            auto c = compile(lg, x);
            if (c.positive != positive) {
                throw PreconditionError(std::string("input listed as ") + (positive ? "positive" : "negative") +
                                        " has f(x) = " + (c.positive ? "1" : "0"));
            }
            report.total_weight = total_weight(c.instance.graph);
            if (positive) {
                e.resistance = positive_resistance(c);
                report.resistance_bound = std::max(report.resistance_bound, e.resistance);
            }
            compiled.emplace_back(std::move(c));
        } catch (const Error& err) {
            e.error = err.what();
            compiled.emplace_back(std::nullopt);
        }
        report.entries.push_back(std::move(e));
    };
    for (const auto& x : positives) add(x, true);
    for (const auto& x : negatives) add(x, false);

    if (report.resistance_bound > 0.0) {
        params.resistance_bound = report.resistance_bound;
        report.complexity = std::sqrt(report.total_weight * report.resistance_bound);
    }
    const long long bound = static_cast<long long>(std::ceil(params.c() * report.complexity));

    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        auto& e = report.entries[i];
        if (!compiled[i]) continue;
        if (report.resistance_bound <= 0.0) {
            e.error = "no positive input yields a resistance bound";
            continue;
        }
        try {
            e.results = detect(compiled[i]->instance, params, models);
        } catch (const Error& err) {
            e.error = err.what();
            continue;
        }
        e.step_bound = bound;
        e.passed = true;
        for (const auto& r : e.results) {
            e.passed = e.passed && (e.positive ? r.total_accept_prob >= 2.0 / 3.0 : r.total_accept_prob <= 1.0 / 3.0);
            if (r.model == DetectionModel::IdealThreshold) {
                e.queries = 2 * r.steps;
                e.passed = e.passed && r.steps <= bound;
            }
        }
    }
    return report;
}

}  // namespace qwalk::learning

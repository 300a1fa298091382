// Acceptance report: one PASS/FAIL line per criterion at pinned tolerances.
//
// Usage: acceptance [--expect-fail N]...
// Exit status counts failing criteria that were not listed with --expect-fail.
// The same lines go to acceptance-artifacts/report.txt under the working directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/detect.hpp"
#include "qwalk/electric.hpp"
#include "qwalk/experiment.hpp"
#include "qwalk/io.hpp"
#include "qwalk/kdist.hpp"
#include "qwalk/learning.hpp"
#include "qwalk/walk.hpp"

using namespace qwalk;
namespace ex = qwalk::experiment;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ex::SuiteOutcome& suite() {
    static const ex::SuiteOutcome outcome = [] {
        auto cfg = ex::ExperimentConfig::acceptance_suite();
        cfg.out = "acceptance-artifacts/suite";
        std::ostringstream sink;
        return ex::run_suite(cfg, sink);
    }();
    return outcome;
}

Verdict identities() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = ex::identity_sweep(50, 50, 20240601);
    const double t = seconds_since(t0);
    double worst_a = 0.0, worst_b = 0.0;
    int largest = 0;
    for (const auto& r : rows) {
        worst_a = std::max(worst_a, r.commute_error);
        worst_b = std::max(worst_b, r.hitting_error);
        largest = std::max(largest, r.n);
    }
    return {worst_a <= 1e-9 && worst_b <= 1e-9 && t < 30.0,
            "50 graphs, n <= " + std::to_string(largest) + ", max rel err commute " + num(worst_a) + ", average hitting " +
                num(worst_b) + " (<= 1e-9), " + num(t) + " s (< 30 s)"};
}

Verdict operator_soundness() {
    double u = 0.0, refl = 0.0, comm = 0.0;
    int built = 0;
    auto take = [&](const OperatorDiagnostics& d) {
        u = std::max(u, d.unitarity);
        refl = std::max({refl, d.reflection_a, d.reflection_b});
        comm = std::max(comm, d.local_commutator);
        ++built;
    };
    for (const auto& c : suite().cases) {
        if (c.diagnostics) take(*c.diagnostics);
    }
    for (const auto& x : std::vector<std::vector<int>>{{1, 1, 2, 2, 3}, {1, 1, 1, 2, 2, 3}, {1, 1, 2, 2, 3, 3, 4}}) {
        kdist::KDistInstance inst{x, 3, {1, 1}};
        const auto g = kdist::build_kdist_graph(inst);
        const auto op = build_walk_operator(g.instance(), kdist::level_params(g, 8.0, 4.0));
        take(diagnose(op, g.network));
    }
    return {u <= 1e-10 && refl <= 1e-10 && comm <= 1e-12,
            std::to_string(built) + " operators, ||U^T U - I|| " + num(u) + ", ||R^2 - I|| " + num(refl) +
                " (<= 1e-10), max commutator " + num(comm) + " (<= 1e-12)"};
}

Verdict positive_witness_check() {
    const double bound = std::sqrt(8.0 / 9.0) - 1e-12;
    int count = 0;
    double fixed = 0.0, overlap = 1.0;
    bool ok = true;
    for (const auto& c : suite().cases) {
        if (!c.fixed_point_error) continue;
        ++count;
        fixed = std::max(fixed, *c.fixed_point_error);
        overlap = std::min(overlap, *c.overlap);
        ok = ok && *c.fixed_point_error <= 1e-9 && *c.overlap >= bound;
    }
    return {ok && count >= 20, std::to_string(count) + " positive instances (>= 20), max ||U phi - phi||/||phi|| " +
                                   num(fixed) + " (<= 1e-9), min overlap " + num(overlap) + " (>= " + num(bound) + ")"};
}

Verdict negative_witness_check() {
    int count = 0;
    double ka = 0.0, ib = 0.0, ne = 0.0;
    for (const auto& c : suite().cases) {
        if (!c.kernel_a) continue;
        ++count;
        ka = std::max(ka, *c.kernel_a);
        ib = std::max(ib, *c.image_b);
        ne = std::max(ne, *c.norm_error);
    }
    return {count >= 20 && ka <= 1e-9 && ib <= 1e-9 && ne <= 1e-9,
            std::to_string(count) + " negative instances (>= 20), ||Pi_A w|| " + num(ka) + ", ||Pi_B w - start|| " +
                num(ib) + ", ||w||^2 rel err " + num(ne) + " (all <= 1e-9)"};
}

Verdict gap_bound() {
    int count = 0;
    double margin = -1e300;
    for (const auto& c : suite().cases) {
        if (!c.gap_margin) continue;
        ++count;
        margin = std::max(margin, *c.gap_margin);
    }
    return {count > 0 && margin <= 1e-9, std::to_string(count) + " instances x 20 theta values, max (lhs - bound) " +
                                             num(margin) + " (<= 1e-9)"};
}

Verdict separation() {
    int pos = 0, neg = 0;
    double min_pos = 1.0, max_neg = 0.0;
    long long worst_ideal = 0, worst_kernel = 0;
    bool steps_ok = true;
    for (const auto& c : suite().cases) {
        (c.generated.spec.positive ? pos : neg)++;
        for (const auto& r : c.results) {
            if (c.generated.spec.positive) {
                min_pos = std::min(min_pos, r.total_accept_prob);
            } else {
                max_neg = std::max(max_neg, r.total_accept_prob);
            }
            if (r.steps == 0) continue;
            const auto bound = static_cast<long long>(std::ceil(12.0 * std::sqrt(c.resistance * r.walk_total_weight)));
            if (r.model == DetectionModel::IdealThreshold) {
                worst_ideal = std::max(worst_ideal, r.steps - bound);
                steps_ok = steps_ok && r.steps <= bound;
            } else {
                worst_kernel = std::max(worst_kernel, r.steps - 2 * bound);
                steps_ok = steps_ok && r.steps <= 2 * bound;
            }
        }
    }
    const bool ok = pos + neg >= 30 && min_pos >= 2.0 / 3.0 && max_neg <= 1.0 / 3.0 && steps_ok;
    return {ok, std::to_string(pos) + " positive / " + std::to_string(neg) + " negative, both models: min positive " +
                    num(min_pos) + " (>= 2/3), max negative " + num(max_neg) +
                    " (<= 1/3); ideal steps - ceil(12 sqrt(RW)) max " + std::to_string(worst_ideal) +
                    " (<= 0), kernel 2^t - 2 ceil(12 sqrt(RW)) max " + std::to_string(worst_kernel) + " (<= 0)"};
}

Verdict rw_bound() {
    int count = 0;
    double min_rw = 1e300;
    for (const auto& c : suite().cases) {
        if (!c.rw) continue;
        ++count;
        min_rw = std::min(min_rw, *c.rw);
    }
    ElectricNetwork edge(2, {{0, 1, 1.0}}, std::vector<Side>{Side::A, Side::B});
    const auto sigma = SourceDistribution::point_mass(2, 0);
    const MarkedSet m(2, std::vector<Vertex>{1});
    const auto tight = check_rw_lower_bound(edge, sigma, m, electric_flow(edge, sigma, m));
    return {count > 0 && min_rw >= 1.0 - 1e-12 && std::abs(tight.rw - 1.0) <= 1e-12,
            std::to_string(count) + " instances, min RW " + num(min_rw) + " (>= 1); single unit edge RW = " +
                num(tight.rw)};
}

Verdict scaling() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = ex::scaling_study({2, 4, 8, 16, 32}, 8.0, 4.0);
    const double t = seconds_since(t0);
    std::string pts;
    for (const auto& p : res.points) pts += " L=" + std::to_string(p.length) + ":" + num(1.0 / p.delta_max);
    return {res.slope >= 0.85 && res.slope <= 1.15 && t < 120.0,
            "slope " + num(res.slope) + " (in [0.85, 1.15]), 1/delta_max" + pts + ", " + num(t) + " s (< 120 s)"};
}

Verdict learning_graphs() {
    bool ok = true;
    std::string detail;
    for (int n : {2, 4, 9, 16}) {
        const auto lg = learning::or_star_graph(n);
        std::vector<learning::Input> pos;
        for (int i = 0; i < n; ++i) {
            learning::Input x(n, 0);
            x[i] = 1;
            pos.push_back(x);
        }
        const double cx = learning::complexity(lg, pos);
        const double err = std::abs(cx - std::sqrt(static_cast<double>(n)));
        const auto report = learning::certify_detection(lg, pos, {learning::Input(n, 0)}, WalkParams{});
        ok = ok && err <= 1e-12 && report.passed();
        detail += " n=" + std::to_string(n) + ": |c - sqrt n| " + num(err) + (report.passed() ? " certified" : " NOT certified") +
                  ";";
    }
    return {ok, "OR star" + detail};
}

Verdict three_distinctness() {
    const std::vector<std::vector<int>> inputs = {
        {1, 2, 3, 4, 5},          {1, 1, 2, 2, 3},          {1, 1, 1, 2, 3, 4},
        {1, 1, 1, 2, 2, 3},       {1, 1, 2, 2, 3, 4},       {1, 1, 1, 2, 2, 3, 3},
        {1, 1, 2, 2, 3, 3, 4},    {1, 1, 1, 2, 2, 3, 3, 4}, {1, 1, 2, 2, 3, 3, 4, 5},
        {1, 1, 1, 2, 2, 3, 3, 4, 4}, {1, 1, 2, 2, 3, 3, 4, 4, 5},
    };
    bool invariants = true, flows = true, norms = true, pos_ok = true, neg_ok = true;
    double residual = 0.0, norm_err = 0.0;
    std::string acc;
    const DetectionModel models[] = {DetectionModel::IdealThreshold, DetectionModel::QpeKernel};
    for (const auto& x : inputs) {
        kdist::KDistInstance inst{x, 3, {1, 1}};
        const auto g = kdist::build_kdist_graph(inst);
        const auto inv = kdist::check_invariants(g, inst);
        invariants = invariants && inv.degrees && inv.preimages && inv.level_sizes;
        if (!g.sigma) continue;
        const bool positive = inst.collision().has_value();
        const auto sources = kdist::disjoint_sources(g, inst);
        if (positive && sources.empty()) continue;  // V_0' empty: no flow, no V_k

        const auto results = kdist::kdist_detect(inst, WalkParams{}, models);
        double worst = positive ? 1.0 : 0.0;
        for (const auto& r : results) {
            worst = positive ? std::min(worst, r.total_accept_prob) : std::max(worst, r.total_accept_prob);
        }
        (positive ? pos_ok : neg_ok) = (positive ? pos_ok : neg_ok) && (positive ? worst >= 2.0 / 3.0 : worst <= 1.0 / 3.0);
        acc += " n=" + std::to_string(inst.n()) + (positive ? "+" : "-") + ":" + num(worst);

        if (positive) {
            const auto f = kdist::kdist_flow(g, inst);
            std::vector<Vertex> v;
            for (auto s : sources) v.push_back(g.vertex_of.at(s));
            const auto sp = SourceDistribution::uniform(g.network.num_vertices(), v);
            residual = std::max(residual, max_conservation_residual(f, g.network, sp, g.marked));
            const auto op = build_walk_operator(g.instance(), kdist::level_params(g, 8.0, 4.0));
            const auto pw = kdist::positive_witness(g, inst, op);
            norm_err = std::max(norm_err, std::abs(pw.norm_squared - pw.expected_norm_squared));
        }
    }
    flows = residual <= 1e-12;
    norms = norm_err <= 1e-12;
    return {invariants && flows && norms && pos_ok && neg_ok,
            std::string("invariants ") + (invariants ? "hold" : "FAIL") + ", flow residual " + num(residual) +
                " (<= 1e-12), ||phi||^2 err " + num(norm_err) + " (<= 1e-12), worst accept per instance" + acc +
                " (positives >= 2/3, negatives <= 1/3)"};
}

Verdict collapse() {
    int count = 0;
    double worst = 0.0;
    for (const auto& c : suite().cases) {
        if (!c.collapse_ratio) continue;
        ++count;
        worst = std::max(worst, *c.collapse_ratio);
    }
    for (int variant = 0; variant < 60; ++variant) {
        ex::InstanceSpec spec;
        spec.family = ex::Family::RandomWeighted;
        spec.size = 5 + variant % 8;
        spec.variant = 100 + variant;
        const auto g = ex::generate(spec, 7);
        const auto m = measure_support_marked(g.instance.sigma, g.instance.marked);
        if (!(m.p_marked > 0.0 && m.p_marked < 2.0 / 3.0)) continue;
        ++count;
        worst = std::max(worst, collapse_resistance_check(g.instance));
    }
    return {count > 0 && worst <= 9.0, std::to_string(count) + " instances with 0 < p_marked < 2/3, max R'/R " +
                                           num(worst) + " (<= 9)"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> expected;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::strcmp(argv[i], "--expect-fail") == 0) expected.insert(std::atoi(argv[++i]));
    }
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"commute and average hitting time identities", identities},
        {"walk operator soundness", operator_soundness},
        {"positive witness", positive_witness_check},
        {"negative witness", negative_witness_check},
        {"effective spectral gap bound", gap_bound},
        {"detection separation and step count", separation},
        {"R W >= 1", rw_bound},
        {"step scaling on paths", scaling},
        {"OR learning graphs", learning_graphs},
        {"3-distinctness", three_distinctness},
        {"collapse resistance", collapse},
    };
    int unexpected = 0;
    std::ostringstream report;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        std::ostringstream line;
        line << "criterion " << (id < 10 ? " " : "") << id << ": " << (v.pass ? "PASS" : "FAIL") << "  "
             << criteria[i].first << " | " << v.detail;
        if (!v.pass && expected.count(id)) line << " [known failure]";
        std::cout << line.str() << std::endl;
        report << line.str() << "\n";
        if (!v.pass && !expected.count(id)) ++unexpected;
    }
    io::write_text("acceptance-artifacts/report.txt", report.str());
    return unexpected;
}

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qwalk/detect.hpp"
#include "qwalk/electric.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/experiment.hpp"
#include "qwalk/io.hpp"
#include "qwalk/kdist.hpp"
#include "qwalk/learning.hpp"
#include "qwalk/walk.hpp"

using nlohmann::json;
using namespace qwalk;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string model = "both";
    std::optional<double> c1, c2;
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config file");
    app->add_option("--seed", c.seed, "random seed");
    app->add_option("--model", c.model, "ideal | kernel | both")->check(CLI::IsMember({"ideal", "kernel", "both"}));
    app->add_option("--c1", c.c1, "walk constant C1");
    app->add_option("--c2", c.c2, "walk constant C2");
    app->add_option("--out", c.out, "output file or directory");
}

std::vector<DetectionModel> models_of(const Common& c) {
    if (c.model == "both") return {DetectionModel::IdealThreshold, DetectionModel::QpeKernel};
    return {parse_model(c.model)};
}

WalkParams params_of(const Common& c) {
    WalkParams p;
    if (c.c1) p.c1 = *c.c1;
    if (c.c2) p.c2 = *c.c2;
    p.validate();
    return p;
}

void emit(const Common& c, const json& j) {
    if (c.out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        io::write_json(c.out, j);
    }
}

std::vector<int> parse_list(const std::string& s) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto next = s.find(',', pos);
        out.push_back(std::stoi(s.substr(pos, next - pos)));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

int cmd_generate(const Common& c, const std::string& family, int size, int width, int variant, bool negative,
                 const std::string& x, int k, const std::string& r) {
    experiment::InstanceSpec spec;
    spec.family = experiment::parse_family(family);
    spec.size = size;
    spec.width = width;
    spec.variant = variant;
    spec.positive = !negative;
    if (!x.empty()) spec.x = parse_list(x);
    spec.k = k;
    if (!r.empty()) spec.r = parse_list(r);
    const auto g = experiment::generate(spec, c.seed.value_or(1));
    auto j = io::instance_to_json(g.instance);
    emit(c, j);
    std::cerr << g.id << (g.doubled ? " (doubled)" : "") << "\n";
    return 0;
}

int cmd_detect(const Common& c, const std::string& file, std::optional<double> resistance, const std::string& dump) {
    const auto in = io::instance_from_json(io::read_json(file));
    auto params = params_of(c);
    if (resistance) {
        params.resistance_bound = *resistance;
    } else if (!in.marked.empty()) {
        const auto m = measure_support_marked(in.sigma, in.marked);
        params.resistance_bound =
            m.collapsed ? effective_resistance(in.graph, *m.collapsed, in.marked) : effective_resistance(in);
        if (!(params.resistance_bound > 0.0)) params.resistance_bound = 1.0;
    } else {
        throw PreconditionError("instance has no marked vertices; pass --resistance with the bound R");
    }
    const auto models = models_of(c);
    json results = json::array();
    for (const auto& r : detect(in, params, models)) results.push_back(to_json(r));
    if (!dump.empty()) {
        const auto m = measure_support_marked(in.sigma, in.marked);
        if (m.collapsed) {
            const auto ready = prepare_for_walk(Instance{in.graph, *m.collapsed, in.marked});
            const auto op = build_walk_operator(ready.instance, params);
            std::ofstream os(dump);
            if (!os) throw IoError("cannot write " + dump);
            write_matrix(os, op.space(), op.step());
        }
    }
    emit(c, {{"instance", file}, {"c1", params.c1}, {"c2", params.c2}, {"results", results}});
    return 0;
}

int cmd_electric(const Common& c, const std::string& file) {
    const auto in = io::instance_from_json(io::read_json(file));
    json j = {{"vertices", in.graph.num_vertices()}, {"edges", in.graph.num_edges()},
              {"total_weight", total_weight(in.graph)}};
    if (total_weight(in.graph) > 0.0) j["stationary"] = stationary_distribution(in.graph).probabilities();
    if (!in.marked.empty()) {
        const auto f = electric_flow(in.graph, in.sigma, in.marked);
        j["resistance"] = flow_energy(f, in.graph);
        j["hitting_time"] = hitting_time(in.graph, in.sigma, in.marked);
        j["conservation_residual"] = max_conservation_residual(f, in.graph, in.sigma, in.marked);
        j["flow"] = flow_to_json(f, in.graph);
    }
    emit(c, j);
    return 0;
}

std::vector<learning::Input> enumerate_domain(const learning::LearningGraph& lg) {
    const auto& f = lg.function();
    if (f.domain()) return *f.domain();
    const double size = std::pow(f.q(), lg.n());
    if (size > 4096) throw PreconditionError("domain has more than 4096 inputs; list them with --positive/--negative");
    std::vector<learning::Input> out;
    learning::Input x(lg.n(), 0);
    while (true) {
        out.push_back(x);
        int pos = 0;
        while (pos < lg.n() && ++x[pos] == f.q()) x[pos++] = 0;
        if (pos == lg.n()) return out;
    }
}

int cmd_learning(const Common& c, const std::string& file, const std::vector<std::string>& pos,
                 const std::vector<std::string>& neg) {
    const auto lg = io::learning_graph_from_json(io::read_json(file));
    std::vector<learning::Input> positives, negatives;
    for (const auto& s : pos) positives.push_back(parse_list(s));
    for (const auto& s : neg) negatives.push_back(parse_list(s));
    if (positives.empty() && negatives.empty()) {
        for (auto& x : enumerate_domain(lg)) (lg.function()(x) ? positives : negatives).push_back(std::move(x));
    }
    const auto report = learning::certify_detection(lg, positives, negatives, params_of(c), models_of(c));
    json entries = json::array();
    for (const auto& e : report.entries) {
        json results = json::array();
        for (const auto& r : e.results) results.push_back(to_json(r));
        json j = {{"input", e.input}, {"positive", e.positive}, {"passed", e.passed}, {"results", results},
                  {"step_bound", e.step_bound}, {"queries", e.queries}};
        if (e.positive) j["resistance"] = e.resistance;
        if (!e.error.empty()) j["error"] = e.error;
        entries.push_back(j);
    }
    emit(c, {{"resistance_bound", report.resistance_bound},
             {"total_weight", report.total_weight},
             {"complexity", report.complexity},
             {"passed", report.passed()},
             {"entries", entries}});
    return report.passed() ? 0 : 1;
}

int cmd_kdist(const Common& c, const std::string& file) {
    const auto inst = io::kdist_instance_from_json(io::read_json(file));
    const auto g = kdist::build_kdist_graph(inst);
    const auto inv = kdist::check_invariants(g, inst);
    json levels = json::array(), deadends = json::array();
    for (const auto& l : g.levels) levels.push_back(l.size());
    for (const auto& z : g.deadends) deadends.push_back(z.size());
    json j = {{"n", inst.n()},
              {"k", inst.k},
              {"positive", inst.collision().has_value()},
              {"levels", levels},
              {"deadends", deadends},
              {"vertices", g.network.num_vertices()},
              {"edges", g.network.num_edges()},
              {"invariants", {{"ok", inv.ok()}, {"failures", inv.failures}}}};
    if (g.sigma) {
        const auto params = params_of(c);
        const auto models = models_of(c);
        json results = json::array();
        for (const auto& r : kdist::kdist_detect(inst, params, models)) results.push_back(to_json(r));
        j["results"] = results;
        const auto op = build_walk_operator(g.instance(), kdist::level_params(g, params.c1, params.c2));
        if (inst.collision() && !kdist::disjoint_sources(g, inst).empty()) {
            const auto f = kdist::kdist_flow(g, inst);
            const auto pw = kdist::positive_witness(g, inst, op);
            j["flow_residual"] = max_conservation_residual(
                f, g.network,
                SourceDistribution::uniform(g.network.num_vertices(), [&] {
                    std::vector<Vertex> v;
                    for (auto s : kdist::disjoint_sources(g, inst)) v.push_back(g.vertex_of.at(s));
                    return v;
                }()),
                g.marked);
            j["phi_norm_squared"] = pw.norm_squared;
            j["phi_norm_squared_expected"] = pw.expected_norm_squared;
            j["overlap"] = pw.overlap;
            j["overlap_expected"] = pw.expected_overlap;
        } else if (!inst.collision()) {
            j["w_norm_squared"] = kdist::negative_witness(g, op).norm_squared;
        }
    }
    emit(c, j);
    return inv.ok() ? 0 : 1;
}

int cmd_suite(const Common& c, const std::string& kind, int threads) {
    experiment::ExperimentConfig cfg;
    if (!c.config.empty()) {
        cfg = experiment::config_from_json(io::read_json(c.config));
    } else if (kind == "scaling") {
        cfg = experiment::ExperimentConfig::scaling_study();
    } else if (kind == "identities") {
        cfg = experiment::ExperimentConfig::identities_suite();
    } else {
        cfg = experiment::ExperimentConfig::acceptance_suite();
    }
    if (c.seed) cfg.seed = *c.seed;
    if (c.c1) cfg.c1 = *c.c1;
    if (c.c2) cfg.c2 = *c.c2;
    if (c.model != "both") cfg.models = models_of(c);
    if (!c.out.empty()) cfg.out = c.out;
    if (threads > 0) cfg.threads = threads;
    const auto outcome = experiment::run_suite(cfg, std::cerr);
    std::cout << outcome.summary.dump() << "\n"
              << (outcome.passed() ? "PASS" : "FAIL") << " " << cfg.kind << " -> " << cfg.out.string() << "\n";
    return outcome.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum walk search on electric networks"};
    app.require_subcommand(1);
    Common common;

    std::string family = "path", x, r;
    int size = 4, width = 0, variant = 0, k = 3;
    bool negative = false;
    auto* gen = app.add_subcommand("generate", "write a family instance as JSON");
    add_common(gen, common);
    gen->add_option("--family", family, "path | cycle | grid | star | complete | random-weighted | learning-or | kdist");
    gen->add_option("--size", size, "main size parameter");
    gen->add_option("--width", width, "grid columns");
    gen->add_option("--variant", variant, "random-weighted draw index");
    gen->add_flag("--negative", negative, "leave the marked set empty");
    gen->add_option("--x", x, "kdist input, comma separated");
    gen->add_option("--k", k, "kdist collision arity");
    gen->add_option("--r", r, "kdist level sizes, comma separated");

    std::string file, dump;
    std::optional<double> resistance;
    auto* det = app.add_subcommand("detect", "simulate detection on an instance file");
    add_common(det, common);
    det->add_option("instance", file, "instance JSON")->required();
    det->add_option("--resistance", resistance, "resistance bound R (default: R of the collapsed distribution)");
    det->add_option("--dump-matrix", dump, "write U as text");

    auto* ele = app.add_subcommand("electric", "electric flow, resistance, and hitting time");
    add_common(ele, common);
    ele->add_option("instance", file, "instance JSON")->required();

    std::vector<std::string> pos, neg;
    auto* lrn = app.add_subcommand("learning", "compile and certify a learning graph");
    add_common(lrn, common);
    lrn->add_option("graph", file, "learning graph JSON")->required();
    lrn->add_option("--positive", pos, "positive input, comma separated (repeatable)");
    lrn->add_option("--negative", neg, "negative input, comma separated (repeatable)");

    auto* kd = app.add_subcommand("kdist", "build and run the k-distinctness walk");
    add_common(kd, common);
    kd->add_option("instance", file, "k-distinctness JSON")->required();

    std::string kind = "detect";
    int threads = 0;
    auto* suite = app.add_subcommand("suite", "run a sweep and write CSV/JSON artifacts");
    add_common(suite, common);
    suite->add_option("--kind", kind, "detect | scaling | identities (without --config)")
        ->check(CLI::IsMember({"detect", "scaling", "identities"}));
    suite->add_option("--threads", threads, "worker threads");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return cmd_generate(common, family, size, width, variant, negative, x, k, r);
        if (*det) return cmd_detect(common, file, resistance, dump);
        if (*ele) return cmd_electric(common, file);
        if (*lrn) return cmd_learning(common, file, pos, neg);
        if (*kd) return cmd_kdist(common, file);
        if (*suite) return cmd_suite(common, kind, threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

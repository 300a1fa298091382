#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "qwalk/detect.hpp"
#include "qwalk/electric.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/experiment.hpp"
#include "qwalk/io.hpp"
#include "qwalk/kdist.hpp"
#include "qwalk/learning.hpp"
#include "qwalk/walk.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace qwalk;

namespace {

Instance parse_instance(const std::string& text) { return io::instance_from_json(json::parse(text)); }

std::vector<DetectionModel> parse_models(const std::vector<std::string>& names) {
    std::vector<DetectionModel> out;
    for (const auto& n : names) out.push_back(parse_model(n));
    return out;
}

std::string results_json(const std::vector<DetectionResult>& results) {
    json out = json::array();
    for (const auto& r : results) out.push_back(to_json(r));
    return out.dump();
}

double default_resistance(const Instance& in) {
    if (in.marked.empty()) throw PreconditionError("instance has no marked vertices; pass the resistance bound R");
    const auto m = measure_support_marked(in.sigma, in.marked);
    const double r = m.collapsed ? effective_resistance(in.graph, *m.collapsed, in.marked) : effective_resistance(in);
    return r > 0.0 ? r : 1.0;
}

WalkParams make_params(double c1, double c2, double r) {
    WalkParams p{c1, c2, r};
    p.validate();
    return p;
}

}  // namespace

PYBIND11_MODULE(_qwalk, m) {
    m.doc() = "Electric-network quantum walk search: native core.";

    auto base = py::register_exception<Error>(m, "QwalkError", PyExc_RuntimeError);
    py::register_exception<InvalidInstance>(m, "InvalidInstance", base);
    py::register_exception<PreconditionError>(m, "PreconditionError", base);
    py::register_exception<EmptyGraphError>(m, "EmptyGraphError", base);
    py::register_exception<DisconnectedSourceError>(m, "DisconnectedSourceError", base);
    py::register_exception<InvalidFlowError>(m, "InvalidFlowError", base);
    py::register_exception<UnnormalizedStateError>(m, "UnnormalizedStateError", base);
    py::register_exception<DomainError>(m, "DomainError", base);
    py::register_exception<ScaleExceededError>(m, "ScaleExceededError", base);
    py::register_exception<IoError>(m, "IoError", base);

    m.def("validate_instance", [](const std::string& text) { parse_instance(text); });

    m.def("electric", [](const std::string& text) {
        const auto in = parse_instance(text);
        json j = {{"total_weight", total_weight(in.graph)}};
        if (!in.marked.empty()) {
            const auto f = electric_flow(in.graph, in.sigma, in.marked);
            j["resistance"] = flow_energy(f, in.graph);
            j["hitting_time"] = hitting_time(in.graph, in.sigma, in.marked);
            j["flow"] = flow_to_json(f, in.graph);
        }
        return j.dump();
    });

    m.def("commute_time", [](const std::string& text, int u, int v) {
        return commute_time(parse_instance(text).graph, u, v);
    });

    m.def(
        "detect",
        [](const std::string& text, std::optional<double> resistance, double c1, double c2,
           const std::vector<std::string>& models) {
            const auto in = parse_instance(text);
            const auto params = make_params(c1, c2, resistance ? *resistance : default_resistance(in));
            return results_json(detect(in, params, parse_models(models)));
        },
        py::arg("instance"), py::arg("resistance") = py::none(), py::arg("c1") = 8.0, py::arg("c2") = 4.0,
        py::arg("models") = std::vector<std::string>{"ideal-threshold", "qpe-kernel"});

    m.def(
        "walk_operator",
        [](const std::string& text, double resistance, double c1, double c2) {
            const auto ready = prepare_for_walk(parse_instance(text));
            const auto op = build_walk_operator(ready.instance, make_params(c1, c2, resistance));
            std::vector<std::string> labels;
            for (const auto& l : op.space().labels()) labels.push_back(l.str());
            return py::make_tuple(Eigen::MatrixXd(op.step()), Eigen::VectorXd(op.start_state()), labels);
        },
        py::arg("instance"), py::arg("resistance"), py::arg("c1") = 8.0, py::arg("c2") = 4.0);

    m.def(
        "generate",
        [](const std::string& family, int size, int width, bool positive, int variant, std::vector<int> x, int k,
           std::vector<int> r, std::uint64_t seed) {
            experiment::InstanceSpec spec;
            spec.family = experiment::parse_family(family);
            spec.size = size;
            spec.width = width;
            spec.positive = positive;
            spec.variant = variant;
            spec.x = std::move(x);
            spec.k = k;
            spec.r = std::move(r);
            const auto g = experiment::generate(spec, seed);
            return py::make_tuple(g.id, io::instance_to_json(g.instance).dump(), g.doubled);
        },
        py::arg("family"), py::arg("size") = 4, py::arg("width") = 0, py::arg("positive") = true,
        py::arg("variant") = 0, py::arg("x") = std::vector<int>{}, py::arg("k") = 3,
        py::arg("r") = std::vector<int>{}, py::arg("seed") = 1);

    m.def(
        "kdist",
        [](const std::vector<int>& x, int k, const std::vector<int>& r, double c1, double c2,
           const std::vector<std::string>& models) {
            kdist::KDistInstance inst{x, k, r};
            inst.validate();
            const auto g = kdist::build_kdist_graph(inst);
            const auto inv = kdist::check_invariants(g, inst);
            json levels = json::array();
            for (const auto& l : g.levels) levels.push_back(l.size());
            json j = {{"levels", levels}, {"vertices", g.size()}, {"invariants", inv.ok()},
                      {"failures", inv.failures}};
            if (g.sigma) {
                const auto ms = parse_models(models);
                j["results"] = json::parse(results_json(kdist::kdist_detect(inst, make_params(c1, c2, 1.0), ms)));
            }
            return j.dump();
        },
        py::arg("x"), py::arg("k") = 3, py::arg("r") = std::vector<int>{1, 1}, py::arg("c1") = 8.0,
        py::arg("c2") = 4.0, py::arg("models") = std::vector<std::string>{"ideal-threshold", "qpe-kernel"});

    m.def("or_star_complexity", [](int n) {
        std::vector<learning::Input> pos;
        for (int i = 0; i < n; ++i) {
            learning::Input x(n, 0);
            x[i] = 1;
            pos.push_back(std::move(x));
        }
        return learning::complexity(learning::or_star_graph(n), pos);
    });

    m.def(
        "run_suite",
        [](std::optional<std::string> config, const std::string& out) {
            auto cfg = config ? experiment::config_from_json(json::parse(*config))
                              : experiment::ExperimentConfig::acceptance_suite();
            cfg.out = out;
            std::ostringstream log;
            const auto outcome = [&] {
                py::gil_scoped_release release;
                return experiment::run_suite(cfg, log);
            }();
            json j = {{"passed", outcome.passed()}, {"failures", outcome.failures}, {"summary", outcome.summary},
                      {"log", log.str()}};
            return j.dump();
        },
        py::arg("config") = py::none(), py::arg("out") = "qwalk-out");
}

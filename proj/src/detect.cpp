#include "qwalk/detect.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "qwalk/electric.hpp"
#include "qwalk/errors.hpp"

namespace qwalk {

std::string to_string(DetectionModel m) {
    return m == DetectionModel::IdealThreshold ? "ideal-threshold" : "qpe-kernel";
}

DetectionModel parse_model(const std::string& s) {
    if (s == "ideal" || s == "ideal-threshold") return DetectionModel::IdealThreshold;
    if (s == "kernel" || s == "qpe-kernel") return DetectionModel::QpeKernel;
    throw PreconditionError("unknown detection model '" + s + "'");
}

nlohmann::json to_json(const DetectionResult& r) {
    return {
        {"early_accept_prob", r.early_accept_prob},
        {"phase_accept_prob", r.phase_accept_prob},
        {"total_accept_prob", r.total_accept_prob},
        {"steps", r.steps},
        {"theta_used", r.theta_used},
        {"model", to_string(r.model)},
        {"walk_vertices", r.walk_vertices},
        {"walk_total_weight", r.walk_total_weight},
        {"resistance_bound", r.resistance_bound},
        {"dimension", r.dimension},
        {"doubled", r.doubled},
    };
}

SupportMeasurement measure_support_marked(const SourceDistribution& sigma, const MarkedSet& marked) {
    SupportMeasurement out;
    std::vector<double> rest(sigma.size(), 0.0);
    double kept = 0.0;
    for (auto u : sigma.support()) {
        if (marked.contains(u)) {
            out.p_marked += sigma[u];
        } else {
            rest[u] = sigma[u];
            kept += sigma[u];
        }
    }
    if (kept <= 1e-12) {
        out.p_marked = 1.0;
        return out;
    }
    if (out.p_marked == 0.0) {
        out.collapsed = sigma;
        return out;
    }
    for (auto& p : rest) p /= kept;
    out.collapsed = SourceDistribution(std::move(rest));
    return out;
}

int kernel_bits(double delta) {
    if (!(delta > 0.0)) throw PreconditionError("phase estimation precision must be positive");
    return std::max(0, static_cast<int>(std::ceil(std::log2(1.0 / delta))));
}

double zero_bucket_probability(double theta, int t) {
    const double m = std::ldexp(1.0, t);
    const double half = 0.5 * theta;
    const double den = m * std::sin(half);
    if (std::abs(den) < 1e-300 || std::abs(std::sin(half)) < 1e-15) return 1.0;
    const double num = std::sin(m * half);
    return std::min(1.0, (num * num) / (den * den));
}

double qpe_accept_probability(const Spectrum& spectrum, const Eigen::VectorXcd& state, double delta,
                              DetectionModel model) {
    if (std::abs(state.norm() - 1.0) > 1e-9) {
        throw UnnormalizedStateError("phase estimation input state has norm " + std::to_string(state.norm()));
    }
    if (!(delta > 0.0 && delta < 3.14159265358979323846)) {
        throw PreconditionError("phase estimation precision must lie in (0, pi)");
    }
    const Eigen::VectorXd weights = spectrum.weights(state);
    double accept = 0.0;
    if (model == DetectionModel::IdealThreshold) {
        for (Eigen::Index j = 0; j < weights.size(); ++j) {
            if (std::abs(spectrum.phases(j)) <= delta) accept += weights(j);
        }
    } else {
        const int t = kernel_bits(delta);
        for (Eigen::Index j = 0; j < weights.size(); ++j) {
            accept += weights(j) * zero_bucket_probability(spectrum.phases(j), t);
        }
    }
    return std::clamp(accept, 0.0, 1.0);
}

double qpe_accept_probability(const Spectrum& spectrum, const Eigen::VectorXd& state, double delta,
                              DetectionModel model) {
    return qpe_accept_probability(spectrum, Eigen::VectorXcd(state.cast<std::complex<double>>()), delta, model);
}

long long step_count(double delta, DetectionModel model) {
    if (model == DetectionModel::IdealThreshold) return static_cast<long long>(std::ceil(1.0 / delta));
    return 1LL << kernel_bits(delta);
}

std::vector<DetectionResult> detect(const Instance& instance, const WalkParams& params,
                                    std::span<const DetectionModel> models, const DetectOptions& options) {
    params.validate();
    auto measured = measure_support_marked(instance.sigma, instance.marked);

    std::vector<DetectionResult> out;
    if (!measured.collapsed) {
        for (auto m : models) {
            DetectionResult r;
            r.early_accept_prob = 1.0;
            r.total_accept_prob = 1.0;
            r.model = m;
            r.resistance_bound = params.resistance_bound;
            r.walk_vertices = instance.graph.num_vertices();
            r.walk_total_weight = total_weight(instance.graph);
            out.push_back(r);
        }
        return out;
    }

    if (options.verify_resistance_bound && !instance.marked.empty()) {
        const double r = effective_resistance(instance);
        if (params.resistance_bound < r * (1.0 - 1e-9)) {
            throw PreconditionError("resistance bound " + std::to_string(params.resistance_bound) +
                                    " is below R_{sigma,M} = " + std::to_string(r));
        }
    }

    const auto ready = prepare_for_walk(Instance{instance.graph, *measured.collapsed, instance.marked});
    const auto op = build_walk_operator(ready.instance, params);
    const double w = op.total_weight();
    const double theta = params.theta(w);

    for (auto m : models) {
        DetectionResult r;
        r.early_accept_prob = measured.p_marked;
        r.phase_accept_prob = qpe_accept_probability(op.spectrum(), op.start_state(), theta, m);
        r.total_accept_prob = r.early_accept_prob + (1.0 - r.early_accept_prob) * r.phase_accept_prob;
        r.steps = step_count(theta, m);
        r.theta_used = theta;
        r.model = m;
        r.walk_vertices = ready.instance.graph.num_vertices();
        r.walk_total_weight = w;
        r.resistance_bound = params.resistance_bound;
        r.dimension = op.dim();
        r.doubled = ready.doubled;
        out.push_back(r);
    }
    return out;
}

DetectionResult detect(const Instance& instance, const WalkParams& params, DetectionModel model,
                       const DetectOptions& options) {
    const DetectionModel models[] = {model};
    return detect(instance, params, models, options).front();
}

double collapse_resistance_check(const Instance& instance) {
    if (instance.marked.empty()) throw PreconditionError("collapse check needs a nonempty marked set");
    auto measured = measure_support_marked(instance.sigma, instance.marked);
    if (!(measured.p_marked < 2.0 / 3.0)) {
        throw PreconditionError("collapse check needs marked-support probability below 2/3");
    }
    if (measured.p_marked == 0.0) return 1.0;
    const double before = effective_resistance(instance);
    const double after = effective_resistance(instance.graph, *measured.collapsed, instance.marked);
    const double ratio = after / before;
    if (ratio > 9.0 * (1.0 + 1e-12)) {
        throw Error("collapsed resistance ratio " + std::to_string(ratio) + " exceeds 9");
    }
    return ratio;
}

}  // namespace qwalk

#include "qwalk/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "qwalk/electric.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/io.hpp"
#include "qwalk/learning.hpp"

namespace qwalk::experiment {

using nlohmann::json;

namespace {

const std::pair<Family, const char*> kFamilyNames[] = {
    {Family::Path, "path"},         {Family::Cycle, "cycle"},
    {Family::Grid, "grid"},         {Family::Star, "star"},
    {Family::Complete, "complete"}, {Family::RandomWeighted, "random-weighted"},
    {Family::LearningOr, "learning-or"}, {Family::Kdist, "kdist"},
};

std::string pad(int v, int width = 3) {
    std::ostringstream s;
    s << std::setw(width) << std::setfill('0') << v;
    return s.str();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
}

Instance plain(int n, std::vector<Edge> edges, Vertex source, std::optional<Vertex> target) {
    std::vector<Vertex> m;
    if (target) m.push_back(*target);
    return Instance{ElectricNetwork(n, std::move(edges)), SourceDistribution::point_mass(n, source), MarkedSet(n, m)};
}

Instance random_weighted(int n, bool positive, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::set<std::pair<int, int>> have;
    std::vector<Edge> edges;
    for (int v = 1; v < n; ++v) {
        const int u = std::uniform_int_distribution<int>(0, v - 1)(rng);
        have.insert({u, v});
        edges.push_back({u, v, weight(rng)});
    }
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (!have.count({u, v}) && unit(rng) < 0.25) edges.push_back({u, v, weight(rng)});
        }
    }
    // Vertex order is shuffled through a permutation so sources and marks are random.
    std::vector<Vertex> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<double> p(n, 0.0);
    std::vector<Vertex> marked{perm[n - 1]};
    if (n >= 6 && unit(rng) < 0.5) marked.push_back(perm[n - 2]);
    const double style = unit(rng);
    if (style < 0.3) {
        p[perm[0]] = 1.0;
    } else if (style < 0.7) {
        const double a = 0.2 + 0.6 * unit(rng);
        p[perm[0]] = a;
        p[perm[1]] = 1.0 - a;
    } else {
        // Part of the source mass already sits on a marked vertex.
        const double a = 0.1 + 0.5 * unit(rng);
        p[perm[n - 1]] = a;
        p[perm[0]] = 1.0 - a;
    }
    if (!positive) marked.clear();
    return Instance{ElectricNetwork(n, std::move(edges)), SourceDistribution(std::move(p)), MarkedSet(n, marked)};
}

std::string kdist_id(const InstanceSpec& s) {
    std::string id = "kdist-n" + pad(static_cast<int>(s.x.size()), 2) + "-";
    for (std::size_t i = 0; i < s.x.size(); ++i) id += (i ? "." : "") + std::to_string(s.x[i]);
    return id;
}

}  // namespace

std::string to_string(Family f) {
    for (const auto& [fam, name] : kFamilyNames) {
        if (fam == f) return name;
    }
    return "unknown";
}

Family parse_family(const std::string& s) {
    for (const auto& [fam, name] : kFamilyNames) {
        if (s == name) return fam;
    }
    throw PreconditionError("unknown family '" + s + "'");
}

Generated generate(const InstanceSpec& spec, std::uint64_t seed) {
    Generated out;
    out.spec = spec;
    const int s = spec.size;
    const bool pos = spec.positive;
    const std::string tag = pos ? "-pos" : "-neg";
    Instance in;
    switch (spec.family) {
        case Family::Path: {
            require(s >= 1, "path needs L >= 1");
            std::vector<Edge> e;
            for (int i = 0; i < s; ++i) e.push_back({i, i + 1, 1.0});
            in = plain(s + 1, e, 0, pos ? std::optional<Vertex>(s) : std::nullopt);
            out.id = "path-L" + pad(s) + tag;
            break;
        }
        case Family::Cycle: {
            require(s >= 3, "cycle needs n >= 3");
            std::vector<Edge> e;
            for (int i = 0; i < s; ++i) e.push_back({i, (i + 1) % s, 1.0});
            in = plain(s, e, 0, pos ? std::optional<Vertex>(s / 2) : std::nullopt);
            out.id = "cycle-n" + pad(s) + tag;
            break;
        }
        case Family::Grid: {
            const int rows = s, cols = spec.width > 0 ? spec.width : s;
            require(rows >= 1 && cols >= 1 && rows * cols >= 2, "grid needs at least two cells");
            std::vector<Edge> e;
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    const int v = r * cols + c;
                    if (c + 1 < cols) e.push_back({v, v + 1, 1.0});
                    if (r + 1 < rows) e.push_back({v, v + cols, 1.0});
                }
            }
            in = plain(rows * cols, e, 0, pos ? std::optional<Vertex>(rows * cols - 1) : std::nullopt);
            out.id = "grid-" + pad(rows) + "x" + pad(cols) + tag;
            break;
        }
        case Family::Star: {
            require(s >= 2, "star needs at least two leaves");
            std::vector<Edge> e;
            for (int leaf = 1; leaf <= s; ++leaf) e.push_back({0, leaf, 1.0});
            in = plain(s + 1, e, 1, pos ? std::optional<Vertex>(s) : std::nullopt);
            out.id = "star-n" + pad(s) + tag;
            break;
        }
        case Family::Complete: {
            require(s >= 2, "complete graph needs n >= 2");
            std::vector<Edge> e;
            for (int u = 0; u < s; ++u) {
                for (int v = u + 1; v < s; ++v) e.push_back({u, v, 1.0});
            }
            in = plain(s, e, 0, pos ? std::optional<Vertex>(s - 1) : std::nullopt);
            out.id = "complete-n" + pad(s) + tag;
            break;
        }
        case Family::RandomWeighted: {
            require(s >= 3, "random-weighted needs n >= 3");
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(spec.variant)};
            std::mt19937_64 rng(seq);
            in = random_weighted(s, pos, rng);
            out.id = "random-n" + pad(s) + "-v" + pad(spec.variant) + tag;
            break;
        }
        case Family::LearningOr: {
            require(s >= 1, "learning-or needs n >= 1");
            learning::Input x(s, 0);
            if (pos) x[s - 1] = 1;
            in = learning::compile(learning::or_star_graph(s), x).instance;
            out.id = "learning-or-n" + pad(s) + tag;
            break;
        }
        case Family::Kdist: {
            kdist::KDistInstance k{spec.x, spec.k, spec.r};
            auto g = kdist::build_kdist_graph(k);
            out.fixed_resistance = kdist::level_params(g, 8.0, 4.0).resistance_bound;
            out.spec.positive = k.collision().has_value();
            in = g.instance();
            out.id = kdist_id(spec) + (out.spec.positive ? "-pos" : "-neg");
            break;
        }
    }
    auto ready = prepare_for_walk(in);
    out.instance = std::move(ready.instance);
    out.origin = std::move(ready.origin);
    out.doubled = ready.doubled;
    return out;
}

ExperimentConfig ExperimentConfig::acceptance_suite() {
    ExperimentConfig c;
    c.families = {
        {Family::Path, {1, 2, 3, 5, 8}, 0, 1, {}},
        {Family::Cycle, {4, 5, 6, 7, 9}, 0, 1, {}},
        {Family::Grid, {2, 3}, 0, 1, {}},
        {Family::Grid, {2}, 4, 1, {}},
        {Family::Star, {3, 6}, 0, 1, {}},
        {Family::Complete, {3, 4, 5}, 0, 1, {}},
        {Family::RandomWeighted, {6, 8, 10, 12}, 0, 3, {}},
        {Family::LearningOr, {2, 4, 9}, 0, 1, {}},
    };
    c.out = "qwalk-out/acceptance";
    return c;
}

ExperimentConfig ExperimentConfig::scaling_study() {
    ExperimentConfig c;
    c.kind = "scaling";
    c.families = {{Family::Path, {2, 4, 8, 16, 32}, 0, 1, {}}};
    c.out = "qwalk-out/scaling";
    return c;
}

ExperimentConfig ExperimentConfig::identities_suite() {
    ExperimentConfig c;
    c.kind = "identities";
    c.out = "qwalk-out/identities";
    return c;
}

json to_json(const ExperimentConfig& c) {
    json fams = json::array();
    for (const auto& f : c.families) {
        json j = {{"family", to_string(f.family)}, {"sizes", f.sizes}};
        if (f.width > 0) j["width"] = f.width;
        if (f.count != 1) j["count"] = f.count;
        if (!f.kdist.empty()) {
            j["instances"] = json::array();
            for (const auto& k : f.kdist) j["instances"].push_back(io::kdist_instance_to_json(k));
        }
        fams.push_back(j);
    }
    json models = json::array();
    for (auto m : c.models) models.push_back(to_string(m));
    return {{"kind", c.kind},   {"families", fams},      {"c1", c.c1},
            {"c2", c.c2},       {"models", models},      {"seed", c.seed},
            {"out", c.out.string()}, {"threads", c.threads}, {"graphs", c.graphs},
            {"max_vertices", c.max_vertices}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (!j.is_object()) throw PreconditionError("config must be a JSON object");
    c.kind = j.value("kind", c.kind);
    if (c.kind != "detect" && c.kind != "scaling" && c.kind != "identities") {
        throw PreconditionError("unknown config kind '" + c.kind + "'");
    }
    if (j.contains("families")) {
        for (const auto& f : j["families"]) {
            FamilySweep s;
            s.family = parse_family(f.at("family").get<std::string>());
            s.sizes = f.value("sizes", std::vector<int>{});
            s.width = f.value("width", 0);
            s.count = f.value("count", 1);
            if (f.contains("instances")) {
                for (const auto& k : f["instances"]) s.kdist.push_back(io::kdist_instance_from_json(k));
            }
            c.families.push_back(std::move(s));
        }
    } else if (c.kind == "detect") {
        c.families = ExperimentConfig::acceptance_suite().families;
    } else if (c.kind == "scaling") {
        c.families = ExperimentConfig::scaling_study().families;
    }
    c.c1 = j.value("c1", c.c1);
    c.c2 = j.value("c2", c.c2);
    if (j.contains("models")) {
        c.models.clear();
        for (const auto& m : j["models"]) c.models.push_back(parse_model(m.get<std::string>()));
    }
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out.string());
    c.threads = j.value("threads", c.threads);
    c.graphs = j.value("graphs", c.graphs);
    c.max_vertices = j.value("max_vertices", c.max_vertices);
    WalkParams{c.c1, c.c2, 1.0}.validate();
    return c;
}

std::vector<InstanceSpec> expand(const ExperimentConfig& c) {
    std::vector<InstanceSpec> out;
    for (const auto& f : c.families) {
        if (f.family == Family::Kdist) {
            for (const auto& k : f.kdist) {
                InstanceSpec s;
                s.family = Family::Kdist;
                s.x = k.x;
                s.k = k.k;
                s.r = k.r;
                out.push_back(s);
            }
            continue;
        }
        for (int size : f.sizes) {
            const int draws = f.family == Family::RandomWeighted ? std::max(1, f.count) : 1;
            for (int v = 0; v < draws; ++v) {
                for (bool positive : {true, false}) {
                    InstanceSpec s;
                    s.family = f.family;
                    s.size = size;
                    s.width = f.width;
                    s.variant = v;
                    s.positive = positive;
                    out.push_back(s);
                }
            }
        }
    }
    return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
        work();
    }
    if (error) std::rethrow_exception(error);
}

namespace {

/// R used for an instance: the collapsed resistance of its positive variant.
double certifying_resistance(const InstanceSpec& spec, std::uint64_t seed) {
    auto positive = spec;
    positive.positive = true;
    const auto g = generate(positive, seed);
    if (g.fixed_resistance) return *g.fixed_resistance;
    const auto m = measure_support_marked(g.instance.sigma, g.instance.marked);
    if (!m.collapsed) return 1.0;
    return effective_resistance(g.instance.graph, *m.collapsed, g.instance.marked);
}

void evaluate(Case& c, const ExperimentConfig& cfg) {
    const auto& g = c.generated;
    const auto& in = g.instance;
    const bool kd = g.spec.family == Family::Kdist;
    WalkParams params{cfg.c1, cfg.c2, c.resistance};
    c.results = detect(in, params, cfg.models, DetectOptions{!kd});

    const auto m = measure_support_marked(in.sigma, in.marked);
    c.p_marked = m.p_marked;
    if (!in.marked.empty() && m.p_marked > 0.0 && m.p_marked < 2.0 / 3.0) {
        c.collapse_ratio = collapse_resistance_check(in);
        if (*c.collapse_ratio > 9.0) c.failures.push_back("collapsed resistance ratio exceeds 9");
    }

    const double c_const = params.c();
    for (const auto& r : c.results) {
        const std::string model = to_string(r.model);
        if (g.spec.positive && r.total_accept_prob < 2.0 / 3.0) {
            c.failures.push_back(model + " acceptance " + fmt(r.total_accept_prob) + " below 2/3");
        }
        if (!g.spec.positive && r.total_accept_prob > 1.0 / 3.0) {
            c.failures.push_back(model + " acceptance " + fmt(r.total_accept_prob) + " above 1/3");
        }
        if (r.steps > 0) {
            const auto bound = static_cast<long long>(std::ceil(c_const * std::sqrt(c.resistance * r.walk_total_weight)));
            const long long allowed = r.model == DetectionModel::IdealThreshold ? bound : 2 * bound;
            if (r.steps > allowed) {
                c.failures.push_back(model + " uses " + std::to_string(r.steps) + " steps, bound " +
                                     std::to_string(allowed));
            }
        }
    }
    if (!m.collapsed) return;

    const Instance walk{in.graph, *m.collapsed, in.marked};
    const auto op = build_walk_operator(walk, params);
    c.diagnostics = diagnose(op, in.graph);
    const auto& d = *c.diagnostics;
    if (d.unitarity > 1e-10) c.failures.push_back("U is not orthogonal to 1e-10");
    if (d.reflection_a > 1e-10 || d.reflection_b > 1e-10) c.failures.push_back("R_A or R_B does not square to I");
    if (d.local_commutator > 1e-12) c.failures.push_back("same-part local reflections do not commute");
    if (d.reassembly > 1e-8) c.failures.push_back("spectrum does not reassemble U");

    if (!in.marked.empty()) {
        const auto graph = kd ? kdist::build_kdist_graph({g.spec.x, g.spec.k, g.spec.r}) : kdist::KDistGraph{};
        if (kd) {
            const auto pw = kdist::positive_witness(graph, {g.spec.x, g.spec.k, g.spec.r}, op);
            c.fixed_point_error = pw.fixed_point_error;
            c.overlap = pw.overlap;
        } else {
            const auto f = electric_flow(walk.graph, walk.sigma, walk.marked);
            const auto phi = positive_witness(op.space(), walk.graph, walk.sigma, walk.marked, params, f);
            c.fixed_point_error = (op.step() * phi - phi).norm() / phi.norm();
            c.overlap = phi.dot(op.start_state()) / phi.norm();
            c.rw = check_rw_lower_bound(walk.graph, walk.sigma, walk.marked, f).rw;
            if (flow_energy(f, walk.graph) <= c.resistance * (1.0 + 1e-12) &&
                *c.overlap < std::sqrt(cfg.c1 / (1.0 + cfg.c1)) - 1e-12) {
                c.failures.push_back("positive witness overlap below sqrt(c1 / (1 + c1))");
            }
        }
        if (*c.fixed_point_error > 1e-9) c.failures.push_back("positive witness is not fixed by U");
    } else {
        const auto w = negative_witness(op.space(), walk.graph, walk.sigma, params);
        const double wn = w.norm();
        c.kernel_a = (op.projector_a() * w).norm() / wn;
        c.image_b = (op.projector_b() * w - op.start_state()).norm() / wn;
        const double expect = 1.0 + params.c1 * params.resistance_bound * total_weight(walk.graph);
        c.norm_error = std::abs(w.squaredNorm() - expect) / expect;
        if (*c.kernel_a > 1e-9 || *c.image_b > 1e-9) c.failures.push_back("negative witness projections are off");
        if (*c.norm_error > 1e-9) c.failures.push_back("negative witness norm differs from 1 + c1 R W");
        double margin = -1e300;
        for (int i = 1; i <= 20; ++i) {
            const auto gap = effective_gap_check(op, w, std::numbers::pi * i / 20.0);
            margin = std::max(margin, gap.lhs - gap.bound);
        }
        c.gap_margin = margin;
        if (margin > 1e-9) c.failures.push_back("effective spectral gap bound violated");
    }
}

json case_to_json(const Case& c) {
    json results = json::array();
    for (const auto& r : c.results) results.push_back(to_json(r));
    json j = {{"id", c.generated.id},
              {"family", to_string(c.generated.spec.family)},
              {"positive", c.generated.spec.positive},
              {"doubled", c.generated.doubled},
              {"resistance_bound", c.resistance},
              {"p_marked", c.p_marked},
              {"results", results},
              {"failures", c.failures},
              {"instance_file", c.file.filename().string()}};
    auto opt = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    if (c.diagnostics) {
        j["diagnostics"] = {{"unitarity", c.diagnostics->unitarity},
                            {"reflection_a", c.diagnostics->reflection_a},
                            {"reflection_b", c.diagnostics->reflection_b},
                            {"reassembly", c.diagnostics->reassembly},
                            {"local_commutator", c.diagnostics->local_commutator}};
    }
    opt("rw", c.rw);
    opt("collapse_ratio", c.collapse_ratio);
    opt("fixed_point_error", c.fixed_point_error);
    opt("overlap", c.overlap);
    opt("kernel_a", c.kernel_a);
    opt("image_b", c.image_b);
    opt("norm_error", c.norm_error);
    opt("gap_margin", c.gap_margin);
    return j;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::vector<Row> rows_of(const std::vector<Case>& cases) {
    std::vector<Row> rows;
    for (const auto& c : cases) {
        for (const auto& r : c.results) {
            rows.push_back({c.generated.id, r.walk_vertices, r.walk_total_weight, c.resistance, r.theta_used, r.steps,
                            r.model, r.total_accept_prob, c.generated.spec.positive});
        }
    }
    return rows;
}

std::string rows_to_csv(const std::vector<Row>& rows) {
    std::string out = "instance-id,n,W,R,theta,steps,model,accept-prob,is-positive\n";
    for (const auto& r : rows) {
        out += r.id + "," + std::to_string(r.n) + "," + fmt(r.w) + "," + fmt(r.r) + "," + fmt(r.theta) + "," +
               std::to_string(r.steps) + "," + to_string(r.model) + "," + fmt(r.accept) + "," +
               (r.positive ? "true" : "false") + "\n";
    }
    return out;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw PreconditionError("slope fit needs two or more points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw PreconditionError("slope fit needs distinct abscissae");
    return (n * sxy - sx * sy) / den;
}

ScalingResult scaling_study(const std::vector<int>& lengths, double c1, double c2) {
    ScalingResult out;
    std::vector<double> xs, ys;
    for (int len : lengths) {
        InstanceSpec spec;
        spec.size = len;
        spec.positive = false;
        const auto neg = generate(spec, 0);
        spec.positive = true;
        const auto pos = generate(spec, 0);
        WalkParams params{c1, c2, effective_resistance(pos.instance)};
        const auto op = build_walk_operator(neg.instance, params);
        const Eigen::VectorXd weights = op.spectrum().weights(op.start_state().cast<std::complex<double>>());
        std::vector<std::pair<double, double>> by_phase;
        for (Eigen::Index j = 0; j < weights.size(); ++j) {
            by_phase.emplace_back(std::abs(op.spectrum().phases(j)), weights(j));
        }
        std::sort(by_phase.begin(), by_phase.end());
        double delta = std::numbers::pi;
        double mass = 0.0;
        for (std::size_t i = 0; i < by_phase.size();) {
            // Eigenphases of equal magnitude enter together.
            std::size_t k = i;
            double add = 0.0;
            while (k < by_phase.size() && by_phase[k].first <= by_phase[i].first + 1e-12) add += by_phase[k++].second;
            if (mass + add > 1.0 / 3.0) {
                delta = by_phase[i].first;
                break;
            }
            mass += add;
            i = k;
        }
        const auto pop = build_walk_operator(pos.instance, params);
        const double below = std::nextafter(delta, 0.0);
        const double accept =
            qpe_accept_probability(pop.spectrum(), pop.start_state(), below, DetectionModel::IdealThreshold);
        const double rw = params.resistance_bound * total_weight(pos.instance.graph);
        out.points.push_back({len, rw, delta, accept});
        xs.push_back(std::log(std::sqrt(rw)));
        ys.push_back(std::log(1.0 / delta));
    }
    out.slope = fit_slope(xs, ys);
    return out;
}

std::vector<IdentityRow> identity_sweep(int graphs, int max_vertices, std::uint64_t seed, int threads) {
    std::vector<IdentityRow> rows(graphs);
    parallel_for(static_cast<std::size_t>(graphs), threads, [&](std::size_t i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i), 0x71u};
        std::mt19937_64 rng(seq);
        const int n = std::uniform_int_distribution<int>(2, std::max(2, max_vertices))(rng);
        std::uniform_real_distribution<double> weight(0.25, 4.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::set<std::pair<int, int>> have;
        std::vector<Edge> edges;
        for (int v = 1; v < n; ++v) {
            const int u = std::uniform_int_distribution<int>(0, v - 1)(rng);
            have.insert({u, v});
            edges.push_back({u, v, weight(rng)});
        }
        const double extra = 2.0 / n;
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                if (!have.count({u, v}) && unit(rng) < extra) edges.push_back({u, v, weight(rng)});
            }
        }
        ElectricNetwork g(n, std::move(edges));
        const double w = total_weight(g);
        const Vertex s = std::uniform_int_distribution<int>(0, n - 1)(rng);
        Vertex t = std::uniform_int_distribution<int>(0, n - 2)(rng);
        if (t >= s) ++t;
        const double rst = effective_resistance(g, s, t);
        const double commute = commute_time(g, s, t);

        std::vector<Vertex> m;
        for (int u = 0; u < n; ++u) {
            if (unit(rng) < 0.2) m.push_back(u);
        }
        if (m.empty()) m.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
        const MarkedSet marked(n, m);
        const auto pi = stationary_distribution(g);
        const double rpi = effective_resistance(g, pi, marked);
        const double h = hitting_time(g, pi, marked);
        rows[i] = {n, w, std::abs(commute - 2.0 * w * rst) / (2.0 * w * rst),
                   std::abs(h - 2.0 * w * rpi) / (2.0 * w * rpi)};
    });
    return rows;
}

SuiteOutcome run_suite(const ExperimentConfig& cfg, std::ostream& log) {
    SuiteOutcome out;
    const auto started = timestamp();
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.out);

    if (cfg.kind == "identities") {
        const auto rows = identity_sweep(cfg.graphs, cfg.max_vertices, cfg.seed, cfg.threads);
        std::string csv = "graph,n,W,commute-rel-error,hitting-rel-error\n";
        double worst = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            csv += std::to_string(i) + "," + std::to_string(rows[i].n) + "," + fmt(rows[i].w) + "," +
                   fmt(rows[i].commute_error) + "," + fmt(rows[i].hitting_error) + "\n";
            worst = std::max({worst, rows[i].commute_error, rows[i].hitting_error});
        }
        io::write_text(cfg.out / "identities.csv", csv);
        out.summary = {{"graphs", rows.size()}, {"max_relative_error", worst}};
        if (!(worst <= 1e-9)) out.failures.push_back("identities: relative error " + fmt(worst) + " exceeds 1e-9");
    } else if (cfg.kind == "scaling") {
        std::vector<int> lengths;
        for (const auto& f : cfg.families) {
            if (f.family != Family::Path) throw PreconditionError("the scaling study runs on the path family");
            lengths.insert(lengths.end(), f.sizes.begin(), f.sizes.end());
        }
        const auto res = scaling_study(lengths, cfg.c1, cfg.c2);
        std::string csv = "L,RW,sqrt-RW,delta-max,inverse-delta,positive-accept\n";
        for (const auto& p : res.points) {
            csv += std::to_string(p.length) + "," + fmt(p.rw) + "," + fmt(std::sqrt(p.rw)) + "," + fmt(p.delta_max) +
                   "," + fmt(1.0 / p.delta_max) + "," + fmt(p.positive_accept) + "\n";
            if (p.positive_accept < 2.0 / 3.0) {
                out.failures.push_back("scaling: positive path L=" + std::to_string(p.length) +
                                       " is not accepted at delta_max");
            }
        }
        io::write_text(cfg.out / "scaling.csv", csv);
        out.summary = {{"slope", res.slope}, {"points", res.points.size()}};
        if (!(res.slope >= 0.85 && res.slope <= 1.15)) {
            out.failures.push_back("scaling: slope " + fmt(res.slope) + " outside [0.85, 1.15]");
        }
    } else {
        const auto specs = expand(cfg);
        std::vector<Case> cases(specs.size());
        parallel_for(specs.size(), cfg.threads, [&](std::size_t i) {
            auto& c = cases[i];
            try {
                c.generated = generate(specs[i], cfg.seed);
                c.file = cfg.out / "instances" / (c.generated.id + ".json");
                io::write_json(c.file, io::instance_to_json(c.generated.instance));
                c.resistance = certifying_resistance(specs[i], cfg.seed);
                evaluate(c, cfg);
            } catch (const std::exception& e) {
                if (c.generated.id.empty()) c.generated.id = "case-" + pad(static_cast<int>(i));
                c.failures.push_back(e.what());
            }
        });
        std::sort(cases.begin(), cases.end(),
                  [](const Case& a, const Case& b) { return a.generated.id < b.generated.id; });
        json results = json::array();
        for (const auto& c : cases) {
            results.push_back(case_to_json(c));
            for (const auto& f : c.failures) {
                out.failures.push_back(c.generated.id + ": " + f + " (replay: " + c.file.string() + ")");
            }
        }
        io::write_text(cfg.out / "results.csv", rows_to_csv(rows_of(cases)));
        io::write_json(cfg.out / "results.json", results);
        int positives = 0;
        for (const auto& c : cases) positives += c.generated.spec.positive ? 1 : 0;
        out.summary = {{"instances", cases.size()}, {"positive", positives},
                       {"negative", static_cast<int>(cases.size()) - positives}};
        out.cases = std::move(cases);
    }

    for (const auto& f : out.failures) log << "FAIL " << f << "\n";
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json meta = {{"config", to_json(cfg)},
                 {"started", started},
                 {"finished", timestamp()},
                 {"seconds", seconds},
                 {"passed", out.passed()},
                 {"failures", out.failures.size()},
                 {"summary", out.summary}};
    io::write_json(cfg.out / "metadata.json", meta);
    return out;
}

}  // namespace qwalk::experiment

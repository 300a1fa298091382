#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qwalk/detect.hpp"
#include "qwalk/kdist.hpp"
#include "qwalk/network.hpp"
#include "qwalk/walk.hpp"

namespace qwalk::experiment {

enum class Family { Path, Cycle, Grid, Star, Complete, RandomWeighted, LearningOr, Kdist };

std::string to_string(Family f);
Family parse_family(const std::string& s);

/// One instance request. `size` is the family's main parameter: edges of a
/// path, vertices of a cycle / complete / random graph, rows of a grid, leaves
/// of a star, bits of the OR learning graph. Kdist instances use x, k, r.
struct InstanceSpec {
    Family family = Family::Path;
    int size = 4;
    int width = 0;  // grid columns; 0 means square
    bool positive = true;
    int variant = 0;  // random-weighted: which draw for this size
    std::vector<int> x;
    int k = 3;
    std::vector<int> r;
};

struct Generated {
    std::string id;
    InstanceSpec spec;
    /// Bipartite with the source support in A; doubled when the family needs it.
    Instance instance;
    std::vector<Vertex> origin;
    bool doubled = false;
    /// Level-convention resistance for kdist instances; otherwise unset.
    std::optional<double> fixed_resistance;
};

/// Deterministic in (spec, seed). Throws PreconditionError for invalid parameters.
Generated generate(const InstanceSpec& spec, std::uint64_t seed);

struct FamilySweep {
    Family family = Family::Path;
    std::vector<int> sizes;
    int width = 0;
    int count = 1;  // random-weighted: seeds per size
    std::vector<kdist::KDistInstance> kdist;  // kdist family: explicit inputs
};

struct ExperimentConfig {
    std::string kind = "detect";  // detect | scaling | identities
    std::vector<FamilySweep> families;
    double c1 = 8.0;
    double c2 = 4.0;
    std::vector<DetectionModel> models{DetectionModel::IdealThreshold, DetectionModel::QpeKernel};
    std::uint64_t seed = 1;
    std::filesystem::path out = "qwalk-out";
    int threads = 0;  // 0: hardware concurrency

    // identities sweep
    int graphs = 50;
    int max_vertices = 50;

    /// The separation suite: paths, cycles, grids, stars, complete graphs,
    /// random weighted graphs, and OR learning graphs with negative companions.
    static ExperimentConfig acceptance_suite();
    static ExperimentConfig scaling_study();
    static ExperimentConfig identities_suite();
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// One detection row of a sweep.
struct Row {
    std::string id;
    int n = 0;
    double w = 0.0;
    double r = 0.0;
    double theta = 0.0;
    long long steps = 0;
    DetectionModel model = DetectionModel::IdealThreshold;
    double accept = 0.0;
    bool positive = false;
};

struct Case {
    Generated generated;
    double resistance = 0.0;
    std::vector<DetectionResult> results;
    double p_marked = 0.0;
    std::optional<OperatorDiagnostics> diagnostics;  // absent when the walk never runs
    std::optional<double> rw;               // R W of the electric flow on the walk instance
    std::optional<double> collapse_ratio;   // when 0 < p_marked < 2/3

    // Positive cases: ||U phi - phi|| / ||phi|| and <phi / ||phi||, start>.
    std::optional<double> fixed_point_error;
    std::optional<double> overlap;
    // Negative cases: ||Pi_A w|| / ||w||, ||Pi_B w - start|| / ||w||, relative error
    // of ||w||^2 against 1 + c1 R W, and max over the theta sweep of lhs - bound.
    std::optional<double> kernel_a;
    std::optional<double> image_b;
    std::optional<double> norm_error;
    std::optional<double> gap_margin;

    std::vector<std::string> failures;
    std::filesystem::path file;
};

struct SuiteOutcome {
    std::vector<Case> cases;  // sorted by id
    std::vector<std::string> failures;
    nlohmann::json summary;
    bool passed() const { return failures.empty(); }
};

/// Expands the config into positive instances and their negative companions.
std::vector<InstanceSpec> expand(const ExperimentConfig& c);

/// Runs the config's sweep, writes its artifacts under c.out, and reports failures.
/// Failure lines (with the replayable instance file) go to `log`.
SuiteOutcome run_suite(const ExperimentConfig& c, std::ostream& log);

/// CSV with columns instance-id,n,W,R,theta,steps,model,accept-prob,is-positive.
std::string rows_to_csv(const std::vector<Row>& rows);
std::vector<Row> rows_of(const std::vector<Case>& cases);

struct ScalingPoint {
    int length;
    double rw;
    double delta_max;  // largest precision at which the negative ideal acceptance stays <= 1/3
    double positive_accept;
};

struct ScalingResult {
    std::vector<ScalingPoint> points;
    double slope;  // least-squares slope of log(1/delta_max) against log(sqrt(R W))
};

/// Path family study: for each L, the negative path with R = L, W = L.
ScalingResult scaling_study(const std::vector<int>& lengths, double c1, double c2);

/// Least-squares slope of ys against xs.
double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

struct IdentityRow {
    int n;
    double w;
    double commute_error;
    double hitting_error;
};

std::vector<IdentityRow> identity_sweep(int graphs, int max_vertices, std::uint64_t seed, int threads = 0);

/// Runs fn(i) for i in [0, count) over `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace qwalk::experiment

#include "qwalk/io.hpp"

#include <fstream>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk::io {

namespace {

template <class T>
T field(const json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw InvalidInstance(std::string(what) + " is missing \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidInstance(std::string(what) + " field \"" + key + "\": " + e.what());
    }
}

}  // namespace

json instance_to_json(const Instance& in) {
    const auto data = to_data(in);
    json edges = json::array();
    for (const auto& [u, v, w] : data.edges) edges.push_back({u, v, w});
    json partition = nullptr;
    if (data.partition) partition = {{"A", data.partition->first}, {"B", data.partition->second}};
    json sigma = json::object();
    for (const auto& [u, p] : data.sigma) sigma[std::to_string(u)] = p;
    return {{"vertices", data.num_vertices},
            {"edges", edges},
            {"partition", partition},
            {"sigma", sigma},
            {"marked", data.marked}};
}

InstanceData instance_data_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInstance("instance must be a JSON object");
    InstanceData d;
    d.num_vertices = field<int>(j, "vertices", "instance");
    for (const auto& e : field<json>(j, "edges", "instance")) {
        if (!e.is_array() || e.size() != 3) throw InvalidInstance("each edge must be [u, v, w]");
        d.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    if (j.contains("partition") && !j["partition"].is_null()) {
        const auto& p = j["partition"];
        d.partition.emplace(field<std::vector<Vertex>>(p, "A", "partition"),
                            field<std::vector<Vertex>>(p, "B", "partition"));
    }
    const auto sigma = field<json>(j, "sigma", "instance");
    for (const auto& [key, value] : sigma.items()) {
        std::size_t used = 0;
        int u = -1;
        try {
            u = std::stoi(key, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != key.size()) throw InvalidInstance("sigma key \"" + key + "\" is not a vertex id");
        d.sigma.emplace_back(u, value.get<double>());
    }
    if (j.contains("marked")) d.marked = j["marked"].get<std::vector<Vertex>>();
    return d;
}

Instance instance_from_json(const json& j) { return make_instance(instance_data_from_json(j)); }

json learning_graph_to_json(const learning::LearningGraph& lg) {
    json edges = json::array();
    for (const auto& e : lg.edges()) edges.push_back({learning::members(e.from), e.index, e.weight});
    const auto& f = lg.function();
    json fn = {{"name", f.name()}, {"q", f.q()}};
    if (f.k() > 0) fn["k"] = f.k();
    fn["domain"] = f.domain() ? json(*f.domain()) : json("all");
    return {{"n", lg.n()}, {"edges", edges}, {"function", fn}};
}

learning::LearningGraph learning_graph_from_json(const json& j) {
    const int n = field<int>(j, "n", "learning graph");
    std::vector<learning::LearningEdge> edges;
    for (const auto& e : field<json>(j, "edges", "learning graph")) {
        if (!e.is_array() || e.size() != 3) throw InvalidInstance("each learning edge must be [subset, j, w]");
        const auto subset = e[0].get<std::vector<int>>();
        if (!std::is_sorted(subset.begin(), subset.end())) throw InvalidInstance("learning edge subsets must be sorted");
        edges.push_back({learning::subset_of(subset), e[1].get<int>(), e[2].get<double>()});
    }
    const auto fn = field<json>(j, "function", "learning graph");
    std::optional<std::vector<learning::Input>> domain;
    if (fn.contains("domain") && !(fn["domain"].is_string() && fn["domain"] == "all")) {
        domain = fn["domain"].get<std::vector<learning::Input>>();
    }
    learning::BooleanFunction f(field<std::string>(fn, "name", "function"), fn.value("q", 2), fn.value("k", 0),
                                std::move(domain));
    return learning::LearningGraph(n, std::move(edges), std::move(f));
}

json kdist_instance_to_json(const kdist::KDistInstance& inst) { return {{"x", inst.x}, {"k", inst.k}, {"r", inst.r}}; }

kdist::KDistInstance kdist_instance_from_json(const json& j) {
    kdist::KDistInstance inst;
    inst.x = field<std::vector<int>>(j, "x", "k-distinctness instance");
    inst.k = j.value("k", 3);
    inst.r = field<std::vector<int>>(j, "r", "k-distinctness instance");
    inst.validate();
    return inst;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace qwalk::io

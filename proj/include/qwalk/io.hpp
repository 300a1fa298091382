#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "qwalk/kdist.hpp"
#include "qwalk/learning.hpp"
#include "qwalk/network.hpp"

namespace qwalk::io {

using nlohmann::json;

/// {"vertices", "edges": [[u, v, w]], "partition": {"A", "B"} | null, "sigma": {"u": p}, "marked"}
json instance_to_json(const Instance& in);
InstanceData instance_data_from_json(const json& j);
/// Parses and validates; throws InvalidInstance with every diagnostic.
Instance instance_from_json(const json& j);

/// {"n", "edges": [[sorted-subset, j, w]], "function": {"name", "q", "k"?, "domain": "all" | [[...]]}}
/// Subset members and j are 0-based indices.
json learning_graph_to_json(const learning::LearningGraph& lg);
learning::LearningGraph learning_graph_from_json(const json& j);

/// {"x": [ints], "k": int, "r": [ints]}
json kdist_instance_to_json(const kdist::KDistInstance& inst);
kdist::KDistInstance kdist_instance_from_json(const json& j);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace qwalk::io

#include "elevleak/models/checkpoint.hpp"

#include "elevleak/errors.hpp"

#include <fstream>

namespace elevleak::models {

namespace {

nlohmann::ordered_json container(const std::string& type) {
    nlohmann::ordered_json j;
    j["format_version"] = kCheckpointVersion;
    j["model"] = type;
    return j;
}

void check_container(const nlohmann::json& j, const std::string& type) {
    if (j.value("format_version", -1) != kCheckpointVersion)
        throw DataError("unsupported checkpoint format version");
    if (j.value("model", "") != type)
        throw DataError("checkpoint holds a '" + j.value("model", std::string("?")) +
                        "' model, expected '" + type + "'");
}

} // namespace

std::string checkpoint_model_type(const nlohmann::json& j) {
    if (!j.contains("model")) throw DataError("checkpoint lacks a model type");
    return j.at("model").get<std::string>();
}

nlohmann::ordered_json to_checkpoint(const LinearModel& model) {
    auto j = container("svm");
    j["dim"] = model.dim;
    j["classes"] = model.classes;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    return j;
}

LinearModel linear_from_checkpoint(const nlohmann::json& j) {
    check_container(j, "svm");
    LinearModel m;
    m.dim = j.at("dim").get<std::size_t>();
    m.classes = j.at("classes").get<int>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<std::vector<double>>();
    if (m.weights.size() != m.dim * static_cast<std::size_t>(m.classes))
        throw DataError("svm checkpoint weight shape mismatch");
    return m;
}

nlohmann::ordered_json to_checkpoint(const Forest& forest) {
    auto j = container("rfc");
    j["classes"] = forest.classes;
    auto trees = nlohmann::ordered_json::array();
    for (const auto& tree : forest.trees) {
        auto nodes = nlohmann::ordered_json::array();
        for (const auto& node : tree.nodes) {
            nodes.push_back({{"feature", node.feature},
                             {"threshold", node.threshold},
                             {"left", node.left},
                             {"right", node.right},
                             {"counts", node.class_counts}});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

Forest forest_from_checkpoint(const nlohmann::json& j) {
    check_container(j, "rfc");
    Forest f;
    f.classes = j.at("classes").get<int>();
    for (const auto& tree_json : j.at("trees")) {
        DecisionTree tree;
        for (const auto& node_json : tree_json) {
            TreeNode node;
            node.feature = node_json.at("feature").get<int>();
            node.threshold = node_json.at("threshold").get<double>();
            node.left = node_json.at("left").get<int>();
            node.right = node_json.at("right").get<int>();
            node.class_counts = node_json.at("counts").get<std::vector<std::size_t>>();
            tree.nodes.push_back(std::move(node));
        }
        f.trees.push_back(std::move(tree));
    }
    return f;
}

nlohmann::ordered_json to_checkpoint(const MlpModel& model) {
    auto j = container("mlp");
    j["input_dim"] = model.input_dim;
    j["hidden"] = model.hidden;
    j["classes"] = model.classes;
    j["params"] = model.params;
    return j;
}

MlpModel mlp_from_checkpoint(const nlohmann::json& j) {
    check_container(j, "mlp");
    MlpModel m;
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.hidden = j.at("hidden").get<int>();
    m.classes = j.at("classes").get<int>();
    m.params = j.at("params").get<std::vector<double>>();
    if (m.params.size() != m.param_count()) throw DataError("mlp checkpoint shape mismatch");
    return m;
}

nlohmann::ordered_json to_checkpoint(const CnnModel& model) {
    auto j = container("cnn");
    j["c1"] = model.c1;
    j["c2"] = model.c2;
    j["classes"] = model.classes;
    j["params"] = model.params;
    return j;
}

CnnModel cnn_from_checkpoint(const nlohmann::json& j) {
    check_container(j, "cnn");
    CnnModel m;
    m.c1 = j.at("c1").get<int>();
    m.c2 = j.at("c2").get<int>();
    m.classes = j.at("classes").get<int>();
    m.params = j.at("params").get<std::vector<double>>();
    if (m.params.size() != m.param_count()) throw DataError("cnn checkpoint shape mismatch");
    return m;
}

void save_checkpoint(const std::string& path, const nlohmann::ordered_json& checkpoint) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << checkpoint.dump();
    out << "\n";
}

nlohmann::json load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid checkpoint json: ") + e.what());
    }
    return j;
}

} // namespace elevleak::models

#include <unordered_map>

#include "hiermf/hierarchy.hpp"
#include "hiermf/io.hpp"

namespace hiermf::hierarchy {
namespace {

constexpr std::string_view kLeafPrefix = "leaf:";

io::Json child_json(const Dendrogram& tree, const ChildRef& c) {
  if (c.is_leaf()) return std::string(kLeafPrefix) + tree.leaves()[c.index];
  return tree.nodes()[c.index].id;
}

}  // namespace

io::Json dendrogram_to_json(const Dendrogram& tree) {
  io::Json doc;
  doc["leaves"] = tree.leaves();
  doc["nodes"] = io::Json::array();
  for (const auto& node : tree.nodes()) {
    io::Json j;
    j["id"] = node.id;
    j["left"] = child_json(tree, node.left);
    j["right"] = child_json(tree, node.right);
    j["height"] = node.height;
    if (node.p) j["p"] = *node.p;
    doc["nodes"].push_back(std::move(j));
  }
  doc["root"] = tree.root() ? io::Json(tree.nodes()[*tree.root()].id) : io::Json(nullptr);
  return doc;
}

Dendrogram dendrogram_from_json(const io::Json& doc, const std::string& origin) {
  auto fail = [&](const std::string& where, const std::string& what) -> LocatedError {
    return LocatedError(origin + ":" + where, what);
  };
  if (!doc.is_object()) throw fail("$", "expected a JSON object");
  if (!doc.contains("leaves") || !doc["leaves"].is_array()) throw fail("leaves", "missing leaves array");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) throw fail("nodes", "missing nodes array");

  std::vector<std::string> leaves;
  std::unordered_map<std::string, std::size_t> leaf_index;
  for (std::size_t i = 0; i < doc["leaves"].size(); ++i) {
    const auto& v = doc["leaves"][i];
    if (!v.is_string()) throw fail("leaves[" + std::to_string(i) + "]", "leaf label must be a string");
    const auto label = v.get<std::string>();
    if (!leaf_index.emplace(label, i).second) {
      throw fail("leaves[" + std::to_string(i) + "]", "duplicate leaf label '" + label + "'");
    }
    leaves.push_back(label);
  }

  const auto& jnodes = doc["nodes"];
  std::unordered_map<int, std::size_t> node_index;
  for (std::size_t k = 0; k < jnodes.size(); ++k) {
    const std::string where = "nodes[" + std::to_string(k) + "]";
    if (!jnodes[k].is_object() || !jnodes[k].contains("id") || !jnodes[k]["id"].is_number_integer()) {
      throw fail(where, "node needs an integer id");
    }
    if (!node_index.emplace(jnodes[k]["id"].get<int>(), k).second) throw fail(where, "duplicate node id");
  }

  std::vector<DendrogramNode> nodes(jnodes.size());
  for (std::size_t k = 0; k < jnodes.size(); ++k) {
    const std::string where = "nodes[" + std::to_string(k) + "]";
    const auto& j = jnodes[k];
    std::vector<io::Json> children;
    if (j.contains("children")) {
      if (!j["children"].is_array()) throw fail(where, "children must be an array");
      for (const auto& c : j["children"]) children.push_back(c);
    }
    if (j.contains("left")) children.push_back(j["left"]);
    if (j.contains("right")) children.push_back(j["right"]);
    if (children.size() != 2) {
      throw fail(where, "non-binary node (" + std::to_string(children.size()) + " children)");
    }
    auto resolve = [&](const io::Json& c) -> ChildRef {
      if (c.is_number_integer()) {
        const auto it = node_index.find(c.get<int>());
        if (it == node_index.end()) throw fail(where, "unknown child node id " + c.dump());
        if (it->second == k) throw fail(where, "cycle: node references itself");
        return ChildRef::node(it->second);
      }
      if (c.is_string()) {
        const auto s = c.get<std::string>();
        if (s.rfind(kLeafPrefix, 0) == 0) {
          const auto it = leaf_index.find(s.substr(kLeafPrefix.size()));
          if (it == leaf_index.end()) throw fail(where, "unknown leaf '" + s + "'");
          return ChildRef::leaf(it->second);
        }
      }
      throw fail(where, "child must be a node id or \"leaf:<label>\"");
    };
    nodes[k].id = j["id"].get<int>();
    nodes[k].left = resolve(children[0]);
    nodes[k].right = resolve(children[1]);
    if (!j.contains("height") || !j["height"].is_number()) throw fail(where, "missing numeric height");
    nodes[k].height = j["height"].get<double>();
    if (j.contains("p") && !j["p"].is_null()) {
      if (!j["p"].is_number()) throw fail(where, "p must be a number");
      nodes[k].p = j["p"].get<double>();
    }
  }

  Dendrogram tree;
  try {
    tree = Dendrogram(std::move(leaves), std::move(nodes));
  } catch (const LocatedError& e) {
    throw LocatedError(origin + ":" + e.location(), std::string(e.what()).substr(e.location().size() + 2));
  } catch (const Error& e) {
    throw LocatedError(origin, e.what());
  }
  if (doc.contains("root") && !doc["root"].is_null()) {
    if (!doc["root"].is_number_integer() || !tree.root() ||
        tree.nodes()[*tree.root()].id != doc["root"].get<int>()) {
      throw fail("root", "declared root does not match the tree structure");
    }
  } else if (tree.root()) {
    throw fail("root", "missing root id");
  }
  return tree;
}

void serialize_dendrogram(const Dendrogram& tree, const std::filesystem::path& path) {
  io::write_json(path, dendrogram_to_json(tree));
}

Dendrogram parse_dendrogram(const std::filesystem::path& path) {
  return dendrogram_from_json(io::read_json(path), path.string());
}

}  // namespace hiermf::hierarchy

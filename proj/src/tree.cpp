#include "semtree/tree.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "semtree/errors.hpp"

namespace semtree {

namespace {

// Shortest exact decimal form: printing with %.17g and re-parsing always
// reproduces the same double, which keeps tree files byte-stable across
// save/load cycles.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate_params(const DbscanParams& params) {
  if (params.epsilon0 <= 0.0) throw UsageError("epsilon0 must be positive");
  if (params.delta_epsilon <= 0.0) throw UsageError("delta_epsilon must be positive");
  if (params.minpts < 1) throw UsageError("minpts must be >= 1");
  if (params.max_iterations < 1) throw UsageError("max_iterations must be >= 1");
}

}  // namespace

std::string node_name(const TreeNode& node) {
  return "L" + std::to_string(node.layer) + "C" + std::to_string(node.cluster);
}

std::vector<TreeNode> SemanticTree::children(const TreeNode& node) const {
  std::vector<TreeNode> out;
  if (node.layer == 0) return out;
  const auto& below = parents[static_cast<size_t>(node.layer - 1)];
  for (int c = 0; c < static_cast<int>(below.size()); ++c) {
    if (below[static_cast<size_t>(c)] == node.cluster) out.push_back({node.layer - 1, c});
  }
  return out;
}

void SemanticTree::finalize() {
  // Parent of (L, c) is the cluster at layer L+1 holding the majority of
  // c's assigned points; ties break toward the lowest cluster id.
  parents.clear();
  const int K = layer_count();
  parents.resize(static_cast<size_t>(std::max(0, K - 1)));
  for (int L = 0; L + 1 < K; ++L) {
    const auto& cur = layers[static_cast<size_t>(L)].assignment;
    const auto& next = layers[static_cast<size_t>(L + 1)].assignment;
    std::vector<std::map<int, int>> tally(
        static_cast<size_t>(layers[static_cast<size_t>(L)].cluster_count));
    for (int i = 0; i < n_points; ++i) {
      const int c = cur[i];
      if (c == kNoise) continue;
      const int cp = next[i];
      if (cp == kNoise) {
        throw StageError("internal: point " + std::to_string(i) +
                         " clustered at layer " + std::to_string(L) +
                         " became noise at layer " + std::to_string(L + 1));
      }
      ++tally[static_cast<size_t>(c)][cp];
    }
    auto& row = parents[static_cast<size_t>(L)];
    row.resize(tally.size());
    for (size_t c = 0; c < tally.size(); ++c) {
      int best = -1, best_count = 0;
      for (const auto& [cp, cnt] : tally[c]) {  // std::map: ascending cp
        if (cnt > best_count) {
          best = cp;
          best_count = cnt;
        }
      }
      if (best < 0) throw StageError("internal: empty cluster in layer tally");
      row[c] = best;
    }
  }
  rebuild_members();
}

void SemanticTree::rebuild_members() {
  const int K = layer_count();
  members_.assign(static_cast<size_t>(K), {});
  for (int L = 0; L < K; ++L) {
    auto& layer_members = members_[static_cast<size_t>(L)];
    layer_members.assign(static_cast<size_t>(layers[static_cast<size_t>(L)].cluster_count), {});
    const auto& assign = layers[static_cast<size_t>(L)].assignment;
    for (int i = 0; i < n_points; ++i) {
      if (assign[i] != kNoise) layer_members[static_cast<size_t>(assign[i])].push_back(i);
    }
    if (L > 0) {
      const auto& child_parents = parents[static_cast<size_t>(L - 1)];
      for (size_t cc = 0; cc < child_parents.size(); ++cc) {
        auto& target = layer_members[static_cast<size_t>(child_parents[cc])];
        const auto& child = members_[static_cast<size_t>(L - 1)][cc];
        target.insert(target.end(), child.begin(), child.end());
      }
      for (auto& m : layer_members) {
        std::sort(m.begin(), m.end());
        m.erase(std::unique(m.begin(), m.end()), m.end());
      }
    }
  }
}

SemanticTree build_tree(NeighborIndex& index, const DbscanParams& params,
                        BuildReport* report,
                        const std::function<void(const PassRecord&)>& on_pass) {
  validate_params(params);
  SemanticTree tree;
  tree.params = params;
  tree.n_points = static_cast<int>(index.size());

  bool root_reached = false;
  long pass = 0;
  for (; pass < params.max_iterations && !root_reached; ++pass) {
    const double eps = params.epsilon0 + static_cast<double>(pass) * params.delta_epsilon;
    const QueryStats before = index.stats();
    ClusterLayer layer = dbscan(index, eps, params.minpts);
    const QueryStats after = index.stats();

    const int noise = layer.noise_count();
    const int clusters = layer.cluster_count;
    const bool covers_all = clusters == 1 && noise == 0;
    bool store;
    if (tree.layers.empty()) {
      store = clusters >= 1;
    } else {
      store = (clusters >= 1 && clusters < tree.layers.back().cluster_count) || covers_all;
    }
    if (store) {
      layer.layer_index = static_cast<int>(tree.layers.size());
      tree.layers.push_back(std::move(layer));
      if (covers_all) root_reached = true;
    }

    if (report || on_pass) {
      PassRecord record;
      record.pass = pass;
      record.epsilon = eps;
      record.clusters = clusters;
      record.noise = noise;
      record.stored = store;
      record.work.queries = after.queries - before.queries;
      record.work.points_examined = after.points_examined - before.points_examined;
      record.work.points_returned = after.points_returned - before.points_returned;
      if (report) report->passes.push_back(record);
      if (on_pass) on_pass(record);
    }
  }

  if (!root_reached) {
    if (tree.layers.empty()) {
      throw StageError("tree build: no cluster formed within max_iterations=" +
                       std::to_string(params.max_iterations) + " passes");
    }
    ClusterLayer root;
    root.layer_index = static_cast<int>(tree.layers.size());
    root.epsilon = params.epsilon0 + static_cast<double>(pass) * params.delta_epsilon;
    root.assignment = Eigen::VectorXi::Zero(tree.n_points);
    root.cluster_count = 1;
    tree.layers.push_back(std::move(root));
    tree.synthetic_root = true;
  }

  tree.finalize();
  return tree;
}

std::vector<TreeNode> attach_documents(const SemanticTree& tree) {
  std::vector<TreeNode> attachment(static_cast<size_t>(tree.n_points), tree.root());
  for (int i = 0; i < tree.n_points; ++i) {
    for (int L = 0; L < tree.layer_count(); ++L) {
      const int c = tree.layers[static_cast<size_t>(L)].assignment[i];
      if (c != kNoise) {
        attachment[static_cast<size_t>(i)] = {L, c};
        break;
      }
    }
  }
  return attachment;
}

void save_tree(const SemanticTree& tree, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StageError("cannot write tree file: " + path);

  out << "SEMTREE 1\n";
  out << "METRIC " << to_string(tree.params.metric) << '\n';
  out << "PARAMS " << fmt_double(tree.params.epsilon0) << ' '
      << fmt_double(tree.params.delta_epsilon) << ' ' << tree.params.minpts << ' '
      << tree.params.max_iterations << '\n';
  out << "POINTS " << tree.n_points << '\n';
  out << "SYNTHETIC_ROOT " << (tree.synthetic_root ? 1 : 0) << '\n';
  out << "LAYERS " << tree.layer_count() << '\n';

  for (const auto& layer : tree.layers) {
    out << "LAYER " << layer.layer_index << ' ' << fmt_double(layer.epsilon) << ' '
        << layer.cluster_count << '\n';
    out << "RLE";
    int i = 0;
    while (i < tree.n_points) {
      const int value = layer.assignment[i];
      int run = 1;
      while (i + run < tree.n_points && layer.assignment[i + run] == value) ++run;
      out << ' ' << value << ':' << run;
      i += run;
    }
    out << '\n';
  }

  for (int L = 0; L + 1 < tree.layer_count(); ++L) {
    const auto& row = tree.parents[static_cast<size_t>(L)];
    for (int c = 0; c < static_cast<int>(row.size()); ++c) {
      out << "EDGE " << L << ':' << c << ' ' << (L + 1) << ':'
          << row[static_cast<size_t>(c)] << '\n';
    }
  }
  out << "END\n";
  if (!out) throw StageError("write failed: " + path);
}

namespace {

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(std::string("tree file truncated, expected ") + what);
  }
  return line;
}

}  // namespace

SemanticTree load_tree(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tree file: " + path);

  SemanticTree tree;
  if (expect_line(in, "header") != "SEMTREE 1") {
    throw DataError("tree file: bad header");
  }
  {
    std::istringstream ls(expect_line(in, "METRIC"));
    std::string kw, metric;
    ls >> kw >> metric;
    if (kw != "METRIC") throw DataError("tree file: expected METRIC");
    tree.params.metric = metric_from_string(metric);
  }
  {
    std::istringstream ls(expect_line(in, "PARAMS"));
    std::string kw;
    ls >> kw >> tree.params.epsilon0 >> tree.params.delta_epsilon >> tree.params.minpts >>
        tree.params.max_iterations;
    if (kw != "PARAMS" || !ls) throw DataError("tree file: malformed PARAMS");
  }
  {
    std::istringstream ls(expect_line(in, "POINTS"));
    std::string kw;
    ls >> kw >> tree.n_points;
    if (kw != "POINTS" || !ls || tree.n_points < 0) throw DataError("tree file: malformed POINTS");
  }
  {
    std::istringstream ls(expect_line(in, "SYNTHETIC_ROOT"));
    std::string kw;
    int flag = 0;
    ls >> kw >> flag;
    if (kw != "SYNTHETIC_ROOT" || !ls) throw DataError("tree file: malformed SYNTHETIC_ROOT");
    tree.synthetic_root = flag != 0;
  }
  int layer_count = 0;
  {
    std::istringstream ls(expect_line(in, "LAYERS"));
    std::string kw;
    ls >> kw >> layer_count;
    if (kw != "LAYERS" || !ls || layer_count < 1) throw DataError("tree file: malformed LAYERS");
  }

  for (int L = 0; L < layer_count; ++L) {
    ClusterLayer layer;
    {
      std::istringstream ls(expect_line(in, "LAYER"));
      std::string kw;
      ls >> kw >> layer.layer_index >> layer.epsilon >> layer.cluster_count;
      if (kw != "LAYER" || !ls) throw DataError("tree file: malformed LAYER line");
      if (layer.layer_index != L) throw DataError("tree file: layer indices out of order");
    }
    {
      std::istringstream ls(expect_line(in, "RLE"));
      std::string kw;
      ls >> kw;
      if (kw != "RLE") throw DataError("tree file: expected RLE line");
      layer.assignment.resize(tree.n_points);
      int filled = 0;
      std::string token;
      while (ls >> token) {
        const auto colon = token.find(':');
        if (colon == std::string::npos) throw DataError("tree file: malformed RLE token " + token);
        const int value = std::stoi(token.substr(0, colon));
        const int run = std::stoi(token.substr(colon + 1));
        if (run <= 0 || filled + run > tree.n_points) {
          throw DataError("tree file: RLE overruns assignment vector");
        }
        for (int r = 0; r < run; ++r) layer.assignment[filled++] = value;
      }
      if (filled != tree.n_points) {
        throw DataError("tree file: RLE covers " + std::to_string(filled) + " of " +
                        std::to_string(tree.n_points) + " points");
      }
    }
    tree.layers.push_back(std::move(layer));
  }

  tree.parents.resize(static_cast<size_t>(std::max(0, layer_count - 1)));
  for (int L = 0; L + 1 < layer_count; ++L) {
    tree.parents[static_cast<size_t>(L)].assign(
        static_cast<size_t>(tree.layers[static_cast<size_t>(L)].cluster_count), -1);
  }
  std::string line;
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (line == "END") {
      saw_end = true;
      break;
    }
    std::istringstream ls(line);
    std::string kw, child, parent;
    ls >> kw >> child >> parent;
    if (kw != "EDGE" || !ls) throw DataError("tree file: malformed EDGE line: " + line);
    const auto parse_ref = [](const std::string& ref) {
      const auto colon = ref.find(':');
      if (colon == std::string::npos) throw DataError("tree file: malformed node ref " + ref);
      return std::pair<int, int>{std::stoi(ref.substr(0, colon)),
                                 std::stoi(ref.substr(colon + 1))};
    };
    const auto [cl, cc] = parse_ref(child);
    const auto [pl, pc] = parse_ref(parent);
    if (cl < 0 || cl + 1 >= layer_count || pl != cl + 1 ||
        cc >= tree.layers[static_cast<size_t>(cl)].cluster_count ||
        pc >= tree.layers[static_cast<size_t>(pl)].cluster_count || cc < 0 || pc < 0) {
      throw DataError("tree file: EDGE references unknown node: " + line);
    }
    tree.parents[static_cast<size_t>(cl)][static_cast<size_t>(cc)] = pc;
  }
  if (!saw_end) throw DataError("tree file: missing END");
  for (int L = 0; L + 1 < layer_count; ++L) {
    for (int c = 0; c < tree.layers[static_cast<size_t>(L)].cluster_count; ++c) {
      if (tree.parents[static_cast<size_t>(L)][static_cast<size_t>(c)] < 0) {
        throw DataError("tree file: node L" + std::to_string(L) + "C" + std::to_string(c) +
                        " has no parent edge");
      }
    }
  }

  tree.rebuild_members();
  return tree;
}

void validate_tree(const SemanticTree& tree) {
  const int K = tree.layer_count();
  if (K == 0) throw DataError("tree invariant: no stored layers");

  for (int L = 0; L < K; ++L) {
    const auto& layer = tree.layers[static_cast<size_t>(L)];
    if (layer.assignment.size() != tree.n_points) {
      throw DataError("tree invariant: assignment length mismatch at layer " + std::to_string(L));
    }
    std::vector<int> sizes(static_cast<size_t>(layer.cluster_count), 0);
    for (int i = 0; i < tree.n_points; ++i) {
      const int c = layer.assignment[i];
      if (c == kNoise) continue;
      if (c < 0 || c >= layer.cluster_count) {
        throw DataError("tree invariant: cluster id out of range at layer " + std::to_string(L));
      }
      ++sizes[static_cast<size_t>(c)];
    }
    for (int c = 0; c < layer.cluster_count; ++c) {
      if (sizes[static_cast<size_t>(c)] == 0) {
        throw DataError("tree invariant: empty cluster id " + std::to_string(c) + " at layer " +
                        std::to_string(L));
      }
    }
    if (L > 0 && layer.epsilon <= tree.layers[static_cast<size_t>(L - 1)].epsilon) {
      throw DataError("tree invariant: epsilon not increasing at layer " + std::to_string(L));
    }
  }

  // Cluster counts strictly decrease. The one tolerated exception: a
  // single-cluster-with-noise layer 0 followed directly by the all-points
  // root, both with count 1.
  for (int L = 0; L + 1 < K; ++L) {
    const int cur = tree.layers[static_cast<size_t>(L)].cluster_count;
    const int nxt = tree.layers[static_cast<size_t>(L + 1)].cluster_count;
    const bool corner = cur == 1 && nxt == 1 && L + 2 == K &&
                        tree.layers[static_cast<size_t>(L)].noise_count() > 0;
    if (!(nxt < cur || corner)) {
      throw DataError("tree invariant: cluster counts not strictly decreasing at layer " +
                      std::to_string(L + 1));
    }
  }

  for (int L = 0; L + 1 < K; ++L) {
    if (tree.layers[static_cast<size_t>(L + 1)].noise_count() >
        tree.layers[static_cast<size_t>(L)].noise_count()) {
      throw DataError("tree invariant: noise count increased at layer " + std::to_string(L + 1));
    }
  }

  const auto& root_layer = tree.layers[static_cast<size_t>(K - 1)];
  if (root_layer.cluster_count != 1 || root_layer.noise_count() != 0) {
    throw DataError("tree invariant: final layer is not an all-points root");
  }

  // Strict nesting via parent edges.
  for (int L = 0; L + 1 < K; ++L) {
    for (int c = 0; c < tree.layers[static_cast<size_t>(L)].cluster_count; ++c) {
      const int p = tree.parents[static_cast<size_t>(L)][static_cast<size_t>(c)];
      const auto& child = tree.members(L, c);
      const auto& parent = tree.members(L + 1, p);
      if (!std::includes(parent.begin(), parent.end(), child.begin(), child.end())) {
        throw DataError("tree invariant: members of L" + std::to_string(L) + "C" +
                        std::to_string(c) + " are not nested in their parent");
      }
    }
  }
}

}  // namespace semtree

#include "semtree/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "semtree/errors.hpp"

namespace semtree {

namespace {

inline std::int64_t pairs2(std::int64_t x) { return x * (x - 1) / 2; }

std::string fmt_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

ContingencyTable ContingencyTable::transposed() const {
  ContingencyTable t;
  t.counts = counts.transpose();
  t.row_sums = col_sums;
  t.col_sums = row_sums;
  t.total = total;
  return t;
}

std::vector<int> encode_labels(const std::vector<std::string>& labels) {
  std::vector<int> codes;
  codes.reserve(labels.size());
  std::unordered_map<std::string, int> index;
  for (const auto& label : labels) {
    auto [it, inserted] = index.emplace(label, static_cast<int>(index.size()));
    codes.push_back(it->second);
  }
  return codes;
}

ContingencyTable contingency(const Eigen::Ref<const Eigen::VectorXi>& pred,
                             const std::vector<int>& truth) {
  if (static_cast<size_t>(pred.size()) != truth.size()) {
    throw DataError("contingency: prediction and truth lengths differ");
  }

  // Dense re-encoding over the covered subset keeps the table minimal.
  std::unordered_map<int, int> row_of, col_of;
  std::vector<std::pair<int, int>> cells;
  cells.reserve(static_cast<size_t>(pred.size()));
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (pred[i] == kNoise) continue;
    if (truth[static_cast<size_t>(i)] < 0) {
      throw DataError("contingency: covered point " + std::to_string(i) + " has no label");
    }
    auto [rit, r_new] = row_of.emplace(pred[i], static_cast<int>(row_of.size()));
    auto [cit, c_new] = col_of.emplace(truth[static_cast<size_t>(i)],
                                       static_cast<int>(col_of.size()));
    cells.emplace_back(rit->second, cit->second);
  }
  if (cells.empty()) throw DataError("contingency: all points are noise");

  ContingencyTable table;
  const int r = static_cast<int>(row_of.size());
  const int s = static_cast<int>(col_of.size());
  table.counts.setZero(r, s);
  for (const auto& [row, col] : cells) ++table.counts(row, col);
  table.row_sums.assign(static_cast<size_t>(r), 0);
  table.col_sums.assign(static_cast<size_t>(s), 0);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < s; ++j) {
      table.row_sums[static_cast<size_t>(i)] += table.counts(i, j);
      table.col_sums[static_cast<size_t>(j)] += table.counts(i, j);
    }
  }
  table.total = static_cast<std::int64_t>(cells.size());
  return table;
}

double adjusted_rand_index(const ContingencyTable& table) {
  const std::int64_t m = table.total;
  if (m < 2) throw DataError("adjusted_rand_index: needs at least 2 covered points");

  std::int64_t sum_cells = 0;
  for (Eigen::Index i = 0; i < table.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.counts.cols(); ++j) {
      sum_cells += pairs2(table.counts(i, j));
    }
  }
  std::int64_t sum_rows = 0, sum_cols = 0;
  for (auto a : table.row_sums) sum_rows += pairs2(a);
  for (auto b : table.col_sums) sum_cols += pairs2(b);

  // Identical partitions (every pair co-assigned in one iff in the other),
  // which also covers both degenerate extremes.
  if (sum_cells == sum_rows && sum_cells == sum_cols) return 1.0;

  const double expected = static_cast<double>(sum_rows) * static_cast<double>(sum_cols) /
                          static_cast<double>(pairs2(m));
  const double maximum = 0.5 * (static_cast<double>(sum_rows) + static_cast<double>(sum_cols));
  return (static_cast<double>(sum_cells) - expected) / (maximum - expected);
}

double normalized_mutual_information(const ContingencyTable& table) {
  const std::int64_t m = table.total;
  if (m < 1) throw DataError("normalized_mutual_information: empty table");
  const double dm = static_cast<double>(m);

  double h_rows = 0.0, h_cols = 0.0;
  for (auto a : table.row_sums) {
    if (a > 0) {
      const double p = static_cast<double>(a) / dm;
      h_rows -= p * std::log(p);
    }
  }
  for (auto b : table.col_sums) {
    if (b > 0) {
      const double p = static_cast<double>(b) / dm;
      h_cols -= p * std::log(p);
    }
  }
  if (h_rows == 0.0 && h_cols == 0.0) return 1.0;
  if (h_rows == 0.0 || h_cols == 0.0) return 0.0;

  double mi = 0.0;
  for (Eigen::Index i = 0; i < table.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.counts.cols(); ++j) {
      const std::int64_t nij = table.counts(i, j);
      if (nij == 0) continue;
      const double pij = static_cast<double>(nij) / dm;
      mi += pij * std::log(dm * static_cast<double>(nij) /
                           (static_cast<double>(table.row_sums[static_cast<size_t>(i)]) *
                            static_cast<double>(table.col_sums[static_cast<size_t>(j)])));
    }
  }
  const double nmi = mi / (0.5 * (h_rows + h_cols));
  return std::clamp(nmi, 0.0, 1.0);
}

std::vector<LayerScore> score_layers(const SemanticTree& tree, const std::vector<int>& truth) {
  if (truth.size() != static_cast<size_t>(tree.n_points)) {
    throw DataError("score_layers: truth length does not match point count");
  }
  if (std::any_of(truth.begin(), truth.end(), [](int t) { return t < 0; })) {
    throw DataError("score_layers: corpus is not fully labeled");
  }

  std::vector<LayerScore> scores;
  scores.reserve(static_cast<size_t>(tree.layer_count()));
  for (const auto& layer : tree.layers) {
    const ContingencyTable table = contingency(layer.assignment, truth);
    LayerScore score;
    score.layer_index = layer.layer_index;
    score.epsilon = layer.epsilon;
    score.covered_count = static_cast<int>(table.total);
    if (table.total >= 2) {
      score.ari = adjusted_rand_index(table);
      score.nmi = normalized_mutual_information(table);
    } else {
      // A single covered point: both partitions are trivially identical.
      score.ari = 1.0;
      score.nmi = 1.0;
    }
    scores.push_back(score);
  }
  return scores;
}

void write_scores(const std::vector<LayerScore>& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StageError("cannot write score file: " + path);
  out << "layer\tepsilon\tcovered\tari\tnmi\n";
  char eps[40];
  for (const auto& s : scores) {
    std::snprintf(eps, sizeof(eps), "%.17g", s.epsilon);
    out << s.layer_index << '\t' << eps << '\t' << s.covered_count << '\t'
        << fmt_score(s.ari) << '\t' << fmt_score(s.nmi) << '\n';
  }
  if (!out) throw StageError("write failed: " + path);
}

void write_scores_long(const std::vector<LayerScore>& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StageError("cannot write score file: " + path);
  out << "layer\tepsilon\tmetric\tvalue\n";
  char eps[40];
  for (const auto& s : scores) {
    std::snprintf(eps, sizeof(eps), "%.17g", s.epsilon);
    out << s.layer_index << '\t' << eps << "\tcovered\t" << s.covered_count << '\n';
    out << s.layer_index << '\t' << eps << "\tari\t" << fmt_score(s.ari) << '\n';
    out << s.layer_index << '\t' << eps << "\tnmi\t" << fmt_score(s.nmi) << '\n';
  }
  if (!out) throw StageError("write failed: " + path);
}

}  // namespace semtree

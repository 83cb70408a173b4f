#include "semtree/color.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "semtree/errors.hpp"

namespace semtree {

Rgb parse_hex_color(const std::string& hex) {
  if (hex.size() != 7 || hex[0] != '#') {
    throw UsageError("expected color in #RRGGBB form, got '" + hex + "'");
  }
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw UsageError("invalid hex digit in color '" + hex + "'");
  };
  Rgb out;
  for (int i = 0; i < 3; ++i) {
    out[static_cast<size_t>(i)] =
        static_cast<std::uint8_t>(nibble(hex[1 + 2 * i]) * 16 + nibble(hex[2 + 2 * i]));
  }
  return out;
}

std::string to_hex(const Rgb& color) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", color[0], color[1], color[2]);
  return buf;
}

namespace {

// Subtractive blend from white: t pulls toward the target anchor, o toward
// the complement anchor; both together sink the channels toward black.
Rgb blend(double t, double o, const ColorScheme& scheme) {
  Rgb out;
  for (size_t c = 0; c < 3; ++c) {
    const double pull_t = t * (255.0 - static_cast<double>(scheme.blue[c]));
    const double pull_o = o * (255.0 - static_cast<double>(scheme.orange[c]));
    const double value = std::clamp(255.0 - pull_t - pull_o, 0.0, 255.0);
    out[c] = static_cast<std::uint8_t>(std::lround(value));
  }
  return out;
}

double log_scale(std::int64_t count, std::int64_t max_count) {
  if (max_count <= 0 || count <= 0) return 0.0;
  return std::log1p(static_cast<double>(count)) / std::log1p(static_cast<double>(max_count));
}

}  // namespace

ColorMap color_by_label(const SemanticTree& tree, const std::vector<std::string>& labels,
                        const std::string& target, const ColorScheme& scheme) {
  if (labels.size() != static_cast<size_t>(tree.n_points)) {
    throw DataError("color_by_label: label vector length mismatch");
  }
  const bool known = std::find(labels.begin(), labels.end(), target) != labels.end();
  if (!known) throw DataError("color_by_label: unknown target label '" + target + "'");

  ColorMap map;
  map.target_label = target;
  for (int L = 0; L < tree.layer_count(); ++L) {
    for (int c = 0; c < tree.layers[static_cast<size_t>(L)].cluster_count; ++c) {
      NodeColor entry;
      entry.node = {L, c};
      const auto& members = tree.members(L, c);
      entry.total_count = static_cast<std::int64_t>(members.size());
      for (int i : members) {
        if (labels[static_cast<size_t>(i)] == target) ++entry.target_count;
      }
      map.entries.push_back(entry);
    }
  }

  std::int64_t max_target = 0, max_other = 0;
  for (const auto& e : map.entries) {
    max_target = std::max(max_target, e.target_count);
    max_other = std::max(max_other, e.total_count - e.target_count);
  }
  for (auto& e : map.entries) {
    e.intensity = log_scale(e.target_count, max_target);
    const double other = log_scale(e.total_count - e.target_count, max_other);
    e.color = blend(e.intensity, other, scheme);
  }
  return map;
}

void export_color_annotations(const ColorMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StageError("cannot write color file: " + path);
  out << "# node\tcolor\ttarget=" << map.target_label << '\n';
  for (const auto& e : map.entries) {
    out << node_name(e.node) << '\t' << to_hex(e.color) << '\n';
  }
  if (!out) throw StageError("write failed: " + path);
}

}  // namespace semtree

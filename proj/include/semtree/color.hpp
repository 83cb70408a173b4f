#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semtree/tree.hpp"

namespace semtree {

using Rgb = std::array<std::uint8_t, 3>;

// Two-tone scheme: nodes rich in the target label pull from white toward
// blue, nodes rich in everything else pull toward orange, and nodes strong
// in both darken toward black.
struct ColorScheme {
  Rgb blue{0x1F, 0x4E, 0x9C};
  Rgb orange{0xE8, 0x77, 0x22};
};

Rgb parse_hex_color(const std::string& hex);  // "#RRGGBB"
std::string to_hex(const Rgb& color);

struct NodeColor {
  TreeNode node;
  std::int64_t target_count = 0;
  std::int64_t total_count = 0;
  double intensity = 0.0;  // log(1+target) / log(1+max target over nodes)
  Rgb color{0xFF, 0xFF, 0xFF};
};

struct ColorMap {
  std::string target_label;
  std::vector<NodeColor> entries;  // layer-major, cluster ascending
};

// Counts per node are taken over the full member sets. Intensities scale
// logarithmically against the largest per-node target count; the complement
// population is scaled the same way against its own maximum.
ColorMap color_by_label(const SemanticTree& tree, const std::vector<std::string>& labels,
                        const std::string& target, const ColorScheme& scheme = {});

// Writes `node_label<TAB>#RRGGBB` lines after a comment header, one entry
// per tree node.
void export_color_annotations(const ColorMap& map, const std::string& path);

}  // namespace semtree

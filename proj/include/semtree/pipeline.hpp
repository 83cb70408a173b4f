#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semtree/annotate.hpp"
#include "semtree/projection.hpp"
#include "semtree/tree.hpp"

namespace semtree {

// Declarative description of a full run: inputs, algorithm parameters and
// which optional stages to execute. Loaded from a JSON file; CLI flags
// override individual fields and the effective values are echoed into the
// run manifest.
struct PipelineConfig {
  std::string embeddings;              // required input
  std::optional<std::string> metadata;
  std::optional<std::string> labels;   // separate label file (id order or keyed)
  std::string output_dir = "out";

  Metric metric = Metric::kL2;
  int pca_k = 2;                       // 0 disables the projection stage
  double epsilon0 = 0.0;
  double delta_epsilon = 0.0;
  int minpts = 5;
  long max_iterations = 100000;
  std::uint64_t seed = 0;

  bool newick_with_documents = true;
  std::optional<std::string> color_target;
  std::string color_blue = "#1F4E9C";
  std::string color_orange = "#E87722";

  bool annotate = false;
  bool annotate_mock = true;           // mock client unless an endpoint is configured
  std::string annotate_model;
  std::string annotate_repair_model;
  std::optional<std::string> prompts_dir;
  AnnotationConfig annotation;

  bool verbose = false;
};

PipelineConfig load_pipeline_config(const std::string& path);

struct ManifestArtifact {
  std::string name;
  std::string path;
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string config_json;  // effective configuration, serialized
  std::vector<ManifestArtifact> artifacts;
  BuildReport build_report;

  const ManifestArtifact* find(const std::string& name) const;
};

// Executes ingest -> pca -> tree -> score -> newick -> color -> annotate,
// skipping stages the config leaves unset, and writes all artifacts plus
// manifest.json into output_dir. A stage failure aborts the stages that
// depend on it with a StageError naming the stage.
RunManifest run_pipeline(const PipelineConfig& config);

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace semtree

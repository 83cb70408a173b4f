#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semtree/completion.hpp"
#include "semtree/corpus.hpp"
#include "semtree/tree.hpp"

namespace semtree {

// Knobs of the node-labeling protocol. A node whose member count exceeds
// chunk_limit is annotated via ceil(oversample_factor * n / chunk_limit)
// independently sampled chunks whose labels a second pass reconciles.
struct AnnotationConfig {
  int chunk_limit = 1500;
  int oversample_factor = 3;
  long token_budget = 600000;   // estimated at 4 characters per token
  int max_label_length = 80;    // repair triggers beyond this, or on newlines
  int repair_attempts = 2;
  long repair_tail_chars = 20000;  // only this much of a bad answer is re-sent
  int concurrency = 4;
  std::uint64_t seed = 0;
};

enum class Provenance {
  kDirect,
  kChunkedReconciled,
  kFallbackRepaired,
  kChunkedAndRepaired,
};

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct AnnotationRecord {
  TreeNode node;
  std::string label;
  Provenance provenance = Provenance::kDirect;
  std::vector<std::string> raw_responses;
};

// Prompt templates with {placeholder} substitution; editable via a prompts
// directory, with built-in defaults.
struct PromptTemplates {
  std::string infer;      // {documents}
  std::string reconcile;  // {labels}
  std::string repair;     // {answer}
  std::string transcribe; // {label} {categories}

  static PromptTemplates defaults();
  static PromptTemplates load_dir(const std::string& dir);  // missing files keep defaults
};

// Sampling plan for one node of n member texts: a single chunk of all ids
// when n <= limit, otherwise s = ceil(factor*n/limit) chunks of `limit` ids
// each, drawn uniformly without replacement, independently per chunk from a
// generator seeded by (seed, chunk index). Each chunk comes back sorted.
std::vector<std::vector<int>> plan_chunks(int n, int limit, int factor, std::uint64_t seed);

// One inference call over a chunk of texts. Texts that would push the
// estimated token count past the budget are dropped from the tail (the call
// is still made); a note lands in `warnings` when that happens. Returns the
// model's raw answer.
std::string annotate_chunk(const std::vector<std::string>& texts, CompletionClient& client,
                           const PromptTemplates& prompts, const AnnotationConfig& config,
                           std::uint64_t call_seed, std::vector<std::string>* warnings = nullptr);

struct RepairOutcome {
  std::string label;
  bool repaired = false;       // a repair model call was needed
  bool gave_up = false;        // repairs failed; label is the truncation fallback
  std::vector<std::string> raw_responses;
};

// Accepts single-line answers up to the length limit as-is (trimmed, no
// model call). Anything else is cut to its trailing repair_tail_chars and
// sent to the repair model up to repair_attempts times; if all attempts
// still misbehave, the first max_label_length characters of the first
// non-empty line are used and the outcome is flagged.
RepairOutcome repair_label(const std::string& raw, CompletionClient& repair_client,
                           const PromptTemplates& prompts, const AnnotationConfig& config,
                           std::uint64_t call_seed);

// Merges s chunk labels into one. s == 1 returns the label unchanged with
// no model call; otherwise a single reconciliation call is made and its
// answer goes through repair_label.
RepairOutcome reconcile(const std::vector<std::string>& labels, CompletionClient& client,
                        CompletionClient& repair_client, const PromptTemplates& prompts,
                        const AnnotationConfig& config, std::uint64_t call_seed);

struct AnnotateResult {
  std::vector<AnnotationRecord> records;   // one per newly annotated node
  std::vector<std::string> errors;         // per-node failures, run continues
  std::vector<std::string> warnings;
  int skipped_resumed = 0;                 // nodes already in the ledger
};

// Annotates every node of the tree (optionally restricted to the given
// stored layers), nodes in layer-major order. Completed nodes are appended
// to the ledger file immediately, and nodes already present in the ledger
// are skipped, so an interrupted run resumes without repeating model calls.
// Chunks within a node may run concurrently; outputs are ordered by chunk
// index, so results under a deterministic client do not depend on
// scheduling.
AnnotateResult annotate_tree(const SemanticTree& tree, const Corpus& corpus,
                             CompletionClient& client, CompletionClient& repair_client,
                             const PromptTemplates& prompts, const AnnotationConfig& config,
                             const std::optional<std::set<int>>& layer_filter = std::nullopt,
                             const std::optional<std::string>& ledger_path = std::nullopt);

// Reads `node<TAB>provenance<TAB>label` ledger lines.
std::vector<AnnotationRecord> load_annotation_ledger(const std::string& path);

struct TranscriptionResult {
  std::map<std::string, std::string> mapping;  // label -> category or "UNMAPPED"
  std::vector<std::string> errors;
};

inline constexpr const char* kUnmapped = "UNMAPPED";

// Maps free-form labels onto a fixed taxonomy. The model must answer with
// one category verbatim; a non-matching answer is retried once and then
// recorded as UNMAPPED. Transport failures are collected per label.
TranscriptionResult transcribe_labels(const std::vector<std::string>& unique_labels,
                                      const std::vector<std::string>& taxonomy,
                                      CompletionClient& client, const PromptTemplates& prompts,
                                      const AnnotationConfig& config);

}  // namespace semtree

#include "semtree/annotate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

#include "semtree/errors.hpp"
#include "semtree/hash.hpp"
#include "semtree/rng.hpp"

namespace semtree {

namespace {

std::string trim(const std::string& s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

bool is_valid_label(const std::string& trimmed, const AnnotationConfig& config) {
  return !trimmed.empty() && trimmed.find('\n') == std::string::npos &&
         trimmed.size() <= static_cast<size_t>(config.max_label_length);
}

std::string first_nonempty_line(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty()) return t;
  }
  return "";
}

void replace_all(std::string& text, const std::string& placeholder, const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
}

std::string bullet_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    out += "- ";
    out += item;
    out.push_back('\n');
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string read_file_if_exists(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string single_call(CompletionClient& client, const std::string& prompt,
                        std::uint64_t seed) {
  CompletionRequest request;
  request.messages.push_back({"user", prompt});
  request.seed = seed;
  return client.complete(request);
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kDirect: return "direct";
    case Provenance::kChunkedReconciled: return "chunked_reconciled";
    case Provenance::kFallbackRepaired: return "fallback_repaired";
    case Provenance::kChunkedAndRepaired: return "chunked_and_repaired";
  }
  return "direct";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "direct") return Provenance::kDirect;
  if (s == "chunked_reconciled") return Provenance::kChunkedReconciled;
  if (s == "fallback_repaired") return Provenance::kFallbackRepaired;
  if (s == "chunked_and_repaired") return Provenance::kChunkedAndRepaired;
  throw DataError("unknown provenance: " + s);
}

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.infer =
      "You are given a sample of documents that belong to one semantic cluster.\n"
      "Documents:\n"
      "---\n"
      "{documents}\n"
      "---\n"
      "Name the single research field that unifies these documents.\n"
      "Answer with exactly one field name on a single line, at most 80 characters.\n";
  t.reconcile =
      "The following field labels were produced for independent samples of one\n"
      "document cluster.\n"
      "Candidate subfield labels:\n"
      "{labels}\n"
      "\n"
      "Name the single overarching research field encompassing all of them.\n"
      "Answer with exactly one field name on a single line, at most 80 characters.\n";
  t.repair =
      "A model was asked to name a single research field but its answer was\n"
      "malformed. Previous answer (possibly truncated):\n"
      "{answer}\n"
      "\n"
      "Decide from this answer on a single research field.\n"
      "Answer with exactly one field name on a single line, at most 80 characters.\n";
  t.transcribe =
      "Classify the given label into exactly one category of a fixed taxonomy.\n"
      "Label: {label}\n"
      "Categories:\n"
      "{categories}\n"
      "\n"
      "Answer with exactly one category name, copied verbatim, on a single line.\n";
  return t;
}

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
  PromptTemplates t = defaults();
  if (auto s = read_file_if_exists(dir + "/infer_field.txt"); !s.empty()) t.infer = s;
  if (auto s = read_file_if_exists(dir + "/reconcile.txt"); !s.empty()) t.reconcile = s;
  if (auto s = read_file_if_exists(dir + "/repair.txt"); !s.empty()) t.repair = s;
  if (auto s = read_file_if_exists(dir + "/transcribe.txt"); !s.empty()) t.transcribe = s;
  return t;
}

std::vector<std::vector<int>> plan_chunks(int n, int limit, int factor, std::uint64_t seed) {
  if (n < 1) throw UsageError("plan_chunks: need at least one member");
  if (limit < 1 || factor < 1) throw UsageError("plan_chunks: limit and factor must be positive");

  std::vector<std::vector<int>> chunks;
  if (n <= limit) {
    chunks.emplace_back(static_cast<size_t>(n));
    std::iota(chunks.back().begin(), chunks.back().end(), 0);
    return chunks;
  }

  const long long s = (static_cast<long long>(factor) * n + limit - 1) / limit;
  chunks.reserve(static_cast<size_t>(s));
  std::vector<int> ids(static_cast<size_t>(n));
  for (long long c = 0; c < s; ++c) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(c)));
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<int> chunk(static_cast<size_t>(limit));
    for (int t = 0; t < limit; ++t) {  // partial Fisher-Yates
      const auto j = t + static_cast<int>(rng.u64_below(static_cast<std::uint64_t>(n - t)));
      std::swap(ids[static_cast<size_t>(t)], ids[static_cast<size_t>(j)]);
      chunk[static_cast<size_t>(t)] = ids[static_cast<size_t>(t)];
    }
    std::sort(chunk.begin(), chunk.end());
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

std::string annotate_chunk(const std::vector<std::string>& texts, CompletionClient& client,
                           const PromptTemplates& prompts, const AnnotationConfig& config,
                           std::uint64_t call_seed, std::vector<std::string>* warnings) {
  static const std::string kSeparator = "\n---\n";
  const long long char_budget = static_cast<long long>(config.token_budget) * 4;

  std::string frame = prompts.infer;
  const size_t slot = frame.find("{documents}");
  const long long frame_chars =
      static_cast<long long>(frame.size()) - (slot == std::string::npos ? 0 : 11);

  std::string block;
  size_t included = 0;
  for (const auto& text : texts) {
    const long long extra =
        static_cast<long long>(text.size()) + (included > 0 ? kSeparator.size() : 0);
    if (frame_chars + static_cast<long long>(block.size()) + extra > char_budget) break;
    if (included > 0) block += kSeparator;
    block += text;
    ++included;
  }
  if (included == 0 && !texts.empty()) {
    // Even the first text overflows; keep its head so the call still happens.
    const long long room = std::max<long long>(0, char_budget - frame_chars);
    block = texts.front().substr(0, static_cast<size_t>(room));
    included = 1;
  }
  if (included < texts.size() && warnings) {
    warnings->push_back("prompt truncated to " + std::to_string(included) + " of " +
                        std::to_string(texts.size()) + " texts to fit the token budget");
  }

  replace_all(frame, "{documents}", block);
  return single_call(client, frame, call_seed);
}

RepairOutcome repair_label(const std::string& raw, CompletionClient& repair_client,
                           const PromptTemplates& prompts, const AnnotationConfig& config,
                           std::uint64_t call_seed) {
  RepairOutcome outcome;
  const std::string trimmed = trim(raw);
  if (is_valid_label(trimmed, config)) {
    outcome.label = trimmed;
    return outcome;
  }

  std::string bad = raw;
  for (int attempt = 0; attempt < config.repair_attempts; ++attempt) {
    const size_t tail = static_cast<size_t>(config.repair_tail_chars);
    const std::string clipped = bad.size() > tail ? bad.substr(bad.size() - tail) : bad;
    std::string prompt = prompts.repair;
    replace_all(prompt, "{answer}", clipped);
    const std::string reply =
        single_call(repair_client, prompt, Rng::derive(call_seed, static_cast<std::uint64_t>(attempt)));
    outcome.raw_responses.push_back(reply);
    const std::string candidate = trim(reply);
    if (is_valid_label(candidate, config)) {
      outcome.label = candidate;
      outcome.repaired = true;
      return outcome;
    }
    bad = reply;
  }

  // Deterministic last resort: truncate the original answer.
  std::string head = first_nonempty_line(raw);
  if (head.size() > static_cast<size_t>(config.max_label_length)) {
    head.resize(static_cast<size_t>(config.max_label_length));
  }
  outcome.label = head.empty() ? "UNLABELED" : head;
  outcome.repaired = true;
  outcome.gave_up = true;
  return outcome;
}

RepairOutcome reconcile(const std::vector<std::string>& labels, CompletionClient& client,
                        CompletionClient& repair_client, const PromptTemplates& prompts,
                        const AnnotationConfig& config, std::uint64_t call_seed) {
  if (labels.empty()) throw UsageError("reconcile: no labels given");
  if (labels.size() == 1) {
    RepairOutcome outcome;
    outcome.label = labels.front();
    return outcome;
  }
  std::string prompt = prompts.reconcile;
  replace_all(prompt, "{labels}", bullet_list(labels));
  const std::string reply = single_call(client, prompt, call_seed);
  RepairOutcome outcome = repair_label(reply, repair_client, prompts, config,
                                       Rng::derive(call_seed, 0x5ec0));
  outcome.raw_responses.insert(outcome.raw_responses.begin(), reply);
  return outcome;
}

std::vector<AnnotationRecord> load_annotation_ledger(const std::string& path) {
  std::vector<AnnotationRecord> records;
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw DataError("annotation ledger " + path + ": malformed line " + std::to_string(lineno));
    }
    const std::string name = line.substr(0, tab1);
    AnnotationRecord record;
    const auto c_pos = name.find('C');
    if (name.empty() || name[0] != 'L' || c_pos == std::string::npos) {
      throw DataError("annotation ledger " + path + ": bad node name " + name);
    }
    record.node.layer = std::stoi(name.substr(1, c_pos - 1));
    record.node.cluster = std::stoi(name.substr(c_pos + 1));
    record.provenance = provenance_from_string(line.substr(tab1 + 1, tab2 - tab1 - 1));
    record.label = unescape_field(line.substr(tab2 + 1));
    records.push_back(std::move(record));
  }
  return records;
}

AnnotateResult annotate_tree(const SemanticTree& tree, const Corpus& corpus,
                             CompletionClient& client, CompletionClient& repair_client,
                             const PromptTemplates& prompts, const AnnotationConfig& config,
                             const std::optional<std::set<int>>& layer_filter,
                             const std::optional<std::string>& ledger_path) {
  if (static_cast<int>(corpus.size()) != tree.n_points) {
    throw DataError("annotate_tree: corpus size does not match the tree");
  }

  AnnotateResult result;
  std::set<std::string> done;
  if (ledger_path) {
    for (const auto& record : load_annotation_ledger(*ledger_path)) {
      done.insert(node_name(record.node));
    }
  }

  for (int L = 0; L < tree.layer_count(); ++L) {
    if (layer_filter && !layer_filter->count(L)) continue;
    for (int c = 0; c < tree.layers[static_cast<size_t>(L)].cluster_count; ++c) {
      const TreeNode node{L, c};
      const std::string name = node_name(node);
      if (done.count(name)) {
        ++result.skipped_resumed;
        continue;
      }
      try {
        const auto& members = tree.members(node);
        const std::uint64_t node_seed = Rng::derive(config.seed, fnv1a64(name));
        const auto chunks = plan_chunks(static_cast<int>(members.size()), config.chunk_limit,
                                        config.oversample_factor, node_seed);

        std::vector<std::string> chunk_labels(chunks.size());
        std::vector<std::string> raws;
        bool any_repair = false;

        const size_t batch = config.concurrency > 0 ? static_cast<size_t>(config.concurrency) : 1;
        for (size_t start = 0; start < chunks.size(); start += batch) {
          const size_t stop = std::min(chunks.size(), start + batch);
          std::vector<std::future<RepairOutcome>> futures;
          for (size_t idx = start; idx < stop; ++idx) {
            futures.push_back(std::async(std::launch::async, [&, idx] {
              std::vector<std::string> texts;
              texts.reserve(chunks[idx].size());
              for (int member_pos : chunks[idx]) {
                texts.push_back(corpus.texts[static_cast<size_t>(
                    members[static_cast<size_t>(member_pos)])]);
              }
              const std::uint64_t call_seed = Rng::derive(node_seed, idx);
              std::vector<std::string> chunk_warnings;
              const std::string raw =
                  annotate_chunk(texts, client, prompts, config, call_seed, &chunk_warnings);
              RepairOutcome outcome = repair_label(raw, repair_client, prompts, config,
                                                   Rng::derive(call_seed, 0xf1f));
              outcome.raw_responses.insert(outcome.raw_responses.begin(), raw);
              for (auto& w : chunk_warnings) {
                outcome.raw_responses.push_back("[warning] " + w);
              }
              return outcome;
            }));
          }
          for (size_t idx = start; idx < stop; ++idx) {
            RepairOutcome outcome = futures[idx - start].get();
            chunk_labels[idx] = outcome.label;
            any_repair = any_repair || outcome.repaired || outcome.gave_up;
            for (auto& r : outcome.raw_responses) {
              if (r.rfind("[warning] ", 0) == 0) {
                result.warnings.push_back(name + ": " + r.substr(10));
              } else {
                raws.push_back(std::move(r));
              }
            }
          }
        }

        AnnotationRecord record;
        record.node = node;
        if (chunks.size() == 1) {
          record.label = chunk_labels.front();
          record.provenance =
              any_repair ? Provenance::kFallbackRepaired : Provenance::kDirect;
        } else {
          RepairOutcome merged = reconcile(chunk_labels, client, repair_client, prompts, config,
                                           Rng::derive(node_seed, 0xce17));
          any_repair = any_repair || merged.repaired || merged.gave_up;
          for (auto& r : merged.raw_responses) raws.push_back(std::move(r));
          record.label = merged.label;
          record.provenance = any_repair ? Provenance::kChunkedAndRepaired
                                         : Provenance::kChunkedReconciled;
        }
        record.raw_responses = std::move(raws);

        if (ledger_path) {
          std::ofstream ledger(*ledger_path, std::ios::app | std::ios::binary);
          if (!ledger) throw StageError("cannot append to ledger: " + *ledger_path);
          ledger << name << '\t' << to_string(record.provenance) << '\t'
                 << escape_field(record.label) << '\n';
          ledger.flush();
        }
        result.records.push_back(std::move(record));
      } catch (const std::exception& e) {
        result.errors.push_back(name + ": " + e.what());
      }
    }
  }
  return result;
}

TranscriptionResult transcribe_labels(const std::vector<std::string>& unique_labels,
                                      const std::vector<std::string>& taxonomy,
                                      CompletionClient& client, const PromptTemplates& prompts,
                                      const AnnotationConfig& config) {
  if (taxonomy.empty()) throw UsageError("transcribe_labels: empty taxonomy");

  TranscriptionResult result;
  const std::string categories = bullet_list(taxonomy);
  for (const auto& label : unique_labels) {
    std::string prompt = prompts.transcribe;
    replace_all(prompt, "{label}", label);
    replace_all(prompt, "{categories}", categories);
    const std::uint64_t base_seed = Rng::derive(config.seed, fnv1a64(label));

    std::string category = kUnmapped;
    try {
      for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string reply =
            single_call(client, prompt, Rng::derive(base_seed, static_cast<std::uint64_t>(attempt)));
        const std::string candidate = trim(reply);
        if (std::find(taxonomy.begin(), taxonomy.end(), candidate) != taxonomy.end()) {
          category = candidate;
          break;
        }
      }
    } catch (const std::exception& e) {
      result.errors.push_back(label + ": " + e.what());
    }
    result.mapping.emplace(label, category);
  }
  return result;
}

}  // namespace semtree

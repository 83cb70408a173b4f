#include "semtree/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "semtree/errors.hpp"

namespace semtree {

namespace {

constexpr char kMagic[4] = {'S', 'E', 'M', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

void write_bytes(std::ostream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
T read_scalar(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError(std::string("embedding file truncated while reading ") + what);
  return value;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

bool Corpus::fully_labeled() const {
  if (labels.size() != static_cast<size_t>(size())) return false;
  return std::none_of(labels.begin(), labels.end(),
                      [](const std::string& l) { return l.empty(); });
}

std::vector<std::string> Corpus::label_vocabulary() const {
  std::vector<std::string> vocab;
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) continue;
    if (seen.insert(l).second) vocab.push_back(l);
  }
  return vocab;
}

std::string escape_field(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(const std::string& escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (size_t i = 0; i < escaped.size(); ++i) {
    if (escaped[i] != '\\' || i + 1 == escaped.size()) {
      out.push_back(escaped[i]);
      continue;
    }
    switch (escaped[++i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default:
        out.push_back('\\');
        out.push_back(escaped[i]);
    }
  }
  return out;
}

Corpus load_corpus(const std::string& embeddings_path,
                   const std::optional<std::string>& meta_path) {
  std::ifstream in(embeddings_path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file: " + embeddings_path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("bad magic in embedding file: " + embeddings_path);
  }
  const auto version = read_scalar<std::uint32_t>(in, "version");
  if (version != kFormatVersion) {
    throw DataError("unsupported embedding file version " + std::to_string(version));
  }
  const auto n = read_scalar<std::uint64_t>(in, "row count");
  const auto d = read_scalar<std::uint64_t>(in, "column count");
  if (n > 0 && d == 0) throw DataError("embedding file declares zero dimensions");

  Corpus corpus;
  corpus.embeddings.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const std::uint64_t count = n * d;
  in.read(reinterpret_cast<char*>(corpus.embeddings.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::uint64_t>(in.gcount()) != count * sizeof(float)) {
    throw DataError("payload length mismatch: header declares " + std::to_string(n) +
                    "x" + std::to_string(d) + " but file is shorter");
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw DataError("payload length mismatch: trailing bytes after " + std::to_string(n) +
                    "x" + std::to_string(d) + " floats");
  }
  if (!corpus.embeddings.allFinite()) {
    throw DataError("embedding file contains non-finite values");
  }

  corpus.external_ids.resize(n);
  corpus.texts.assign(n, "");
  corpus.labels.assign(n, "");
  for (std::uint64_t i = 0; i < n; ++i) corpus.external_ids[i] = std::to_string(i);

  if (meta_path) {
    std::ifstream meta(*meta_path);
    if (!meta) throw DataError("cannot open metadata sidecar: " + *meta_path);
    std::string line;
    std::uint64_t row = 0;
    std::unordered_set<std::string> seen_ids;
    while (std::getline(meta, line)) {
      if (row >= n) throw DataError("metadata sidecar has more lines than documents");
      auto fields = split_tabs(line);
      if (fields.size() != 3) {
        throw DataError("metadata line " + std::to_string(row + 1) +
                        ": expected 3 tab-separated fields, got " +
                        std::to_string(fields.size()));
      }
      corpus.external_ids[row] = unescape_field(fields[0]);
      corpus.labels[row] = unescape_field(fields[1]);
      corpus.texts[row] = unescape_field(fields[2]);
      if (!seen_ids.insert(corpus.external_ids[row]).second) {
        throw DataError("duplicate external_id: " + corpus.external_ids[row]);
      }
      ++row;
    }
    if (row != n) {
      throw DataError("metadata sidecar has " + std::to_string(row) + " lines for " +
                      std::to_string(n) + " documents");
    }
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& embeddings_path,
                 const std::optional<std::string>& meta_path) {
  const auto n = static_cast<std::uint64_t>(corpus.size());
  const auto d = static_cast<std::uint64_t>(corpus.dim());
  {
    std::ofstream out(embeddings_path, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("cannot write embedding file: " + embeddings_path);
    write_bytes(out, kMagic, 4);
    write_bytes(out, &kFormatVersion, sizeof(kFormatVersion));
    write_bytes(out, &n, sizeof(n));
    write_bytes(out, &d, sizeof(d));
    write_bytes(out, corpus.embeddings.data(), n * d * sizeof(float));
    if (!out) throw StageError("write failed: " + embeddings_path);
  }
  if (meta_path) {
    std::ofstream out(*meta_path, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("cannot write metadata sidecar: " + *meta_path);
    for (std::uint64_t i = 0; i < n; ++i) {
      out << escape_field(corpus.external_ids[i]) << '\t'
          << escape_field(corpus.labels[i]) << '\t'
          << escape_field(corpus.texts[i]) << '\n';
    }
    if (!out) throw StageError("write failed: " + *meta_path);
  }
}

LabeledCorpus load_labels(const std::string& path, Corpus corpus) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file: " + path);

  const auto n = static_cast<size_t>(corpus.size());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.size() != n) {
    throw DataError("label file has " + std::to_string(lines.size()) + " lines for " +
                    std::to_string(n) + " documents");
  }

  const bool keyed = !lines.empty() && lines.front().find('\t') != std::string::npos;
  if (keyed) {
    std::unordered_map<std::string, size_t> index_of;
    index_of.reserve(n);
    for (size_t i = 0; i < n; ++i) index_of.emplace(corpus.external_ids[i], i);
    std::vector<bool> assigned(n, false);
    for (size_t row = 0; row < lines.size(); ++row) {
      auto fields = split_tabs(lines[row]);
      if (fields.size() != 2) {
        throw DataError("label line " + std::to_string(row + 1) +
                        ": expected `external_id<TAB>label`");
      }
      auto it = index_of.find(unescape_field(fields[0]));
      if (it == index_of.end()) {
        throw DataError("label line " + std::to_string(row + 1) +
                        ": unknown external_id " + fields[0]);
      }
      if (assigned[it->second]) {
        throw DataError("label line " + std::to_string(row + 1) +
                        ": duplicate external_id " + fields[0]);
      }
      corpus.labels[it->second] = unescape_field(fields[1]);
      assigned[it->second] = true;
    }
  } else {
    for (size_t i = 0; i < n; ++i) corpus.labels[i] = lines[i];
  }

  for (size_t i = 0; i < n; ++i) {
    if (corpus.labels[i].empty()) {
      throw DataError("document " + std::to_string(i) + " (" + corpus.external_ids[i] +
                      ") received an empty label");
    }
  }

  LabeledCorpus out{std::move(corpus), {}};
  out.vocabulary = out.corpus.label_vocabulary();
  return out;
}

}  // namespace semtree

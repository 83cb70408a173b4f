#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace semtree {

// Embeddings are stored row-major in 32-bit floats, matching the on-disk
// layout so that save/load round-trips are bit-exact. Downstream math
// promotes to double.
using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A document collection with its embedding matrix. Document i owns row i of
// the matrix; this index pairing is never reordered by any operation.
struct Corpus {
  RowMatrixXf embeddings;                 // n x d
  std::vector<std::string> external_ids;  // size n, unique
  std::vector<std::string> texts;         // size n, may contain empty strings
  std::vector<std::string> labels;        // size n, empty string = unlabeled

  Eigen::Index size() const { return embeddings.rows(); }
  Eigen::Index dim() const { return embeddings.cols(); }

  bool fully_labeled() const;
  // Distinct labels in first-appearance order; unlabeled entries excluded.
  std::vector<std::string> label_vocabulary() const;
};

// Reads the binary embedding file (magic "SEMT", version 1, u64 n, u64 d,
// n*d little-endian f32 row-major) and the optional metadata sidecar.
// Validates finiteness, payload length, and external-id uniqueness.
Corpus load_corpus(const std::string& embeddings_path,
                   const std::optional<std::string>& meta_path = std::nullopt);

// Writes the embedding file and, when the corpus carries any metadata,
// the sidecar next to it. save then load reproduces the matrix bit-exactly
// and the metadata losslessly.
void save_corpus(const Corpus& corpus, const std::string& embeddings_path,
                 const std::optional<std::string>& meta_path = std::nullopt);

// Result of attaching a label file to a corpus.
struct LabeledCorpus {
  Corpus corpus;
  std::vector<std::string> vocabulary;
};

// Reads one label per line, either in document-id order or keyed as
// `external_id<TAB>label`. Every document must end up labeled.
LabeledCorpus load_labels(const std::string& path, Corpus corpus);

// Sidecar field escaping: backslash-escapes tab, newline, carriage return
// and backslash itself so arbitrary UTF-8 text fits in one TSV field.
std::string escape_field(const std::string& raw);
std::string unescape_field(const std::string& escaped);

}  // namespace semtree

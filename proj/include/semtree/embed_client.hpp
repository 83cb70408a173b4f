#pragma once

#include <string>
#include <vector>

#include "semtree/corpus.hpp"

namespace semtree {

// Configuration of a remote embeddings endpoint speaking the de-facto
// JSON shape: POST {"input": [texts], "model": m} ->
// {"data": [{"embedding": [floats]}, ...]}.
struct EmbedEndpoint {
  std::string url;          // e.g. http://host:port/v1/embeddings
  std::string model;
  std::string auth_token;   // optional bearer token
  int batch_size = 64;
  int timeout_seconds = 120;
  int retries = 2;
};

// Fetches embeddings for the given texts in batches. All rows must come back
// with the same dimension. Values are stored as 32-bit floats.
RowMatrixXf fetch_embeddings(const std::vector<std::string>& texts,
                             const EmbedEndpoint& endpoint);

}  // namespace semtree

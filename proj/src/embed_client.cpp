#include "semtree/embed_client.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "semtree/errors.hpp"

namespace semtree {

namespace {

using nlohmann::json;

// Splits "http://host:port/path" into (scheme://host:port, /path).
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("endpoint URL missing scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

RowMatrixXf fetch_embeddings(const std::vector<std::string>& texts,
                             const EmbedEndpoint& endpoint) {
  if (endpoint.url.empty()) throw UsageError("no embeddings endpoint configured");
  const auto [base, path] = split_url(endpoint.url);
  httplib::Client client(base);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  httplib::Headers headers;
  if (!endpoint.auth_token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.auth_token);
  }

  RowMatrixXf out;
  Eigen::Index dim = -1;
  Eigen::Index row = 0;
  const size_t batch = endpoint.batch_size > 0 ? static_cast<size_t>(endpoint.batch_size) : 64;

  for (size_t start = 0; start < texts.size(); start += batch) {
    const size_t stop = std::min(texts.size(), start + batch);
    json request = {{"model", endpoint.model}, {"input", json::array()}};
    for (size_t i = start; i < stop; ++i) request["input"].push_back(texts[i]);
    const std::string body = request.dump();

    httplib::Result res;
    std::string last_error;
    for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
      res = client.Post(path, headers, body, "application/json");
      if (res && res->status == 200) break;
      last_error = res ? "HTTP " + std::to_string(res->status)
                       : "transport error: " + httplib::to_string(res.error());
    }
    if (!res || res->status != 200) {
      throw StageError("embeddings request failed after retries: " + last_error);
    }

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("data") || !reply["data"].is_array() ||
        reply["data"].size() != stop - start) {
      throw StageError("embeddings endpoint returned a malformed response");
    }
    for (size_t i = start; i < stop; ++i) {
      const auto& vec = reply["data"][i - start]["embedding"];
      if (!vec.is_array() || vec.empty()) {
        throw StageError("embeddings endpoint returned an empty vector");
      }
      if (dim < 0) {
        dim = static_cast<Eigen::Index>(vec.size());
        out.resize(static_cast<Eigen::Index>(texts.size()), dim);
      }
      if (static_cast<Eigen::Index>(vec.size()) != dim) {
        throw DataError("embeddings endpoint returned inconsistent dimensions");
      }
      for (Eigen::Index j = 0; j < dim; ++j) {
        out(row, j) = vec[static_cast<size_t>(j)].get<float>();
      }
      ++row;
    }
  }
  if (!out.allFinite()) throw DataError("fetched embeddings contain non-finite values");
  return out;
}

}  // namespace semtree

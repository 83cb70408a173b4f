#include "semtree/completion.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "semtree/errors.hpp"
#include "semtree/hash.hpp"

namespace semtree {

namespace {

using nlohmann::json;

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("endpoint URL missing scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string flatten_prompt(const CompletionRequest& request) {
  std::string all;
  for (const auto& m : request.messages) {
    all += m.role;
    all.push_back('\n');
    all += m.content;
    all.push_back('\n');
  }
  return all;
}

// Extracts the "- item" list following a marker line.
std::vector<std::string> parse_marked_list(const std::string& prompt, const char* marker) {
  std::vector<std::string> items;
  auto pos = prompt.find(marker);
  if (pos == std::string::npos) return items;
  pos = prompt.find('\n', pos);
  while (pos != std::string::npos) {
    const size_t start = pos + 1;
    if (prompt.compare(start, 2, "- ") != 0) break;
    const size_t end = prompt.find('\n', start);
    const std::string item = end == std::string::npos ? prompt.substr(start + 2)
                                                      : prompt.substr(start + 2, end - start - 2);
    items.push_back(item);
    pos = end;
  }
  return items;
}

}  // namespace

HttpCompletionClient::HttpCompletionClient(Config config) : config_(std::move(config)) {
  if (config_.url.empty()) {
    throw UsageError("no completion endpoint configured (set SEMTREE_LLM_URL or pass a URL)");
  }
}

HttpCompletionClient::Config HttpCompletionClient::config_from_env(const std::string& model) {
  Config config;
  if (const char* url = std::getenv("SEMTREE_LLM_URL")) config.url = url;
  if (const char* token = std::getenv("SEMTREE_LLM_TOKEN")) config.auth_token = token;
  config.model = model;
  return config;
}

std::string HttpCompletionClient::complete(const CompletionRequest& request) {
  const auto [base, path] = split_url(config_.url);
  httplib::Client client(base);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.auth_token.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.auth_token);
  }

  json body = {{"model", config_.model},
               {"messages", json::array()},
               {"temperature", request.temperature},
               {"seed", request.seed}};
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
      last_error = "malformed completion response";
      continue;
    }
    std::string content =
        reply["choices"][0].value("message", json::object()).value("content", "");
    if (content.empty()) {
      last_error = "empty completion";
      continue;
    }
    return content;
  }
  throw StageError("completion request failed after " + std::to_string(config_.retries + 1) +
                   " attempts: " + last_error);
}

std::string HttpCompletionClient::describe() const {
  return "http:" + config_.url + " model=" + config_.model;
}

std::string MockCompletionClient::complete(const CompletionRequest& request) {
  const std::string prompt = flatten_prompt(request);

  const auto candidates = parse_marked_list(prompt, kCandidatesMarker);
  if (candidates.size() >= 2) {
    const bool all_equal =
        std::all_of(candidates.begin(), candidates.end(),
                    [&](const std::string& c) { return c == candidates.front(); });
    if (all_equal) return candidates.front();
  }

  const std::uint64_t digest = fnv1a64(prompt, fnv1a64("mock", seed_ ^ request.seed));

  const auto categories = parse_marked_list(prompt, kCategoriesMarker);
  if (!categories.empty()) {
    return categories[static_cast<size_t>(digest % categories.size())];
  }

  char buf[24];
  std::snprintf(buf, sizeof(buf), "Field %08llx",
                static_cast<unsigned long long>(digest & 0xffffffffULL));
  return buf;
}

std::string MockCompletionClient::describe() const {
  return "mock seed=" + std::to_string(seed_);
}

}  // namespace semtree

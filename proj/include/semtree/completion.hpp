#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace semtree {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

// Text-in/text-out contract all annotation paths go through. Implementations
// must be safe to call from multiple threads.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string describe() const = 0;  // for manifests/ledgers
};

// Speaks the de-facto chat-completions wire shape:
//   POST {"model", "messages": [{"role","content"}], "temperature", "seed"}
//   ->   {"choices": [{"message": {"content": ...}}]}
// Retries transport failures and empty replies; the URL and bearer token
// default to the SEMTREE_LLM_URL / SEMTREE_LLM_TOKEN environment variables.
class HttpCompletionClient : public CompletionClient {
 public:
  struct Config {
    std::string url;
    std::string model;
    std::string auth_token;
    int retries = 2;
    int timeout_seconds = 600;
  };

  explicit HttpCompletionClient(Config config);
  static Config config_from_env(const std::string& model);

  std::string complete(const CompletionRequest& request) override;
  std::string describe() const override;

 private:
  Config config_;
};

// Deterministic stand-in for the annotation models: the reply is a pure
// function of (prompt, seed). Structured prompts get structured answers —
// reconciliation over identical candidate labels returns that label, and
// taxonomy prompts always answer with one of the listed category names.
class MockCompletionClient : public CompletionClient {
 public:
  explicit MockCompletionClient(std::uint64_t seed = 0) : seed_(seed) {}

  std::string complete(const CompletionRequest& request) override;
  std::string describe() const override;

  // Prompt markers the mock keys on; the default templates emit them.
  static constexpr const char* kCandidatesMarker = "Candidate subfield labels:";
  static constexpr const char* kCategoriesMarker = "Categories:";

 private:
  std::uint64_t seed_;
};

}  // namespace semtree

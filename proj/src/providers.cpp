#include <map>
#include <mutex>
#include <regex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "focal/errors.hpp"
#include "focal/pipeline.hpp"
#include "focal/store.hpp"
#include "httplib.h"

namespace focal {

using nlohmann::ordered_json;

void ProviderConfig::check() const {
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (concurrency < 1) throw std::invalid_argument("concurrency must be >= 1");
  if (timeout.count() <= 0) throw std::invalid_argument("timeout must be positive");
}

struct MockProvider::State {
  std::map<std::string, Entry, std::less<>> entries;
  mutable std::mutex mu;
  std::map<std::string, std::size_t, std::less<>> calls;
};

MockProvider::MockProvider(std::vector<Entry> entries) : state_(std::make_shared<State>()) {
  for (Entry& e : entries) {
    if (e.responses.empty()) throw std::invalid_argument(fmt::format("mock entry '{}' has no responses", e.fingerprint));
    std::string key = e.fingerprint;
    if (!state_->entries.emplace(std::move(key), std::move(e)).second)
      throw std::invalid_argument("duplicate mock fingerprint");
  }
}

MockProvider MockProvider::from_script(std::string_view bytes) {
  const ordered_json root = json_io::parse_json(bytes);
  if (!root.is_object() || !root.contains("entries") || !root["entries"].is_array())
    throw ParseError("mock script must be an object with an 'entries' array");
  if (auto v = root.find("schema_version"); v != root.end() && *v != kSchemaVersion)
    throw VersionError("unsupported mock script schema_version");

  std::vector<Entry> entries;
  for (std::size_t i = 0; i < root["entries"].size(); ++i) {
    const auto& e = root["entries"][i];
    const std::string path = fmt::format("entries[{}]", i);
    if (!e.is_object() || !e.contains("fingerprint") || !e["fingerprint"].is_string())
      throw ParseError(path + ": expected an object with a string 'fingerprint'");
    if (!e.contains("responses") || !e["responses"].is_array() || e["responses"].empty())
      throw ParseError(path + ": expected a non-empty 'responses' array");
    Entry entry;
    entry.fingerprint = e["fingerprint"].get<std::string>();
    for (const auto& r : e["responses"])
      entry.responses.push_back(r.is_string() ? r.get<std::string>() : r.dump(-1, ' ', false));
    if (auto d = e.find("delay_ms"); d != e.end()) {
      if (!d->is_number_unsigned()) throw ParseError(path + ".delay_ms: expected a non-negative integer");
      entry.delay = std::chrono::milliseconds(d->get<std::int64_t>());
    }
    entries.push_back(std::move(entry));
  }
  try {
    return MockProvider(std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

MockProvider MockProvider::from_file(const std::filesystem::path& path) {
  try {
    return from_script(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string MockProvider::complete(const ProviderRequest& request) {
  auto it = state_->entries.find(request.fingerprint);
  if (it == state_->entries.end())
    throw TransportError(fmt::format("mock script has no entry for '{}'", request.fingerprint));
  const Entry& entry = it->second;
  std::size_t n;
  {
    std::lock_guard lock(state_->mu);
    n = state_->calls[request.fingerprint]++;
  }
  if (entry.delay.count() > 0) std::this_thread::sleep_for(entry.delay);
  return entry.responses[std::min(n, entry.responses.size() - 1)];
}

std::size_t MockProvider::calls(std::string_view fingerprint) const {
  std::lock_guard lock(state_->mu);
  auto it = state_->calls.find(fingerprint);
  return it == state_->calls.end() ? 0 : it->second;
}

HttpProvider::HttpProvider(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint, m, kUrl))
    throw std::invalid_argument(fmt::format("provider endpoint '{}' is not an http(s) URL", endpoint));
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
}

std::string HttpProvider::complete(const ProviderRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const ordered_json body{{"model", request.model}, {"prompt", request.prompt}};
  auto res = client.Post(path_, headers, body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                         "application/json");
  if (!res) throw TransportError(fmt::format("provider request failed: {}", httplib::to_string(res.error())));
  if (res->status < 200 || res->status >= 300)
    throw TransportError(fmt::format("provider answered HTTP {}", res->status));

  try {
    const auto reply = nlohmann::json::parse(res->body);
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string())
      throw TransportError("provider reply has no string 'text' field");
    return reply["text"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(fmt::format("provider reply is not JSON: {}", e.what()));
  }
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  config.check();
  switch (config.kind) {
    case ProviderKind::kMock:
      if (config.mock_script.empty()) throw std::invalid_argument("mock provider needs a script file");
      return std::make_unique<MockProvider>(MockProvider::from_file(config.mock_script));
    case ProviderKind::kHttp:
      if (config.endpoint.empty()) throw std::invalid_argument("http provider needs an endpoint");
      return std::make_unique<HttpProvider>(config.endpoint, config.api_key, config.timeout);
  }
  throw std::invalid_argument("unknown provider kind");
}

}  // namespace focal

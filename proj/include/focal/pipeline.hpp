#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "focal/metrics.hpp"
#include "focal/model.hpp"

namespace focal {

// Instructions sent ahead of every request. The standard template carries
// definitions of each column with one public-domain example passage apiece,
// followed by the output-format contract.
struct PromptTemplate {
  std::string preamble;
  std::string format_contract;

  static const PromptTemplate& standard();
};

struct AnnotationRequest {
  std::string scene_id;
  std::string event_id;
  std::string event_text;
  std::string scene_context;  // scene title plus neighbouring-event excerpts
  std::vector<Character> roster;
  const PromptTemplate* instructions = &PromptTemplate::standard();

  // "scene/event"; keys mock scripts.
  std::string fingerprint() const { return scene_id + "/" + event_id; }
  // Throws std::invalid_argument if the roster or event text is empty.
  void check() const;
};

// Deterministic prompt. The request payload is embedded as one JSON object
// between marker lines, so delimiter characters in the event text are escaped.
std::string build_prompt(const AnnotationRequest& request);

// Recovers the JSON payload embedded by build_prompt. Throws ParseError.
nlohmann::ordered_json extract_prompt_payload(std::string_view prompt);

inline constexpr std::string_view kPayloadBegin = "<<<FOCAL_INPUT";
inline constexpr std::string_view kPayloadEnd = "FOCAL_INPUT>>>";

struct ResponseRow {
  std::string character;
  LabelBits bits{};
  std::string rationale;
  std::vector<std::string> cue_phrases;
  Explanation explanation;  // cue phrases resolved against the event text
};

struct ProviderResponse {
  std::string raw;
  std::vector<ResponseRow> rows;  // roster order
  std::vector<std::string> warnings;
};

// Strict parse of {"rows": [{"character", "pov", "internal", "external",
// "perceptual", "ideological", "psychological", "rationale", "cues"}]}.
// Cue phrases are located by first exact occurrence inside `event_span` of
// `text`; phrases not found stay unresolved and add a warning.
// Throws MalformedResponse, UnknownCharacter or RangeError.
ProviderResponse parse_response(std::string_view raw, const std::vector<Character>& roster,
                                std::string_view text, Span event_span);

struct ProviderRequest {
  std::string fingerprint;
  std::string model;
  std::string prompt;
};

// Must be safe to call from several threads at once. Throws TransportError
// when no answer could be obtained.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const ProviderRequest& request) = 0;
};

// Canned answers keyed by request fingerprint. Script file:
//   {"schema_version": "1.0",
//    "entries": [{"fingerprint": "s1/e1", "responses": [..], "delay_ms": 0}]}
// Each call for a fingerprint consumes the next response; the last one
// repeats. A response may be a string (sent verbatim) or a JSON value
// (sent in compact form). Unknown fingerprints raise TransportError.
class MockProvider : public Provider {
 public:
  struct Entry {
    std::string fingerprint;
    std::vector<std::string> responses;
    std::chrono::milliseconds delay{0};
  };

  explicit MockProvider(std::vector<Entry> entries);
  static MockProvider from_script(std::string_view bytes);
  static MockProvider from_file(const std::filesystem::path& path);

  std::string complete(const ProviderRequest& request) override;
  std::size_t calls(std::string_view fingerprint) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

enum class ProviderKind { kMock, kHttp };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kMock;
  std::string endpoint;  // http: full URL of the POST endpoint
  std::string api_key;   // sent as a bearer token when non-empty
  std::string model = "default";
  std::filesystem::path mock_script;
  int max_retries = 2;
  int concurrency = 4;
  std::chrono::milliseconds timeout{60000};

  // Throws std::invalid_argument when max_retries < 0 or concurrency < 1.
  void check() const;
};

// POSTs {"model", "prompt"} as JSON and reads {"text"} from the reply.
class HttpProvider : public Provider {
 public:
  HttpProvider(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout);
  std::string complete(const ProviderRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

struct EventOutcome {
  std::string scene;
  std::string event;
  bool ok = false;
  int attempts = 0;
  int retries = 0;  // attempts - 1 when ok
  std::string error;
  std::vector<std::string> warnings;
};

struct PipelineReport {
  std::vector<EventOutcome> events;  // document order

  std::vector<const EventOutcome*> failures() const;
  std::string to_json() const;
};

struct AnnotationResult {
  NarrativeDocument document;
  PipelineReport report;
};

struct PipelineOptions {
  std::string model = "default";
  int max_retries = 2;
  int concurrency = 4;
};

// Labels every event of `doc`, replacing existing annotations. Failed events
// are left without annotations and listed in the report.
AnnotationResult annotate_document(const NarrativeDocument& doc, Provider& provider,
                                   const PipelineOptions& options = {});
AnnotationResult annotate_document(const NarrativeDocument& doc, const ProviderConfig& config);

// Request for one event: its text, scene title and excerpts of the
// neighbouring events.
AnnotationRequest make_request(const NarrativeDocument& doc, std::size_t scene_index,
                               std::size_t event_index);

}  // namespace focal

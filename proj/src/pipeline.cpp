#include "focal/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "focal/errors.hpp"
#include "focal/store.hpp"
#include "focal/utf8.hpp"

namespace focal {

using nlohmann::ordered_json;

// Definitions follow standard narratology terms; example passages are public
// domain.
const PromptTemplate& PromptTemplate::standard() {
  static const PromptTemplate kTemplate{
      R"(You annotate literary narrative. For one event of a story you decide, for every
character taking part in it, whether the event is narrated from that character's
point of view and how the character is focalized.

Point of view: the character who tells the story at this moment. Mark it when the
narration comes from this character (for example a first-person narrator).
  Example: "Call me Ishmael. Some years ago--never mind how long precisely--having
  little or no money in my purse, and nothing particular to interest me on shore, I
  thought I would sail about a little and see the watery part of the world."
  (Melville, Moby-Dick) Ishmael tells the story and is its point of view.

Focalization asks whose perception, knowledge or feeling the reader can access.
A character can be focalized without being the point of view.

Internal focalization: the reader has direct access to the character's inner
perceptions, knowledge or emotions.
  Example: "I am sitting by the window now, up in this atrocious nursery, and there
  is nothing to hinder my writing as much as I please, save lack of strength."
  (Gilman, The Yellow Wallpaper) The narrator's own state of mind is open to us.

External focalization: the character is presented only through outward, observable
behaviour, as a detached observer would see it.
  Example: "The cook squatted in the bottom and looked with both eyes at the six
  inches of gunwale which separated him from the ocean." (Crane, The Open Boat)
  We see posture and gaze, not thought.

A character may be focalized both internally and externally within one event.

Facets describe which aspect of experience the event foregrounds for the character.
Several facets may be present at once.

Perceptual facet: what can be seen, heard or otherwise sensed from the character's
position in space and time, including the limits of that access.
  Example: "None of them knew the color of the sky. Their eyes glanced level, and
  were fastened upon the waves that swept toward them." (Crane, The Open Boat)

Psychological facet: what the character knows, infers, remembers or feels.
  Example: "I get unreasonably angry with John sometimes. I'm sure I never used to
  be so sensitive." (Gilman, The Yellow Wallpaper)

Ideological facet: the norms, values and judgments through which events are framed.
  Example: "It is a truth universally acknowledged, that a single man in possession
  of a good fortune, must be in want of a wife." (Austen, Pride and Prejudice)
)",
      R"(Output format. Reply with one JSON object and nothing else:
{"rows": [ROW, ...]}
Every ROW is an object with exactly these keys:
  "character": a character id taken from the roster
  "pov": 1 if the event is narrated from this character's point of view, else 0
  "internal": 1 if the reader has direct access to the character's mind, else 0
  "external": 1 if the character is shown only through outward behaviour, else 0
  "perceptual": 1 if the event foregrounds what the character can sense, else 0
  "ideological": 1 if the event foregrounds norms, values or judgments, else 0
  "psychological": 1 if the event foregrounds what the character knows or feels, else 0
  "rationale": one or two sentences justifying the flags
  "cues": a list of short phrases copied exactly from the event text that support the flags
Write one ROW per character who takes part in the event and omit the others.
The six flag columns take only the integers 0 and 1.
)"};
  return kTemplate;
}

void AnnotationRequest::check() const {
  if (roster.empty()) throw std::invalid_argument("annotation request needs a non-empty roster");
  if (event_text.empty()) throw std::invalid_argument("annotation request needs event text");
}

std::string build_prompt(const AnnotationRequest& request) {
  request.check();
  const PromptTemplate& tpl = request.instructions != nullptr ? *request.instructions : PromptTemplate::standard();

  ordered_json payload = ordered_json::object();
  payload["scene_id"] = request.scene_id;
  payload["event_id"] = request.event_id;
  payload["scene_context"] = request.scene_context;
  ordered_json roster = ordered_json::array();
  for (const Character& c : request.roster) roster.push_back(ordered_json{{"id", c.id}, {"name", c.name}});
  payload["characters"] = std::move(roster);
  payload["event_text"] = request.event_text;

  std::string out = tpl.preamble;
  out += "\n";
  out += tpl.format_contract;
  out += "\nCharacters (id: name):\n";
  for (const Character& c : request.roster) out += fmt::format("  {}: {}\n", c.id, c.name);
  out += "\nScene context:\n";
  out += request.scene_context;
  out += "\n\nEvent text:\n";
  out += request.event_text;
  out += "\n\nThe same input as JSON (authoritative if the text above is ambiguous):\n";
  out += kPayloadBegin;
  out += "\n";
  out += payload.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
  out += "\n";
  out += kPayloadEnd;
  out += "\n";
  return out;
}

ordered_json extract_prompt_payload(std::string_view prompt) {
  const std::string begin = std::string(kPayloadBegin) + "\n";
  const auto start = prompt.rfind(begin);
  if (start == std::string_view::npos) throw ParseError("prompt has no input payload");
  const auto line_start = start + begin.size();
  const auto line_end = prompt.find('\n', line_start);
  if (line_end == std::string_view::npos) throw ParseError("prompt payload is not terminated");
  return json_io::parse_json(prompt.substr(line_start, line_end - line_start));
}

namespace {

constexpr std::string_view kRowKeys[] = {"character", "pov",           "internal",  "external", "perceptual",
                                         "ideological", "psychological", "rationale", "cues"};

}  // namespace

ProviderResponse parse_response(std::string_view raw, const std::vector<Character>& roster,
                                std::string_view text, Span event_span) {
  ProviderResponse response;
  response.raw = std::string(raw);

  ordered_json root;
  try {
    root = ordered_json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedResponse(fmt::format("response is not JSON: {}", e.what()));
  }
  if (!root.is_object() || root.size() != 1 || !root.contains("rows") || !root["rows"].is_array())
    throw MalformedResponse("response must be an object with a single 'rows' array");

  std::map<std::string, ResponseRow> by_character;
  const auto& rows = root["rows"];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = fmt::format("rows[{}]", i);
    if (!r.is_object()) throw MalformedResponse(where + " is not an object");
    for (const auto& [key, value] : r.items()) {
      if (std::find(std::begin(kRowKeys), std::end(kRowKeys), key) == std::end(kRowKeys))
        throw MalformedResponse(fmt::format("{} has unexpected key '{}'", where, key));
    }
    for (std::string_view key : kRowKeys) {
      if (!r.contains(key)) throw MalformedResponse(fmt::format("{} is missing '{}'", where, key));
    }
    if (!r["character"].is_string()) throw MalformedResponse(where + ".character is not a string");
    ResponseRow row;
    row.character = r["character"].get<std::string>();
    if (std::none_of(roster.begin(), roster.end(), [&](const Character& c) { return c.id == row.character; }))
      throw UnknownCharacter(fmt::format("{} names character '{}' outside the roster", where, row.character));

    for (Label label : kAllLabels) {
      const auto& v = r[std::string(label_key(label))];
      if (!v.is_number_integer()) throw MalformedResponse(fmt::format("{}.{} is not an integer", where, label_key(label)));
      const auto x = v.get<std::int64_t>();
      if (x != 0 && x != 1) throw RangeError(fmt::format("{}.{} = {} is not 0 or 1", where, label_key(label), x));
      row.bits[static_cast<std::size_t>(label)] = static_cast<int>(x);
    }
    if (!r["rationale"].is_string()) throw MalformedResponse(where + ".rationale is not a string");
    row.rationale = r["rationale"].get<std::string>();
    if (!r["cues"].is_array()) throw MalformedResponse(where + ".cues is not an array");
    for (const auto& cue : r["cues"]) {
      if (!cue.is_string()) throw MalformedResponse(where + ".cues holds a non-string");
      row.cue_phrases.push_back(cue.get<std::string>());
    }
    if (by_character.contains(row.character))
      throw MalformedResponse(fmt::format("{} repeats character '{}'", where, row.character));
    by_character.emplace(row.character, std::move(row));
  }

  const utf8::Text indexed(text);
  for (const Character& c : roster) {
    auto it = by_character.find(c.id);
    if (it == by_character.end()) continue;
    ResponseRow row = std::move(it->second);
    row.explanation.rationale = row.rationale;
    for (const std::string& phrase : row.cue_phrases) {
      const auto at = indexed.find(phrase, event_span.start, event_span.end);
      if (!at) {
        response.warnings.push_back(fmt::format("cue '{}' for '{}' not found in the event text", phrase, row.character));
        row.explanation.unresolved_cues.push_back(phrase);
        continue;
      }
      const Span span{*at, *at + utf8::length(phrase)};
      if (std::find(row.explanation.cues.begin(), row.explanation.cues.end(), span) == row.explanation.cues.end())
        row.explanation.cues.push_back(span);
    }
    response.rows.push_back(std::move(row));
  }
  return response;
}

namespace {

constexpr std::size_t kExcerptLength = 160;

std::string excerpt(const utf8::Text& text, Span span) {
  const std::size_t end = std::min(span.end, span.start + kExcerptLength);
  std::string out(text.slice(span.start, end));
  std::replace(out.begin(), out.end(), '\n', ' ');
  if (end < span.end) out += "...";
  return out;
}

}  // namespace

AnnotationRequest make_request(const NarrativeDocument& doc, std::size_t scene_index, std::size_t event_index) {
  const Scene& scene = doc.scenes.at(scene_index);
  const Event& event = scene.events.at(event_index);
  const utf8::Text text(doc.text);

  AnnotationRequest req;
  req.scene_id = scene.id;
  req.event_id = event.id;
  req.event_text = std::string(text.slice(event.span.start, event.span.end));
  req.roster = doc.characters;
  req.scene_context = "Scene: " + scene.title;
  if (event_index > 0)
    req.scene_context += "\nPrevious event: " + excerpt(text, scene.events[event_index - 1].span);
  if (event_index + 1 < scene.events.size())
    req.scene_context += "\nNext event: " + excerpt(text, scene.events[event_index + 1].span);
  return req;
}

std::vector<const EventOutcome*> PipelineReport::failures() const {
  std::vector<const EventOutcome*> out;
  for (const EventOutcome& e : events) {
    if (!e.ok) out.push_back(&e);
  }
  return out;
}

std::string PipelineReport::to_json() const {
  ordered_json root = ordered_json::object();
  ordered_json list = ordered_json::array();
  for (const EventOutcome& e : events) {
    ordered_json o = ordered_json::object();
    o["scene"] = e.scene;
    o["event"] = e.event;
    o["status"] = e.ok ? "ok" : "failed";
    o["attempts"] = e.attempts;
    o["retries"] = e.retries;
    if (!e.error.empty()) o["error"] = e.error;
    o["warnings"] = e.warnings;
    list.push_back(std::move(o));
  }
  root["events"] = std::move(list);
  root["failed"] = failures().size();
  return json_io::dump(root);
}

namespace {

struct EventTask {
  std::size_t scene = 0;
  std::size_t event = 0;
};

struct EventResult {
  EventOutcome outcome;
  std::vector<Annotation> annotations;
};

EventResult run_event(const NarrativeDocument& doc, const EventTask& task, Provider& provider,
                      const PipelineOptions& options) {
  const Scene& scene = doc.scenes[task.scene];
  const Event& event = scene.events[task.event];
  EventResult result;
  result.outcome.scene = scene.id;
  result.outcome.event = event.id;

  AnnotationRequest request;
  try {
    request = make_request(doc, task.scene, task.event);
    request.check();
  } catch (const std::exception& e) {
    result.outcome.error = e.what();
    return result;
  }
  const ProviderRequest call{request.fingerprint(), options.model, build_prompt(request)};

  const int max_attempts = 1 + std::max(0, options.max_retries);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    result.outcome.attempts = attempt;
    try {
      const std::string raw = provider.complete(call);
      ProviderResponse response = parse_response(raw, doc.characters, doc.text, event.span);
      for (ResponseRow& row : response.rows) {
        Annotation a;
        a.character = row.character;
        a.bits = row.bits;
        a.explanation = std::move(row.explanation);
        result.annotations.push_back(std::move(a));
      }
      result.outcome.ok = true;
      result.outcome.retries = attempt - 1;
      result.outcome.error.clear();
      result.outcome.warnings = std::move(response.warnings);
      return result;
    } catch (const std::exception& e) {
      // Malformed output and transport failures are both retried.
      result.outcome.error = e.what();
    }
  }
  result.outcome.retries = result.outcome.attempts - 1;
  return result;
}

}  // namespace

AnnotationResult annotate_document(const NarrativeDocument& doc, Provider& provider, const PipelineOptions& options) {
  if (options.concurrency < 1) throw std::invalid_argument("concurrency must be at least 1");

  std::vector<EventTask> tasks;
  for (std::size_t s = 0; s < doc.scenes.size(); ++s) {
    for (std::size_t e = 0; e < doc.scenes[s].events.size(); ++e) tasks.push_back({s, e});
  }
  std::vector<EventResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) results[i] = run_event(doc, tasks[i], provider, options);
  };
  {
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(options.concurrency), tasks.size());
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }

  AnnotationResult out{doc, {}};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Event& event = out.document.scenes[tasks[i].scene].events[tasks[i].event];
    event.annotations = std::move(results[i].annotations);
    out.report.events.push_back(std::move(results[i].outcome));
  }
  return out;
}

AnnotationResult annotate_document(const NarrativeDocument& doc, const ProviderConfig& config) {
  config.check();
  auto provider = make_provider(config);
  return annotate_document(doc, *provider, PipelineOptions{config.model, config.max_retries, config.concurrency});
}

}  // namespace focal

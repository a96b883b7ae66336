#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace focal {

// Half-open interval [start, end) counted in Unicode code points.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end > start ? end - start : 0; }
  bool contains(const Span& other) const { return start <= other.start && other.end <= end; }
  bool overlaps(const Span& other) const { return start < other.end && other.start < end; }

  friend bool operator==(const Span&, const Span&) = default;
};

// The six binary columns, in evaluation order.
enum class Label { kPov = 0, kInternal, kExternal, kPerceptual, kIdeological, kPsychological };

inline constexpr std::size_t kLabelCount = 6;
inline constexpr std::array<Label, kLabelCount> kAllLabels = {
    Label::kPov,        Label::kInternal,    Label::kExternal,
    Label::kPerceptual, Label::kIdeological, Label::kPsychological};

// Display name ("POV", "Internal", ...).
std::string_view label_name(Label label);
// Lower-case column/key name ("pov", "internal", ...).
std::string_view label_key(Label label);

struct Explanation {
  std::string rationale;
  std::vector<Span> cues;
  // Cue phrases returned by a provider that could not be located in the event text.
  std::vector<std::string> unresolved_cues;

  friend bool operator==(const Explanation&, const Explanation&) = default;
};

// One (event, character) row. Bits are stored as read so that validate can
// report out-of-range values instead of the parser silently coercing them.
struct Annotation {
  std::string character;
  std::array<int, kLabelCount> bits{};
  std::optional<Explanation> explanation;

  int bit(Label label) const { return bits[static_cast<std::size_t>(label)]; }
  int& bit(Label label) { return bits[static_cast<std::size_t>(label)]; }
  bool has(Label label) const { return bit(label) == 1; }

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Event {
  std::string id;
  Span span;
  std::optional<std::string> location;
  std::vector<Annotation> annotations;

  const Annotation* find_annotation(std::string_view character_id) const;

  friend bool operator==(const Event&, const Event&) = default;
};

struct Scene {
  std::string id;
  std::string title;
  Span span;
  std::vector<Event> events;

  const Event* find_event(std::string_view event_id) const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct Character {
  std::string id;
  std::string name;

  friend bool operator==(const Character&, const Character&) = default;
};

struct NarrativeDocument {
  std::string id;
  std::string title;
  std::optional<std::string> author;
  std::string text;  // UTF-8; offsets into it are code points
  std::vector<Character> characters;
  std::vector<Scene> scenes;
  // Unrecognized top-level keys kept from a non-strict parse, re-emitted on
  // serialization.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  const Scene* find_scene(std::string_view scene_id) const;
  const Character* find_character(std::string_view character_id) const;

  friend bool operator==(const NarrativeDocument&, const NarrativeDocument&) = default;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  kSpanRange,         // span outside text / parent, or start > end
  kSpanOverlap,       // sibling spans overlap
  kSpanOrder,         // siblings out of start order
  kDuplicateId,
  kEmptyField,
  kDanglingCharacter,
  kDuplicateAnnotation,
  kBitRange,          // flag outside {0, 1}
  kFacetWithoutType,  // strict only
  kCueOutsideEvent,
  kNoScenes,
  kEmptyScene,        // strict only
  kUnannotatedEvent,  // strict only
  kMultiplePov,       // warning, strict only
};

std::string_view violation_kind_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string path;  // e.g. scenes[2].events[0].span
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  // Advisory findings (e.g. several POV characters in one event); never
  // affect ok().
  std::vector<Violation> warnings;

  bool ok() const { return violations.empty(); }

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

ValidationReport validate(const NarrativeDocument& doc, bool strict = false);

// Ids of characters with at least one annotation in the scene, in order of
// first appearance (event order, then annotation order).
std::vector<std::string> active_characters(const Scene& scene);

// Composite key aligning gold and predicted rows.
struct RowKey {
  std::string scene;
  std::string event;
  std::string character;

  std::string to_string() const;  // scene/event/character

  friend auto operator<=>(const RowKey&, const RowKey&) = default;
  friend bool operator==(const RowKey&, const RowKey&) = default;
};

// Throws std::invalid_argument when a component is empty.
RowKey row_key(std::string scene_id, std::string event_id, std::string character_id);

}  // namespace focal

#include "focal/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "focal/utf8.hpp"

namespace focal {

std::string_view label_name(Label label) {
  switch (label) {
    case Label::kPov: return "POV";
    case Label::kInternal: return "Internal";
    case Label::kExternal: return "External";
    case Label::kPerceptual: return "Perceptual";
    case Label::kIdeological: return "Ideological";
    case Label::kPsychological: return "Psychological";
  }
  return "?";
}

std::string_view label_key(Label label) {
  switch (label) {
    case Label::kPov: return "pov";
    case Label::kInternal: return "internal";
    case Label::kExternal: return "external";
    case Label::kPerceptual: return "perceptual";
    case Label::kIdeological: return "ideological";
    case Label::kPsychological: return "psychological";
  }
  return "?";
}

const Annotation* Event::find_annotation(std::string_view character_id) const {
  for (const Annotation& a : annotations) {
    if (a.character == character_id) return &a;
  }
  return nullptr;
}

const Event* Scene::find_event(std::string_view event_id) const {
  for (const Event& e : events) {
    if (e.id == event_id) return &e;
  }
  return nullptr;
}

const Scene* NarrativeDocument::find_scene(std::string_view scene_id) const {
  for (const Scene& s : scenes) {
    if (s.id == scene_id) return &s;
  }
  return nullptr;
}

const Character* NarrativeDocument::find_character(std::string_view character_id) const {
  for (const Character& c : characters) {
    if (c.id == character_id) return &c;
  }
  return nullptr;
}

std::string_view violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kSpanRange: return "span-range";
    case ViolationKind::kSpanOverlap: return "span-overlap";
    case ViolationKind::kSpanOrder: return "span-order";
    case ViolationKind::kDuplicateId: return "duplicate-id";
    case ViolationKind::kEmptyField: return "empty-field";
    case ViolationKind::kDanglingCharacter: return "dangling-character";
    case ViolationKind::kDuplicateAnnotation: return "duplicate-annotation";
    case ViolationKind::kBitRange: return "bit-range";
    case ViolationKind::kFacetWithoutType: return "facet-without-type";
    case ViolationKind::kCueOutsideEvent: return "cue-outside-event";
    case ViolationKind::kNoScenes: return "no-scenes";
    case ViolationKind::kEmptyScene: return "empty-scene";
    case ViolationKind::kUnannotatedEvent: return "unannotated-event";
    case ViolationKind::kMultiplePov: return "multiple-pov";
  }
  return "?";
}

namespace {

std::string span_text(const Span& s) { return fmt::format("[{}, {})", s.start, s.end); }

class Validator {
 public:
  Validator(const NarrativeDocument& doc, bool strict) : doc_(doc), strict_(strict) {}

  ValidationReport run() {
    text_length_ = utf8::length(doc_.text);
    check_characters();
    if (doc_.scenes.empty()) add(ViolationKind::kNoScenes, "scenes", "document has no scenes");

    std::set<std::string> scene_ids;
    std::set<std::string> event_ids;
    const Span whole{0, text_length_};
    for (std::size_t i = 0; i < doc_.scenes.size(); ++i) {
      const Scene& scene = doc_.scenes[i];
      const std::string path = fmt::format("scenes[{}]", i);
      if (scene.id.empty()) add(ViolationKind::kEmptyField, path + ".id", "scene id is empty");
      else if (!scene_ids.insert(scene.id).second)
        add(ViolationKind::kDuplicateId, path + ".id", fmt::format("duplicate scene id '{}'", scene.id));

      check_span(scene.span, whole, path + ".span", "text");
      if (i > 0) check_sibling(doc_.scenes[i - 1].span, scene.span, path + ".span", "scene");

      if (scene.events.empty() && strict_)
        add(ViolationKind::kEmptyScene, path + ".events", "scene has no events");

      for (std::size_t j = 0; j < scene.events.size(); ++j) {
        const Event& event = scene.events[j];
        const std::string epath = fmt::format("{}.events[{}]", path, j);
        if (event.id.empty()) add(ViolationKind::kEmptyField, epath + ".id", "event id is empty");
        else if (!event_ids.insert(event.id).second)
          add(ViolationKind::kDuplicateId, epath + ".id", fmt::format("duplicate event id '{}'", event.id));

        check_span(event.span, scene.span, epath + ".span", "scene");
        if (j > 0) check_sibling(scene.events[j - 1].span, event.span, epath + ".span", "event");
        check_annotations(event, epath);
      }
    }
    return std::move(report_);
  }

 private:
  void add(ViolationKind kind, std::string path, std::string message) {
    report_.violations.push_back({kind, std::move(path), std::move(message)});
  }
  void warn(ViolationKind kind, std::string path, std::string message) {
    report_.warnings.push_back({kind, std::move(path), std::move(message)});
  }

  void check_characters() {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc_.characters.size(); ++i) {
      const Character& c = doc_.characters[i];
      const std::string path = fmt::format("characters[{}]", i);
      if (c.id.empty()) add(ViolationKind::kEmptyField, path + ".id", "character id is empty");
      else if (!ids.insert(c.id).second)
        add(ViolationKind::kDuplicateId, path + ".id", fmt::format("duplicate character id '{}'", c.id));
      if (c.name.empty()) add(ViolationKind::kEmptyField, path + ".name", "character name is empty");
    }
  }

  void check_span(const Span& span, const Span& parent, const std::string& path,
                  std::string_view parent_name) {
    if (span.start > span.end) {
      add(ViolationKind::kSpanRange, path, fmt::format("span {} has start after end", span_text(span)));
    } else if (!parent.contains(span)) {
      add(ViolationKind::kSpanRange, path,
          fmt::format("span {} is not within {} span {}", span_text(span), parent_name, span_text(parent)));
    }
  }

  void check_sibling(const Span& prev, const Span& cur, const std::string& path,
                     std::string_view what) {
    if (prev.overlaps(cur)) {
      add(ViolationKind::kSpanOverlap, path,
          fmt::format("{} span {} overlaps previous {} span {}", what, span_text(cur), what, span_text(prev)));
    } else if (cur.start < prev.start) {
      add(ViolationKind::kSpanOrder, path,
          fmt::format("{} span {} starts before previous {} span {}", what, span_text(cur), what, span_text(prev)));
    }
  }

  void check_annotations(const Event& event, const std::string& epath) {
    if (event.annotations.empty() && strict_)
      add(ViolationKind::kUnannotatedEvent, epath + ".annotations", "event has no annotations");

    std::set<std::string> seen;
    int pov_count = 0;
    for (std::size_t k = 0; k < event.annotations.size(); ++k) {
      const Annotation& a = event.annotations[k];
      const std::string apath = fmt::format("{}.annotations[{}]", epath, k);
      if (a.character.empty()) {
        add(ViolationKind::kEmptyField, apath + ".character", "annotation character is empty");
      } else if (doc_.find_character(a.character) == nullptr) {
        add(ViolationKind::kDanglingCharacter, apath + ".character",
            fmt::format("character '{}' is not in the roster", a.character));
      }
      if (!a.character.empty() && !seen.insert(a.character).second) {
        add(ViolationKind::kDuplicateAnnotation, apath + ".character",
            fmt::format("second annotation for character '{}'", a.character));
      }

      bool bits_ok = true;
      for (Label label : kAllLabels) {
        const int v = a.bit(label);
        if (v != 0 && v != 1) {
          bits_ok = false;
          add(ViolationKind::kBitRange, fmt::format("{}.{}", apath, label_key(label)),
              fmt::format("flag value {} is not 0 or 1", v));
        }
      }
      if (a.has(Label::kPov)) ++pov_count;

      if (strict_ && bits_ok) {
        const bool facet = a.has(Label::kPerceptual) || a.has(Label::kIdeological) ||
                           a.has(Label::kPsychological);
        const bool type = a.has(Label::kInternal) || a.has(Label::kExternal);
        if (facet && !type)
          add(ViolationKind::kFacetWithoutType, apath, "facet set without internal or external type");
      }

      if (a.explanation) {
        const auto& cues = a.explanation->cues;
        for (std::size_t c = 0; c < cues.size(); ++c) {
          if (cues[c].start > cues[c].end || !event.span.contains(cues[c])) {
            add(ViolationKind::kCueOutsideEvent, fmt::format("{}.explanation.cues[{}]", apath, c),
                fmt::format("cue {} is not within event span {}", span_text(cues[c]), span_text(event.span)));
          }
        }
      }
    }
    if (strict_ && pov_count > 1) {
      warn(ViolationKind::kMultiplePov, epath,
           fmt::format("{} characters carry the POV flag in one event", pov_count));
    }
  }

  const NarrativeDocument& doc_;
  bool strict_;
  std::size_t text_length_ = 0;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const NarrativeDocument& doc, bool strict) {
  return Validator(doc, strict).run();
}

std::vector<std::string> active_characters(const Scene& scene) {
  std::vector<std::string> out;
  for (const Event& e : scene.events) {
    for (const Annotation& a : e.annotations) {
      if (std::find(out.begin(), out.end(), a.character) == out.end()) out.push_back(a.character);
    }
  }
  return out;
}

std::string RowKey::to_string() const { return scene + "/" + event + "/" + character; }

RowKey row_key(std::string scene_id, std::string event_id, std::string character_id) {
  if (scene_id.empty() || event_id.empty() || character_id.empty())
    throw std::invalid_argument("row key components must be non-empty");
  return RowKey{std::move(scene_id), std::move(event_id), std::move(character_id)};
}

}  // namespace focal

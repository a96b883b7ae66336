#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "focal/model.hpp"

namespace focal {

// Card geometry constants, in pixels.
struct LayoutConfig {
  int event_spacing = 56;      // between event columns
  int character_spacing = 44;  // between character rows
  int label_width = 72;
  int title_height = 28;
  int padding = 16;
  int container_width = 1200;
  int gap = 24;  // between cards, horizontally and vertically
  int min_card_width = 188;
  int min_card_height = 160;

  // Throws std::invalid_argument unless every value is positive.
  void check() const;
};

struct CardDimensions {
  int plot_width = 0;
  int plot_height = 0;
  int card_width = 0;
  int card_height = 0;

  friend bool operator==(const CardDimensions&, const CardDimensions&) = default;
};

// Plot area from the event and character counts, card clamped per dimension
// to the configured minimum. Throws std::invalid_argument on zero counts.
CardDimensions card_dimensions(std::size_t event_count, std::size_t character_count,
                               const LayoutConfig& config);

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct CardOrigin {
  int x = 0;
  int y = 0;
  friend bool operator==(const CardOrigin&, const CardOrigin&) = default;
};

// Greedy left-to-right packing with wrap. `scene_ids` names the cards for
// errors; throws LayoutError when a card is wider than the container.
std::vector<CardOrigin> flow_cards(const std::vector<CardDimensions>& dims,
                                   const std::vector<std::string>& scene_ids,
                                   const LayoutConfig& config);

struct GlyphAnchor {
  std::string event;
  std::string character;
  Point at;  // timeline coordinates

  friend bool operator==(const GlyphAnchor&, const GlyphAnchor&) = default;
};

struct CardGeometry {
  std::string scene;
  std::vector<std::string> events;      // columns
  std::vector<std::string> characters;  // rows
  CardDimensions dims;
  CardOrigin origin;
  // Row-major: anchors[row * events.size() + column].
  std::vector<GlyphAnchor> anchors;

  std::size_t event_count() const { return events.size(); }
  std::size_t character_count() const { return characters.size(); }
  const GlyphAnchor& anchor(std::size_t row, std::size_t column) const {
    return anchors.at(row * events.size() + column);
  }

  friend bool operator==(const CardGeometry&, const CardGeometry&) = default;
};

struct Arrow {
  std::size_t from = 0;  // card indices
  std::size_t to = 0;
  std::vector<Point> points;

  friend bool operator==(const Arrow&, const Arrow&) = default;
};

enum class ViewKind { kOverview, kScene, kCharacter };

struct View {
  ViewKind kind = ViewKind::kOverview;
  std::string id;  // scene or character id

  static View overview() { return {}; }
  static View scene(std::string id) { return {ViewKind::kScene, std::move(id)}; }
  static View character(std::string id) { return {ViewKind::kCharacter, std::move(id)}; }

  // "overview" | "scene:SID" | "character:CID". Throws std::invalid_argument.
  static View parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const View&, const View&) = default;
};

struct TimelineLayout {
  View view;
  LayoutConfig config;
  std::vector<CardGeometry> cards;
  std::vector<Arrow> arrows;
  int width = 0;
  int height = 0;

  bool operator==(const TimelineLayout& other) const {
    return view == other.view && cards == other.cards && arrows == other.arrows &&
           width == other.width && height == other.height;
  }
};

// Throws NotFoundError for unknown ids or a character view with no active
// scenes; LayoutError when a card does not fit the container.
TimelineLayout build_layout(const NarrativeDocument& doc, const View& view,
                            const LayoutConfig& config = {});

// Structured-text form consumed by the renderer and web client.
std::string serialize_layout(const TimelineLayout& layout);

}  // namespace focal

#include "focal/layout.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "focal/errors.hpp"
#include "focal/store.hpp"

namespace focal {

void LayoutConfig::check() const {
  const int values[] = {event_spacing, character_spacing, label_width,    title_height,   padding,
                        container_width, gap,             min_card_width, min_card_height};
  for (int v : values) {
    if (v <= 0) throw std::invalid_argument("layout constants must be positive");
  }
}

CardDimensions card_dimensions(std::size_t event_count, std::size_t character_count,
                               const LayoutConfig& config) {
  if (event_count == 0 || character_count == 0)
    throw std::invalid_argument("a card needs at least one event and one character");
  CardDimensions d;
  d.plot_width = config.event_spacing * static_cast<int>(event_count - 1);
  d.plot_height = config.character_spacing * static_cast<int>(character_count - 1);
  d.card_width = std::max(config.label_width + d.plot_width + config.padding, config.min_card_width);
  d.card_height = std::max(config.title_height + d.plot_height + config.padding, config.min_card_height);
  return d;
}

std::vector<CardOrigin> flow_cards(const std::vector<CardDimensions>& dims,
                                   const std::vector<std::string>& scene_ids,
                                   const LayoutConfig& config) {
  std::vector<CardOrigin> origins;
  origins.reserve(dims.size());
  int x = 0;
  int y = 0;
  int row_height = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const CardDimensions& d = dims[i];
    const std::string name = i < scene_ids.size() ? scene_ids[i] : fmt::format("#{}", i);
    if (d.card_width > config.container_width) {
      throw LayoutError(fmt::format("card for scene '{}' is {} px wide, container is {} px", name,
                                    d.card_width, config.container_width),
                        name);
    }
    if (x > 0 && x + d.card_width > config.container_width) {
      x = 0;
      y += row_height + config.gap;
      row_height = 0;
    }
    origins.push_back({x, y});
    x += d.card_width + config.gap;
    row_height = std::max(row_height, d.card_height);
  }
  return origins;
}

View View::parse(std::string_view text) {
  if (text == "overview") return overview();
  auto tail = [&](std::string_view prefix) -> std::optional<std::string> {
    if (!text.starts_with(prefix)) return std::nullopt;
    std::string id(text.substr(prefix.size()));
    if (id.empty()) throw std::invalid_argument(fmt::format("view '{}' is missing an id", text));
    return id;
  };
  if (auto id = tail("scene:")) return scene(*id);
  if (auto id = tail("character:")) return character(*id);
  throw std::invalid_argument(fmt::format("malformed view '{}'; expected overview, scene:ID or character:ID", text));
}

std::string View::to_string() const {
  switch (kind) {
    case ViewKind::kOverview: return "overview";
    case ViewKind::kScene: return "scene:" + id;
    case ViewKind::kCharacter: return "character:" + id;
  }
  return "overview";
}

namespace {

CardGeometry make_card(const Scene& scene, std::vector<std::string> characters, const LayoutConfig& config) {
  CardGeometry card;
  card.scene = scene.id;
  for (const Event& e : scene.events) card.events.push_back(e.id);
  card.characters = std::move(characters);
  card.dims = card_dimensions(card.events.size(), card.characters.size(), config);
  return card;
}

// Anchors sit on the exact spacing grid; clamping slack is split evenly so
// the grid stays centered in the plot area.
void place_anchors(CardGeometry& card, const LayoutConfig& config) {
  const CardDimensions& d = card.dims;
  const double slack_x = d.card_width - (config.label_width + d.plot_width + config.padding);
  const double slack_y = d.card_height - (config.title_height + d.plot_height + config.padding);
  const double left = card.origin.x + config.label_width + config.padding / 2.0 + slack_x / 2.0;
  const double top = card.origin.y + config.title_height + config.padding / 2.0 + slack_y / 2.0;
  card.anchors.clear();
  for (std::size_t row = 0; row < card.characters.size(); ++row) {
    for (std::size_t col = 0; col < card.events.size(); ++col) {
      card.anchors.push_back({card.events[col], card.characters[row],
                              Point{left + static_cast<double>(col) * config.event_spacing,
                                    top + static_cast<double>(row) * config.character_spacing}});
    }
  }
}

std::vector<Arrow> route_arrows(const std::vector<CardGeometry>& cards, const LayoutConfig& config) {
  std::vector<Arrow> arrows;
  for (std::size_t i = 1; i < cards.size(); ++i) {
    const CardGeometry& a = cards[i - 1];
    const CardGeometry& b = cards[i];
    Arrow arrow{i - 1, i, {}};
    if (a.origin.y == b.origin.y) {
      const Point p0{static_cast<double>(a.origin.x + a.dims.card_width), a.origin.y + a.dims.card_height / 2.0};
      const Point p1{static_cast<double>(b.origin.x), b.origin.y + b.dims.card_height / 2.0};
      arrow.points.push_back(p0);
      if (p0.y != p1.y) {
        const double mid_x = (p0.x + p1.x) / 2.0;
        arrow.points.push_back({mid_x, p0.y});
        arrow.points.push_back({mid_x, p1.y});
      }
      arrow.points.push_back(p1);
    } else {
      const Point p0{a.origin.x + a.dims.card_width / 2.0, static_cast<double>(a.origin.y + a.dims.card_height)};
      const Point p1{b.origin.x + b.dims.card_width / 2.0, static_cast<double>(b.origin.y)};
      const double mid_y = b.origin.y - config.gap / 2.0;
      arrow.points = {p0, {p0.x, mid_y}, {p1.x, mid_y}, p1};
    }
    arrows.push_back(std::move(arrow));
  }
  return arrows;
}

}  // namespace

TimelineLayout build_layout(const NarrativeDocument& doc, const View& view, const LayoutConfig& config) {
  config.check();
  TimelineLayout layout;
  layout.view = view;
  layout.config = config;

  switch (view.kind) {
    case ViewKind::kOverview:
      for (const Scene& scene : doc.scenes) {
        auto active = active_characters(scene);
        if (scene.events.empty() || active.empty()) continue;
        layout.cards.push_back(make_card(scene, std::move(active), config));
      }
      break;
    case ViewKind::kScene: {
      const Scene* scene = doc.find_scene(view.id);
      if (scene == nullptr) throw NotFoundError(fmt::format("unknown scene '{}'", view.id));
      auto active = active_characters(*scene);
      if (scene->events.empty() || active.empty())
        throw LayoutError(fmt::format("scene '{}' has no annotated events to lay out", view.id), view.id);
      layout.cards.push_back(make_card(*scene, std::move(active), config));
      break;
    }
    case ViewKind::kCharacter: {
      if (doc.find_character(view.id) == nullptr)
        throw NotFoundError(fmt::format("unknown character '{}'", view.id));
      for (const Scene& scene : doc.scenes) {
        const auto active = active_characters(scene);
        if (std::find(active.begin(), active.end(), view.id) == active.end()) continue;
        layout.cards.push_back(make_card(scene, {view.id}, config));
      }
      if (layout.cards.empty())
        throw NotFoundError(fmt::format("character '{}' is not active in any scene", view.id));
      break;
    }
  }

  std::vector<CardDimensions> dims;
  std::vector<std::string> ids;
  for (const CardGeometry& c : layout.cards) {
    dims.push_back(c.dims);
    ids.push_back(c.scene);
  }
  const auto origins = flow_cards(dims, ids, config);
  for (std::size_t i = 0; i < layout.cards.size(); ++i) {
    CardGeometry& card = layout.cards[i];
    card.origin = origins[i];
    place_anchors(card, config);
    layout.width = std::max(layout.width, card.origin.x + card.dims.card_width);
    layout.height = std::max(layout.height, card.origin.y + card.dims.card_height);
  }
  layout.arrows = route_arrows(layout.cards, config);
  return layout;
}

std::string serialize_layout(const TimelineLayout& layout) {
  using nlohmann::ordered_json;
  const LayoutConfig& c = layout.config;
  ordered_json root = ordered_json::object();
  root["view"] = layout.view.to_string();
  root["width"] = layout.width;
  root["height"] = layout.height;
  root["config"] = ordered_json{{"event_spacing", c.event_spacing},
                                {"character_spacing", c.character_spacing},
                                {"label_width", c.label_width},
                                {"title_height", c.title_height},
                                {"padding", c.padding},
                                {"container_width", c.container_width},
                                {"gap", c.gap},
                                {"min_card_width", c.min_card_width},
                                {"min_card_height", c.min_card_height}};
  ordered_json cards = ordered_json::array();
  for (const CardGeometry& card : layout.cards) {
    ordered_json o = ordered_json::object();
    o["scene"] = card.scene;
    o["x"] = card.origin.x;
    o["y"] = card.origin.y;
    o["width"] = card.dims.card_width;
    o["height"] = card.dims.card_height;
    o["plot_width"] = card.dims.plot_width;
    o["plot_height"] = card.dims.plot_height;
    o["events"] = card.events;
    o["characters"] = card.characters;
    ordered_json anchors = ordered_json::array();
    for (const GlyphAnchor& a : card.anchors)
      anchors.push_back(ordered_json{{"event", a.event}, {"character", a.character}, {"x", a.at.x}, {"y", a.at.y}});
    o["anchors"] = std::move(anchors);
    cards.push_back(std::move(o));
  }
  root["cards"] = std::move(cards);
  ordered_json arrows = ordered_json::array();
  for (const Arrow& a : layout.arrows) {
    ordered_json points = ordered_json::array();
    for (const Point& p : a.points) points.push_back(ordered_json::array({p.x, p.y}));
    arrows.push_back(ordered_json{{"from", a.from}, {"to", a.to}, {"points", std::move(points)}});
  }
  root["arrows"] = std::move(arrows);
  return json_io::dump(root);
}

}  // namespace focal

#include "focal/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "focal/errors.hpp"

namespace focal {

std::string_view token_name(ColorToken token) {
  switch (token) {
    case ColorToken::kPov: return "pov";
    case ColorToken::kInternal: return "internal";
    case ColorToken::kExternal: return "external";
    case ColorToken::kFacetPresent: return "facet_present";
    case ColorToken::kFacetAbsent: return "facet_absent";
    case ColorToken::kRingStroke: return "ring_stroke";
  }
  return "?";
}

void GlyphStyle::check() const {
  if (!(0 < center_radius && center_radius < type_inner && type_inner < type_outer &&
        type_outer < facet_inner && facet_inner < facet_outer && facet_outer <= outer_radius))
    throw std::invalid_argument("glyph radii must increase strictly outward");

  auto arcs = facet_arcs;
  std::sort(arcs.begin(), arcs.end(), [](const FacetArc& a, const FacetArc& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (std::abs(arcs[i].end - arcs[i].start - 120.0) > 1e-9)
      throw std::invalid_argument("facet arcs must each span 120 degrees");
    if (i > 0 && std::abs(arcs[i].start - arcs[i - 1].end) > 1e-9)
      throw std::invalid_argument("facet arcs must be contiguous and disjoint");
  }
  bool seen[kLabelCount] = {};
  for (const FacetArc& a : arcs) {
    if (a.facet != Label::kPerceptual && a.facet != Label::kPsychological && a.facet != Label::kIdeological)
      throw std::invalid_argument("facet arcs must name facet labels");
    if (seen[static_cast<std::size_t>(a.facet)]) throw std::invalid_argument("facet assigned to two arcs");
    seen[static_cast<std::size_t>(a.facet)] = true;
  }
}

std::string svg_number(double value) {
  std::string s = fmt::format("{:.2f}", value);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

Point polar(Point c, double r, double degrees) {
  const double t = degrees * std::numbers::pi / 180.0;
  return {c.x + r * std::sin(t), c.y - r * std::cos(t)};
}

std::string pt(Point p) { return svg_number(p.x) + "," + svg_number(p.y); }

// Ring segment between `inner` and `outer`, clockwise from `start` to `end`.
std::string sector_path(Point c, double inner, double outer, double start, double end) {
  const int large = end - start > 180.0 ? 1 : 0;
  return fmt::format("M{} A{},{} 0 {} 1 {} L{} A{},{} 0 {} 0 {} Z", pt(polar(c, outer, start)),
                     svg_number(outer), svg_number(outer), large, pt(polar(c, outer, end)),
                     pt(polar(c, inner, end)), svg_number(inner), svg_number(inner), large,
                     pt(polar(c, inner, start)));
}

// Full ring as two circles under the even-odd rule.
std::string annulus_path(Point c, double inner, double outer) {
  auto circle = [&](double r, int sweep) {
    return fmt::format("M{} A{},{} 0 1 {} {} A{},{} 0 1 {} {} Z", pt({c.x, c.y - r}), svg_number(r),
                       svg_number(r), sweep, pt({c.x, c.y + r}), svg_number(r), svg_number(r), sweep,
                       pt({c.x, c.y - r}));
  };
  return circle(outer, 1) + " " + circle(inner, 0);
}

std::string filled_path(std::string_view id, std::string_view d, const GlyphStyle& style,
                        std::optional<ColorToken> fill) {
  return fmt::format(
      R"(<path id="{}" d="{}" fill="{}" fill-rule="evenodd" stroke="{}" stroke-width="0.75" data-token="{}"/>)",
      xml_escape(id), d, fill ? style.color(*fill) : "none", style.color(ColorToken::kRingStroke),
      fill ? token_name(*fill) : "none");
}

}  // namespace

std::string render_glyph(const Annotation& a, const GlyphStyle& style, std::string_view id, Point c) {
  const std::string gid = xml_escape(id);
  std::string out = fmt::format(R"(<g id="{}" class="glyph">)", gid);

  const std::optional<ColorToken> pov = a.has(Label::kPov) ? std::optional(ColorToken::kPov) : std::nullopt;
  out += fmt::format(
      R"(<circle id="{}-pov" cx="{}" cy="{}" r="{}" fill="{}" stroke="{}" stroke-width="0.75" data-token="{}"/>)",
      gid, svg_number(c.x), svg_number(c.y), svg_number(style.center_radius),
      pov ? style.color(*pov) : "none", style.color(ColorToken::kRingStroke), pov ? token_name(*pov) : "none");

  const bool internal = a.has(Label::kInternal);
  const bool external = a.has(Label::kExternal);
  if (internal && external) {
    // Left half internal, right half external; split on the vertical axis.
    out += filled_path(std::string(id) + "-type-internal",
                       sector_path(c, style.type_inner, style.type_outer, 180, 360), style, ColorToken::kInternal);
    out += filled_path(std::string(id) + "-type-external",
                       sector_path(c, style.type_inner, style.type_outer, 0, 180), style, ColorToken::kExternal);
  } else {
    std::optional<ColorToken> fill;
    if (internal) fill = ColorToken::kInternal;
    if (external) fill = ColorToken::kExternal;
    out += filled_path(std::string(id) + "-type", annulus_path(c, style.type_inner, style.type_outer), style, fill);
  }

  for (const FacetArc& arc : style.facet_arcs) {
    const ColorToken fill = a.has(arc.facet) ? ColorToken::kFacetPresent : ColorToken::kFacetAbsent;
    out += filled_path(fmt::format("{}-facet-{}", id, label_key(arc.facet)),
                       sector_path(c, style.facet_inner, style.facet_outer, arc.start, arc.end), style, fill);
  }
  out += "</g>";
  return out;
}

namespace {

constexpr int kMargin = 16;
constexpr std::string_view kInk = "#37474F";
constexpr std::string_view kCardStroke = "#B0BEC5";

std::string points_attr(const std::vector<Point>& points) {
  std::string s;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) s += ' ';
    s += pt(points[i]);
  }
  return s;
}

}  // namespace

SvgDocument render_timeline(const TimelineLayout& layout, const NarrativeDocument& doc, const GlyphStyle& style) {
  style.check();
  SvgDocument svg;
  svg.width = layout.width + 2 * kMargin;
  svg.height = layout.height + 2 * kMargin;

  std::string& out = svg.content;
  out += R"(<?xml version="1.0" encoding="UTF-8"?>)" "\n";
  out += fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}" data-view="{2}">)"
      "\n",
      svg.width, svg.height, xml_escape(layout.view.to_string()));
  out += fmt::format(
      R"(<defs><marker id="arrowhead" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" markerHeight="8" orient="auto"><path d="M0,0 L10,5 L0,10 Z" fill="{}"/></marker></defs>)"
      "\n",
      kInk);
  out += fmt::format(R"~(<g transform="translate({0},{0})" font-family="sans-serif" fill="{1}">)~" "\n", kMargin, kInk);

  for (const CardGeometry& card : layout.cards) {
    const Scene* scene = doc.find_scene(card.scene);
    if (scene == nullptr) throw RenderError(fmt::format("layout card names unknown scene '{}'", card.scene));

    out += fmt::format(R"(<g id="card-{}" class="card">)" "\n", xml_escape(card.scene));
    out += fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" rx="6" fill="#FFFFFF" stroke="{}"/>)" "\n",
                       card.origin.x, card.origin.y, card.dims.card_width, card.dims.card_height, kCardStroke);
    out += fmt::format(R"(<text class="card-title" x="{}" y="{}" font-size="13" font-weight="bold">{}</text>)" "\n",
                       card.origin.x + 8, card.origin.y + 18, xml_escape(scene->title));

    for (std::size_t row = 0; row < card.character_count(); ++row) {
      const Character* ch = doc.find_character(card.characters[row]);
      if (ch == nullptr) throw RenderError(fmt::format("layout row names unknown character '{}'", card.characters[row]));
      const Point a = card.anchor(row, 0).at;
      out += fmt::format(
          R"(<text class="character-label" x="{}" y="{}" font-size="11" text-anchor="end" dominant-baseline="middle">{}</text>)"
          "\n",
          svg_number(a.x - style.outer_radius - 4), svg_number(a.y), xml_escape(ch->name));
    }
    for (std::size_t col = 0; col < card.event_count(); ++col) {
      if (scene->find_event(card.events[col]) == nullptr)
        throw RenderError(fmt::format("layout column names unknown event '{}'", card.events[col]));
      const Point a = card.anchor(card.character_count() - 1, col).at;
      out += fmt::format(
          R"(<text class="event-label" x="{}" y="{}" font-size="10" text-anchor="middle">{}</text>)" "\n",
          svg_number(a.x), svg_number(a.y + style.outer_radius + 12), col + 1);
    }
    for (const GlyphAnchor& anchor : card.anchors) {
      const Event* event = scene->find_event(anchor.event);
      const Annotation* annotation = event->find_annotation(anchor.character);
      if (annotation == nullptr) continue;  // character not annotated in this event
      out += render_glyph(*annotation, style, fmt::format("glyph-{}-{}", anchor.event, anchor.character), anchor.at);
      out += "\n";
    }
    out += "</g>\n";
  }

  for (std::size_t k = 0; k < layout.arrows.size(); ++k) {
    const Arrow& arrow = layout.arrows[k];
    out += fmt::format(
        R"~(<polyline id="arrow-{}" class="arrow" points="{}" fill="none" stroke="{}" stroke-width="1.5" marker-end="url(#arrowhead)"/>)~"
        "\n",
        k, points_attr(arrow.points), kInk);
  }
  out += "</g>\n</svg>\n";
  return svg;
}

std::string render_legend(const GlyphStyle& style) {
  style.check();
  std::string out = R"(<g id="legend" class="legend" font-family="sans-serif" font-size="11">)";

  const double r = style.outer_radius;
  Annotation pov_only;
  pov_only.bit(Label::kPov) = 1;
  Annotation split;
  split.bit(Label::kInternal) = 1;
  split.bit(Label::kExternal) = 1;
  Annotation facets;
  for (const FacetArc& arc : style.facet_arcs) facets.bit(arc.facet) = 1;

  const double x = r + 4;
  double y = r + 4;
  const double step = 2 * r + 18;
  out += fmt::format(R"(<g id="legend-ring-center" class="legend-ring" data-ring="center">)");
  out += render_glyph(pov_only, style, "legend-glyph-center", {x, y});
  out += fmt::format(R"(<text x="{}" y="{}" dominant-baseline="middle">Center: point of view (filled = POV)</text></g>)",
                     svg_number(x + r + 8), svg_number(y));
  y += step;
  out += fmt::format(R"(<g id="legend-ring-type" class="legend-ring" data-ring="type">)");
  out += render_glyph(split, style, "legend-glyph-type", {x, y});
  out += fmt::format(
      R"(<text x="{}" y="{}" dominant-baseline="middle">Middle: focalization type (left internal, right external)</text></g>)",
      svg_number(x + r + 8), svg_number(y));
  y += step;
  out += fmt::format(R"(<g id="legend-ring-facets" class="legend-ring" data-ring="facets">)");
  out += render_glyph(facets, style, "legend-glyph-facets", {x, y});
  std::string arcs;
  for (const FacetArc& arc : style.facet_arcs) {
    if (!arcs.empty()) arcs += ", ";
    arcs += fmt::format("{} {}-{}", label_key(arc.facet), svg_number(arc.start), svg_number(arc.end));
  }
  out += fmt::format(R"(<text x="{}" y="{}" dominant-baseline="middle">Outer: facets ({} degrees)</text></g>)",
                     svg_number(x + r + 8), svg_number(y), arcs);
  y += step;

  for (ColorToken token : kAllColorTokens) {
    const bool stroke_only = token == ColorToken::kRingStroke;
    out += fmt::format(
        R"(<rect id="legend-token-{0}" x="4" y="{1}" width="12" height="12" fill="{2}" stroke="{3}" data-token="{0}"/>)",
        token_name(token), svg_number(y - 6), stroke_only ? "none" : style.color(token),
        stroke_only ? style.color(token) : style.color(ColorToken::kRingStroke));
    out += fmt::format(R"(<text x="22" y="{}" dominant-baseline="middle">{}</text>)", svg_number(y), token_name(token));
    y += 18;
  }
  out += "</g>";
  return out;
}

std::string render_legend_document(const GlyphStyle& style) {
  const int height = static_cast<int>(std::ceil(3 * (2 * style.outer_radius + 18) + 6 * 18 + 8));
  return fmt::format(
      R"(<?xml version="1.0" encoding="UTF-8"?>)" "\n"
      R"(<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="420" height="{0}" viewBox="0 0 420 {0}">)" "\n"
      "{1}\n</svg>\n",
      height, render_legend(style));
}

}  // namespace focal

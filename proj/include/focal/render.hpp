#pragma once

#include <array>
#include <string>
#include <string_view>

#include "focal/layout.hpp"
#include "focal/model.hpp"

namespace focal {

// Named colors used by the glyph. Tests and the web client compare token
// names, never the hex values.
enum class ColorToken { kPov, kInternal, kExternal, kFacetPresent, kFacetAbsent, kRingStroke };

inline constexpr std::array<ColorToken, 6> kAllColorTokens = {
    ColorToken::kPov,          ColorToken::kInternal,    ColorToken::kExternal,
    ColorToken::kFacetPresent, ColorToken::kFacetAbsent, ColorToken::kRingStroke};

std::string_view token_name(ColorToken token);  // "pov", "facet_present", ...

// Angular interval of one facet arc, degrees clockwise from 12 o'clock.
struct FacetArc {
  Label facet = Label::kPerceptual;
  double start = 0;
  double end = 120;
};

struct GlyphStyle {
  double center_radius = 5;
  double type_inner = 6.5;
  double type_outer = 9.5;
  double facet_inner = 10.5;
  double facet_outer = 14;
  double outer_radius = 14;

  std::array<std::string, 6> colors = {"#4C7DD0", "#4CAF7D", "#E8923A",
                                       "#9E9E9E", "#FFFFFF", "#5F6368"};

  // Perceptual top-right, psychological bottom, ideological top-left.
  std::array<FacetArc, 3> facet_arcs = {FacetArc{Label::kPerceptual, 0, 120},
                                        FacetArc{Label::kPsychological, 120, 240},
                                        FacetArc{Label::kIdeological, 240, 360}};

  const std::string& color(ColorToken t) const { return colors[static_cast<std::size_t>(t)]; }
  std::string& color(ColorToken t) { return colors[static_cast<std::size_t>(t)]; }

  // Throws std::invalid_argument unless radii increase outward and the three
  // arcs are disjoint 120-degree intervals covering the circle, one per facet.
  void check() const;
};

// Formats a coordinate with at most two decimals ("12.5", "-3", "0").
std::string svg_number(double value);
std::string xml_escape(std::string_view text);

// One glyph as an SVG <g>. Child ids: {id}-pov, {id}-type or
// {id}-type-internal/{id}-type-external, {id}-facet-{name}. Every filled
// element carries data-token naming its color token, or "none".
std::string render_glyph(const Annotation& annotation, const GlyphStyle& style,
                         std::string_view id = "glyph", Point center = {});

struct SvgDocument {
  int width = 0;
  int height = 0;
  std::string content;  // complete SVG 1.1 file
};

// Throws RenderError if the layout references ids absent from `doc`.
SvgDocument render_timeline(const TimelineLayout& layout, const NarrativeDocument& doc,
                            const GlyphStyle& style = {});

// Three exemplar rings plus one swatch per color token, as an SVG <g>.
std::string render_legend(const GlyphStyle& style = {});

// Legend fragment wrapped in a standalone SVG document.
std::string render_legend_document(const GlyphStyle& style = {});

}  // namespace focal

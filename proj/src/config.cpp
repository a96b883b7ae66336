#include "focal/config.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>

#include "focal/errors.hpp"
#include "focal/store.hpp"

namespace focal {

using nlohmann::ordered_json;

namespace {

void reject_unknown(const ordered_json& obj, std::string_view section,
                    std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ParseError(fmt::format("{}.{}: unknown configuration key", section, key));
  }
}

const ordered_json* section(const ordered_json& root, std::string_view name) {
  auto it = root.find(name);
  if (it == root.end()) return nullptr;
  if (!it->is_object()) throw ParseError(fmt::format("{}: expected an object", name));
  return &*it;
}

template <typename T>
void read(const ordered_json& obj, std::string_view section_name, std::string_view key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(fmt::format("{}.{}: wrong value type", section_name, key));
  }
}

}  // namespace

AppConfig AppConfig::from_json(std::string_view bytes) {
  const ordered_json root = json_io::parse_json(bytes);
  if (!root.is_object()) throw ParseError("configuration must be a JSON object");
  reject_unknown(root, "<root>", {"layout", "style", "provider", "server"});
  AppConfig cfg;

  if (const auto* s = section(root, "layout")) {
    reject_unknown(*s, "layout", {"event_spacing", "character_spacing", "label_width", "title_height", "padding",
                                  "container_width", "gap", "min_card_width", "min_card_height"});
    LayoutConfig& l = cfg.layout;
    read(*s, "layout", "event_spacing", l.event_spacing);
    read(*s, "layout", "character_spacing", l.character_spacing);
    read(*s, "layout", "label_width", l.label_width);
    read(*s, "layout", "title_height", l.title_height);
    read(*s, "layout", "padding", l.padding);
    read(*s, "layout", "container_width", l.container_width);
    read(*s, "layout", "gap", l.gap);
    read(*s, "layout", "min_card_width", l.min_card_width);
    read(*s, "layout", "min_card_height", l.min_card_height);
    try {
      l.check();
    } catch (const std::invalid_argument& e) {
      throw ParseError(fmt::format("layout: {}", e.what()));
    }
  }

  if (const auto* s = section(root, "style")) {
    reject_unknown(*s, "style", {"center_radius", "type_inner", "type_outer", "facet_inner", "facet_outer",
                                 "outer_radius", "colors"});
    GlyphStyle& g = cfg.style;
    read(*s, "style", "center_radius", g.center_radius);
    read(*s, "style", "type_inner", g.type_inner);
    read(*s, "style", "type_outer", g.type_outer);
    read(*s, "style", "facet_inner", g.facet_inner);
    read(*s, "style", "facet_outer", g.facet_outer);
    read(*s, "style", "outer_radius", g.outer_radius);
    if (auto it = s->find("colors"); it != s->end()) {
      if (!it->is_object()) throw ParseError("style.colors: expected an object");
      for (const auto& [key, value] : it->items()) {
        bool matched = false;
        for (ColorToken t : kAllColorTokens) {
          if (token_name(t) != key) continue;
          if (!value.is_string()) throw ParseError(fmt::format("style.colors.{}: expected a string", key));
          g.color(t) = value.get<std::string>();
          matched = true;
        }
        if (!matched) throw ParseError(fmt::format("style.colors.{}: unknown color token", key));
      }
    }
    try {
      g.check();
    } catch (const std::invalid_argument& e) {
      throw ParseError(fmt::format("style: {}", e.what()));
    }
  }

  if (const auto* s = section(root, "provider")) {
    reject_unknown(*s, "provider", {"endpoint", "model", "max_retries", "concurrency", "timeout_ms"});
    ProviderConfig& p = cfg.provider;
    read(*s, "provider", "endpoint", p.endpoint);
    read(*s, "provider", "model", p.model);
    read(*s, "provider", "max_retries", p.max_retries);
    read(*s, "provider", "concurrency", p.concurrency);
    std::int64_t timeout_ms = p.timeout.count();
    read(*s, "provider", "timeout_ms", timeout_ms);
    p.timeout = std::chrono::milliseconds(timeout_ms);
    try {
      p.check();
    } catch (const std::invalid_argument& e) {
      throw ParseError(fmt::format("provider: {}", e.what()));
    }
  }

  if (const auto* s = section(root, "server")) {
    reject_unknown(*s, "server", {"host", "port", "cors_allow", "static_dir"});
    ServerOptions& o = cfg.server;
    read(*s, "server", "host", o.host);
    read(*s, "server", "port", o.port);
    read(*s, "server", "cors_allow", o.cors_allow);
    std::string dir;
    read(*s, "server", "static_dir", dir);
    o.static_dir = dir;
  }
  return cfg;
}

AppConfig AppConfig::from_file(const std::filesystem::path& path) {
  try {
    return from_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.line(), e.column());
  }
}

void AppConfig::apply_environment() {
  if (const char* v = std::getenv("FOCAL_PROVIDER_ENDPOINT"); v != nullptr && *v != '\0') provider.endpoint = v;
  if (const char* v = std::getenv("FOCAL_PROVIDER_MODEL"); v != nullptr && *v != '\0') provider.model = v;
  if (const char* v = std::getenv("FOCAL_PROVIDER_API_KEY"); v != nullptr) provider.api_key = v;
  if (const char* v = std::getenv("FOCAL_PORT"); v != nullptr && *v != '\0') {
    try {
      server.port = std::stoi(v);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("FOCAL_PORT='{}' is not a port number", v));
    }
  }
}

}  // namespace focal

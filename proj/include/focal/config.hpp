#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "focal/layout.hpp"
#include "focal/pipeline.hpp"
#include "focal/render.hpp"

namespace focal {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> cors_allow;  // exact origins, or "*"
  std::filesystem::path static_dir;     // optional web client assets
};

// Optional overrides read from a JSON file:
//   {"layout": {...LayoutConfig fields...},
//    "style": {"center_radius": .., "colors": {"pov": "#..", ...}},
//    "provider": {"endpoint", "model", "max_retries", "concurrency", "timeout_ms"},
//    "server": {"host", "port", "cors_allow", "static_dir"}}
// Unknown keys are errors. Credentials never come from this file.
struct AppConfig {
  LayoutConfig layout;
  GlyphStyle style;
  ProviderConfig provider;
  ServerOptions server;

  static AppConfig from_json(std::string_view bytes);
  static AppConfig from_file(const std::filesystem::path& path);

  // FOCAL_PROVIDER_ENDPOINT, FOCAL_PROVIDER_MODEL, FOCAL_PROVIDER_API_KEY,
  // FOCAL_PORT.
  void apply_environment();
};

}  // namespace focal

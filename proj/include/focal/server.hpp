#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "focal/config.hpp"
#include "focal/layout.hpp"
#include "focal/render.hpp"
#include "focal/store.hpp"

namespace httplib {
class Server;
}

namespace focal {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::string etag;  // quoted SHA-256 of the body; empty for errors
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Read-only request handling over an immutable catalog. Every response is a
// pure function of (path, query). Thread-safe.
class ApiService {
 public:
  ApiService(StoryCatalog catalog, LayoutConfig layout = {}, GlyphStyle style = {});

  // `path` is the decoded request path, e.g. /api/stories/s1/layout.
  ApiResponse get(std::string_view path, const QueryParams& query = {}) const;

  const StoryCatalog& catalog() const { return catalog_; }

 private:
  ApiResponse stories() const;
  ApiResponse story(const CatalogEntry& entry) const;
  ApiResponse layout(const CatalogEntry& entry, const QueryParams& query, bool svg) const;
  ApiResponse explanation(const CatalogEntry& entry, std::string_view event_id,
                          std::string_view character_id) const;

  StoryCatalog catalog_;
  LayoutConfig layout_;
  GlyphStyle style_;

  mutable std::shared_mutex cache_mu_;
  mutable std::map<std::string, ApiResponse, std::less<>> cache_;
};

// Error body shared by every endpoint: {"code", "message", "path"}.
ApiResponse error_response(int status, std::string_view message, std::string_view path);

// HTTP/1.1 front end for ApiService (cpp-httplib).
class HttpServer {
 public:
  HttpServer(std::shared_ptr<const ApiService> service, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds host:port (port 0 picks a free port) and returns the bound port.
  // Throws Error when binding fails.
  int bind();
  // Blocks until stop() is called.
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  std::shared_ptr<const ApiService> service_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  // Listening socket; httplib only closes it once listen() has run.
  std::atomic<int> socket_{-1};
  std::atomic<bool> listening_{false};
  std::atomic<bool> stopped_{false};
};

}  // namespace focal

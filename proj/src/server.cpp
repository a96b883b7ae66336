#include "focal/server.hpp"

#include <algorithm>
#include <charconv>
#include <unistd.h>
#include <vector>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "focal/errors.hpp"
#include "httplib.h"

namespace focal {

using nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

namespace {

std::string_view error_code(int status) {
  switch (status) {
    case 400: return "bad_request";
    case 404: return "not_found";
    case 405: return "method_not_allowed";
    case 422: return "unprocessable";
    default: return "internal";
  }
}

ApiResponse ok(std::string body, std::string content_type = "application/json") {
  ApiResponse r;
  r.content_type = std::move(content_type);
  r.etag = "\"" + sha256_hex(body) + "\"";
  r.body = std::move(body);
  return r;
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i <= path.size()) {
    const std::size_t j = std::min(path.find('/', i), path.size());
    if (j > i) parts.push_back(path.substr(i, j - i));
    i = j + 1;
  }
  return parts;
}

ordered_json span_json(const Span& s) { return ordered_json::array({s.start, s.end}); }

}  // namespace

ApiResponse error_response(int status, std::string_view message, std::string_view path) {
  ApiResponse r;
  r.status = status;
  r.body = json_io::dump(ordered_json{{"code", error_code(status)}, {"message", message}, {"path", path}});
  return r;
}

ApiService::ApiService(StoryCatalog catalog, LayoutConfig layout, GlyphStyle style)
    : catalog_(std::move(catalog)), layout_(layout), style_(std::move(style)) {
  layout_.check();
  style_.check();
}

ApiResponse ApiService::get(std::string_view path, const QueryParams& query) const {
  const auto parts = split_path(path);
  if (parts.size() == 2 && parts[0] == "api" && parts[1] == "legend.svg")
    return ok(render_legend_document(style_), "image/svg+xml");
  if (parts.size() < 2 || parts[0] != "api" || parts[1] != "stories")
    return error_response(404, "no such endpoint", path);
  if (parts.size() == 2) return stories();

  const CatalogEntry* entry = catalog_.find(parts[2]);
  if (entry == nullptr) return error_response(404, fmt::format("unknown story '{}'", parts[2]), path);
  if (parts.size() == 3) return story(*entry);

  ApiResponse r;
  if (parts.size() == 4 && parts[3] == "layout") {
    r = layout(*entry, query, false);
  } else if (parts.size() == 4 && parts[3] == "render.svg") {
    r = layout(*entry, query, true);
  } else if (parts.size() == 6 && parts[3] == "explanations") {
    r = explanation(*entry, parts[4], parts[5]);
  } else {
    return error_response(404, "no such endpoint", path);
  }
  if (r.status != 200) return error_response(r.status, r.body, path);
  return r;
}

ApiResponse ApiService::stories() const {
  ordered_json list = ordered_json::array();
  for (const CatalogEntry& e : catalog_.entries) list.push_back(ordered_json{{"id", e.id}, {"title", e.title}});
  return ok(json_io::dump(list));
}

ApiResponse ApiService::story(const CatalogEntry& entry) const {
  const std::string key = "doc\x1f" + entry.id;
  {
    std::shared_lock lock(cache_mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  ApiResponse r = ok(serialize_canonical(*entry.document));
  std::unique_lock lock(cache_mu_);
  return cache_.emplace(key, std::move(r)).first->second;
}

// Non-200 results carry the bare message in `body`; get() wraps it.
ApiResponse ApiService::layout(const CatalogEntry& entry, const QueryParams& query, bool svg) const {
  auto fail = [](int status, std::string message) {
    ApiResponse r;
    r.status = status;
    r.body = std::move(message);
    return r;
  };

  View view = View::overview();
  if (auto it = query.find("view"); it != query.end()) {
    try {
      view = View::parse(it->second);
    } catch (const std::invalid_argument& e) {
      return fail(400, e.what());
    }
  }
  LayoutConfig cfg = layout_;
  if (auto it = query.find("width"); it != query.end()) {
    const std::string& w = it->second;
    int width = 0;
    const auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), width);
    if (ec != std::errc() || end != w.data() + w.size() || width <= 0)
      return fail(400, fmt::format("width '{}' is not a positive integer", w));
    cfg.container_width = width;
  }

  const std::string key = fmt::format("{}\x1f{}\x1f{}\x1f{}", svg ? "svg" : "layout", entry.id, view.to_string(),
                                      cfg.container_width);
  {
    std::shared_lock lock(cache_mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }

  ApiResponse r;
  try {
    const TimelineLayout built = build_layout(*entry.document, view, cfg);
    r = svg ? ok(render_timeline(built, *entry.document, style_).content, "image/svg+xml")
            : ok(serialize_layout(built));
  } catch (const NotFoundError& e) {
    return fail(404, e.what());
  } catch (const LayoutError& e) {
    ApiResponse err = fail(422, e.what());
    return err;
  }
  std::unique_lock lock(cache_mu_);
  return cache_.emplace(key, std::move(r)).first->second;
}

ApiResponse ApiService::explanation(const CatalogEntry& entry, std::string_view event_id,
                                    std::string_view character_id) const {
  const NarrativeDocument& doc = *entry.document;
  for (const Scene& scene : doc.scenes) {
    const Event* event = scene.find_event(event_id);
    if (event == nullptr) continue;
    const Annotation* a = event->find_annotation(character_id);
    if (a == nullptr) {
      ApiResponse r;
      r.status = 404;
      r.body = fmt::format("event '{}' has no annotation for character '{}'", event_id, character_id);
      return r;
    }
    ordered_json o = ordered_json::object();
    o["story"] = doc.id;
    o["scene"] = scene.id;
    o["event"] = event->id;
    o["character"] = a->character;
    ordered_json bits = ordered_json::object();
    for (Label label : kAllLabels) bits[std::string(label_key(label))] = a->bit(label);
    o["labels"] = std::move(bits);
    o["has_explanation"] = a->explanation.has_value();
    o["rationale"] = a->explanation ? a->explanation->rationale : "";
    ordered_json cues = ordered_json::array();
    ordered_json unresolved = ordered_json::array();
    if (a->explanation) {
      for (const Span& c : a->explanation->cues) cues.push_back(span_json(c));
      for (const std::string& p : a->explanation->unresolved_cues) unresolved.push_back(p);
    }
    o["cues"] = std::move(cues);
    o["unresolved_cues"] = std::move(unresolved);
    o["event_span"] = span_json(event->span);
    o["scene_span"] = span_json(scene.span);
    return ok(json_io::dump(o));
  }
  ApiResponse r;
  r.status = 404;
  r.body = fmt::format("unknown event '{}'", event_id);
  return r;
}

HttpServer::HttpServer(std::shared_ptr<const ApiService> service, ServerOptions options)
    : service_(std::move(service)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (options_.port < 0 || options_.port > 65535) throw Error(fmt::format("port {} out of range", options_.port));
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
  server_->set_socket_options([this](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    socket_.store(sock);
  });

  auto cors = [this](const httplib::Request& req, httplib::Response& res) {
    const std::string origin = req.get_header_value("Origin");
    if (origin.empty()) return;
    const auto& allow = options_.cors_allow;
    if (std::find(allow.begin(), allow.end(), "*") != allow.end()) {
      res.set_header("Access-Control-Allow-Origin", "*");
    } else if (std::find(allow.begin(), allow.end(), origin) != allow.end()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
  };

  server_->Get(R"(/api/.*)", [this, cors](const httplib::Request& req, httplib::Response& res) {
    QueryParams query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);  // first value wins
    const ApiResponse r = service_->get(req.path, query);
    cors(req, res);
    if (!r.etag.empty()) {
      res.set_header("ETag", r.etag);
      res.set_header("Cache-Control", "no-cache");
      if (req.get_header_value("If-None-Match") == r.etag) {
        res.status = 304;
        return;
      }
    }
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  server_->Options(R"(/api/.*)", [cors](const httplib::Request& req, httplib::Response& res) {
    cors(req, res);
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "If-None-Match");
    res.status = 204;
  });
  if (!options_.static_dir.empty()) server_->set_mount_point("/", options_.static_dir.string());
}

HttpServer::~HttpServer() {
  if (!listening_.load() && socket_.load() >= 0) close(socket_.load());
}

int HttpServer::bind() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.host);
  } else if (!server_->bind_to_port(options_.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error(fmt::format("cannot bind {}:{}", options_.host, options_.port));
  return port;
}

void HttpServer::listen() {
  if (stopped_.load()) return;
  listening_.store(true);
  server_->listen_after_bind();
}

void HttpServer::stop() {
  stopped_.store(true);
  server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace focal

#include "focal/store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "focal/errors.hpp"
#include "focal/utf8.hpp"

namespace focal {

using nlohmann::ordered_json;

namespace json_io {

ordered_json parse_json(std::string_view bytes) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF")
    throw ParseError("byte order mark is not allowed", 1, 1);
  if (!utf8::is_valid(bytes)) throw ParseError("input is not valid UTF-8");
  try {
    return ordered_json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte counts characters consumed, 1-based.
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, bytes.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < upto; ++i) {
      if (bytes[i] == '\n') {
        ++line;
        column = 1;
      } else if ((static_cast<unsigned char>(bytes[i]) & 0xC0) != 0x80) {
        ++column;
      }
    }
    std::string what = e.what();
    // Keep only the reason; position is reported as line:column.
    if (auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ParseError(fmt::format("{}:{}: {}", line, column, what), line, column);
  }
}

std::string dump(const ordered_json& value) {
  return value.dump(2, ' ', false, nlohmann::json::error_handler_t::strict) + "\n";
}

}  // namespace json_io

namespace {

// Walks a JSON object tree, tracking a path for error messages.
class Reader {
 public:
  Reader(const ParseOptions& options, std::vector<std::string>* warnings)
      : options_(options), warnings_(warnings) {}

  const ordered_json& require(const ordered_json& obj, const std::string& path,
                              std::string_view key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, fmt::format("missing required key '{}'", key));
    return *it;
  }

  std::string string_at(const ordered_json& obj, const std::string& path, std::string_view key) const {
    const ordered_json& v = require(obj, path, key);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const ordered_json& obj, const std::string& path,
                                             std::string_view key) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(join(path, key), "expected a string");
    return it->get<std::string>();
  }

  int int_at(const ordered_json& obj, const std::string& path, std::string_view key) const {
    const ordered_json& v = require(obj, path, key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      fail(join(path, key), "integer out of range");
    return static_cast<int>(x);
  }

  Span span(const ordered_json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 2) fail(path, "expected a two-element array [start, end)");
    for (const auto& x : v) {
      if (!x.is_number_unsigned()) fail(path, "span bounds must be non-negative integers");
    }
    return Span{v[0].get<std::size_t>(), v[1].get<std::size_t>()};
  }

  const ordered_json& array_at(const ordered_json& obj, const std::string& path, std::string_view key) const {
    const ordered_json& v = require(obj, path, key);
    if (!v.is_array()) fail(join(path, key), "expected an array");
    return v;
  }

  void expect_object(const ordered_json& v, const std::string& path) const {
    if (!v.is_object()) fail(path, "expected an object");
  }

  // Reports keys outside `known` for a nested object.
  void check_keys(const ordered_json& obj, const std::string& path,
                  std::initializer_list<std::string_view> known) const {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(known.begin(), known.end(), key) != known.end()) continue;
      if (options_.strict) fail(join(path, key), "unknown key");
      warn(fmt::format("{}: unknown key ignored", join(path, key)));
    }
  }

  void warn(std::string message) const {
    if (warnings_ != nullptr) warnings_->push_back(std::move(message));
  }

  [[noreturn]] void fail(const std::string& path, std::string_view message) const {
    throw ParseError(fmt::format("{}: {}", path.empty() ? "<root>" : path, message), 0, 0, path);
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
  }

  const ParseOptions& options() const { return options_; }

 private:
  const ParseOptions& options_;
  std::vector<std::string>* warnings_;
};

constexpr std::array<std::string_view, 7> kTopLevelKeys = {
    "schema_version", "id", "title", "author", "text", "characters", "scenes"};

Explanation read_explanation(const Reader& r, const ordered_json& v, const std::string& path) {
  r.expect_object(v, path);
  r.check_keys(v, path, {"rationale", "cues", "unresolved_cues"});
  Explanation ex;
  ex.rationale = r.optional_string(v, path, "rationale").value_or("");
  if (v.contains("cues")) {
    const auto& cues = r.array_at(v, path, "cues");
    for (std::size_t i = 0; i < cues.size(); ++i)
      ex.cues.push_back(r.span(cues[i], fmt::format("{}.cues[{}]", path, i)));
  }
  if (v.contains("unresolved_cues")) {
    const auto& phrases = r.array_at(v, path, "unresolved_cues");
    for (std::size_t i = 0; i < phrases.size(); ++i) {
      if (!phrases[i].is_string()) r.fail(fmt::format("{}.unresolved_cues[{}]", path, i), "expected a string");
      ex.unresolved_cues.push_back(phrases[i].get<std::string>());
    }
  }
  return ex;
}

Annotation read_annotation(const Reader& r, const ordered_json& v, const std::string& path) {
  r.expect_object(v, path);
  r.check_keys(v, path, {"character", "pov", "internal", "external", "perceptual", "ideological",
                         "psychological", "explanation"});
  Annotation a;
  a.character = r.string_at(v, path, "character");
  for (Label label : kAllLabels) a.bit(label) = r.int_at(v, path, label_key(label));
  if (auto it = v.find("explanation"); it != v.end() && !it->is_null())
    a.explanation = read_explanation(r, *it, path + ".explanation");
  return a;
}

Event read_event(const Reader& r, const ordered_json& v, const std::string& path) {
  r.expect_object(v, path);
  r.check_keys(v, path, {"id", "span", "location", "annotations"});
  Event e;
  e.id = r.string_at(v, path, "id");
  e.span = r.span(r.require(v, path, "span"), path + ".span");
  e.location = r.optional_string(v, path, "location");
  if (v.contains("annotations")) {
    const auto& list = r.array_at(v, path, "annotations");
    for (std::size_t i = 0; i < list.size(); ++i)
      e.annotations.push_back(read_annotation(r, list[i], fmt::format("{}.annotations[{}]", path, i)));
  }
  return e;
}

Scene read_scene(const Reader& r, const ordered_json& v, const std::string& path) {
  r.expect_object(v, path);
  r.check_keys(v, path, {"id", "title", "span", "events"});
  Scene s;
  s.id = r.string_at(v, path, "id");
  s.title = r.string_at(v, path, "title");
  s.span = r.span(r.require(v, path, "span"), path + ".span");
  const auto& events = r.array_at(v, path, "events");
  for (std::size_t i = 0; i < events.size(); ++i)
    s.events.push_back(read_event(r, events[i], fmt::format("{}.events[{}]", path, i)));
  return s;
}

ordered_json span_json(const Span& s) { return ordered_json::array({s.start, s.end}); }

}  // namespace

NarrativeDocument parse(std::string_view bytes, const ParseOptions& options,
                        std::vector<std::string>* warnings) {
  const ordered_json root = json_io::parse_json(bytes);
  Reader r(options, warnings);
  r.expect_object(root, "");

  const std::string version = r.string_at(root, "", "schema_version");
  if (version != kSchemaVersion)
    throw VersionError(fmt::format("unsupported schema_version '{}' (expected '{}')", version, kSchemaVersion));

  NarrativeDocument doc;
  doc.id = r.string_at(root, "", "id");
  doc.title = r.string_at(root, "", "title");
  doc.author = r.optional_string(root, "", "author");
  doc.text = r.string_at(root, "", "text");

  const auto& characters = r.array_at(root, "", "characters");
  for (std::size_t i = 0; i < characters.size(); ++i) {
    const std::string path = fmt::format("characters[{}]", i);
    r.expect_object(characters[i], path);
    r.check_keys(characters[i], path, {"id", "name"});
    doc.characters.push_back({r.string_at(characters[i], path, "id"), r.string_at(characters[i], path, "name")});
  }
  const auto& scenes = r.array_at(root, "", "scenes");
  for (std::size_t i = 0; i < scenes.size(); ++i)
    doc.scenes.push_back(read_scene(r, scenes[i], fmt::format("scenes[{}]", i)));

  std::map<std::string, ordered_json> extra;
  for (const auto& [key, value] : root.items()) {
    if (std::find(kTopLevelKeys.begin(), kTopLevelKeys.end(), key) != kTopLevelKeys.end()) continue;
    if (options.strict) r.fail(key, "unknown top-level key");
    r.warn(fmt::format("{}: unknown top-level key preserved", key));
    extra.emplace(key, value);
  }
  for (auto& [key, value] : extra) doc.extra[key] = std::move(value);
  return doc;
}

std::string serialize_canonical(const NarrativeDocument& doc) {
  ordered_json root = ordered_json::object();
  root["schema_version"] = kSchemaVersion;
  root["id"] = doc.id;
  root["title"] = doc.title;
  if (doc.author) root["author"] = *doc.author;
  root["text"] = doc.text;

  ordered_json characters = ordered_json::array();
  for (const Character& c : doc.characters) {
    ordered_json o = ordered_json::object();
    o["id"] = c.id;
    o["name"] = c.name;
    characters.push_back(std::move(o));
  }
  root["characters"] = std::move(characters);

  ordered_json scenes = ordered_json::array();
  for (const Scene& s : doc.scenes) {
    ordered_json so = ordered_json::object();
    so["id"] = s.id;
    so["title"] = s.title;
    so["span"] = span_json(s.span);
    ordered_json events = ordered_json::array();
    for (const Event& e : s.events) {
      ordered_json eo = ordered_json::object();
      eo["id"] = e.id;
      eo["span"] = span_json(e.span);
      if (e.location) eo["location"] = *e.location;
      ordered_json annotations = ordered_json::array();
      for (const Annotation& a : e.annotations) {
        ordered_json ao = ordered_json::object();
        ao["character"] = a.character;
        for (Label label : kAllLabels) ao[std::string(label_key(label))] = a.bit(label);
        if (a.explanation) {
          ordered_json xo = ordered_json::object();
          xo["rationale"] = a.explanation->rationale;
          ordered_json cues = ordered_json::array();
          for (const Span& c : a.explanation->cues) cues.push_back(span_json(c));
          xo["cues"] = std::move(cues);
          if (!a.explanation->unresolved_cues.empty()) xo["unresolved_cues"] = a.explanation->unresolved_cues;
          ao["explanation"] = std::move(xo);
        }
        annotations.push_back(std::move(ao));
      }
      eo["annotations"] = std::move(annotations);
      events.push_back(std::move(eo));
    }
    so["events"] = std::move(events);
    scenes.push_back(std::move(so));
  }
  root["scenes"] = std::move(scenes);

  std::map<std::string, ordered_json> extra;
  for (const auto& [key, value] : doc.extra.items()) extra.emplace(key, value);
  for (auto& [key, value] : extra) root[key] = std::move(value);
  return json_io::dump(root);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

NarrativeDocument load_document(const std::filesystem::path& path, const ParseOptions& options,
                                std::vector<std::string>* warnings) {
  const std::string bytes = read_file(path);
  try {
    return parse(bytes, options, warnings);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.line(), e.column(), e.path());
  } catch (const VersionError& e) {
    throw VersionError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

const CatalogEntry* StoryCatalog::find(std::string_view id) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), id,
                             [](const CatalogEntry& e, std::string_view v) { return e.id < v; });
  return it != entries.end() && it->id == id ? &*it : nullptr;
}

StoryCatalog scan_catalog(const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) throw CatalogError(fmt::format("'{}' is not a readable directory", directory.string()));

  std::vector<fs::path> files;
  fs::directory_iterator it(directory, ec);
  if (ec) throw CatalogError(fmt::format("cannot read '{}': {}", directory.string(), ec.message()));
  for (const auto& entry : it) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file(ec)) continue;
    if (name.size() > kNarrativeExtension.size() && name.ends_with(kNarrativeExtension)) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  StoryCatalog catalog;
  catalog.directory = directory;
  for (const fs::path& file : files) {
    try {
      auto doc = std::make_shared<NarrativeDocument>(load_document(file));
      const ValidationReport report = validate(*doc);
      if (!report.ok()) {
        const Violation& v = report.violations.front();
        catalog.skipped.push_back({file, fmt::format("{} violation(s); first: {}: {}", report.violations.size(), v.path, v.message)});
        continue;
      }
      catalog.entries.push_back({doc->id, doc->title, file, std::move(doc)});
    } catch (const Error& e) {
      // load_document already prefixes the path.
      std::string reason = e.what();
      const std::string prefix = file.string() + ": ";
      if (reason.starts_with(prefix)) reason.erase(0, prefix.size());
      catalog.skipped.push_back({file, std::move(reason)});
    }
  }

  std::stable_sort(catalog.entries.begin(), catalog.entries.end(),
                   [](const CatalogEntry& a, const CatalogEntry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < catalog.entries.size(); ++i) {
    if (catalog.entries[i].id == catalog.entries[i - 1].id) {
      throw CatalogError(fmt::format("duplicate story id '{}' in '{}' and '{}'", catalog.entries[i].id,
                                     catalog.entries[i - 1].path.string(), catalog.entries[i].path.string()));
    }
  }
  return catalog;
}

}  // namespace focal

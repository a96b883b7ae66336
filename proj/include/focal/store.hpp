#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "focal/model.hpp"

namespace focal {

inline constexpr std::string_view kSchemaVersion = "1.0";
inline constexpr std::string_view kNarrativeExtension = ".focal.json";

struct ParseOptions {
  // Reject unknown keys instead of keeping (top level) or dropping (nested)
  // them with a warning.
  bool strict = false;
};

// Parses a narrative file. Semantic checks are left to validate().
// Throws ParseError (syntax, structure, non-UTF-8, BOM) or VersionError.
NarrativeDocument parse(std::string_view bytes, const ParseOptions& options = {},
                        std::vector<std::string>* warnings = nullptr);

// Deterministic pretty-printed JSON, newline-terminated.
std::string serialize_canonical(const NarrativeDocument& doc);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// read_file + parse; error messages are prefixed with the path.
NarrativeDocument load_document(const std::filesystem::path& path,
                                const ParseOptions& options = {},
                                std::vector<std::string>* warnings = nullptr);

struct CatalogEntry {
  std::string id;
  std::string title;
  std::filesystem::path path;
  std::shared_ptr<const NarrativeDocument> document;
};

struct SkippedFile {
  std::filesystem::path path;
  std::string reason;
};

struct StoryCatalog {
  std::filesystem::path directory;
  std::vector<CatalogEntry> entries;  // sorted by id
  std::vector<SkippedFile> skipped;   // sorted by path

  const CatalogEntry* find(std::string_view id) const;
};

// Loads every `*.focal.json` file directly inside `directory`. Files that fail
// to parse or validate (non-strict) are listed in `skipped`.
// Throws CatalogError if the directory is unreadable or two files share an id.
StoryCatalog scan_catalog(const std::filesystem::path& directory);

// Helpers shared with other file formats.
namespace json_io {

// Parses UTF-8 JSON text, mapping syntax errors to ParseError with line/column.
nlohmann::ordered_json parse_json(std::string_view bytes);

// Two-space indented, UTF-8, newline-terminated.
std::string dump(const nlohmann::ordered_json& value);

}  // namespace json_io

}  // namespace focal

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "focal/metrics.hpp"
#include "focal/model.hpp"

namespace focal::test {

std::filesystem::path tests_dir();
std::filesystem::path fixture(std::string_view name);
std::filesystem::path golden(std::string_view name);
std::string slurp(const std::filesystem::path& path);

// Compares `actual` with a golden file; FOCAL_UPDATE_GOLDEN=1 rewrites it.
// Returns an empty string on match, else a short description of the mismatch.
std::string check_golden(std::string_view name, std::string_view actual);

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct RandomDocOptions {
  int max_scenes = 6;
  int max_events = 8;
  int max_characters = 5;
  double annotate_probability = 0.5;
  bool with_explanations = true;
};

// Valid (non-strict) document with multi-byte text, contiguous spans and
// random annotations. Every scene has at least one event and at least one
// annotated character.
NarrativeDocument random_document(std::mt19937_64& rng, const RandomDocOptions& options = {});

// Brute-force evaluation over string keys, one cell at a time.
struct OracleLabel {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
};
struct OracleReport {
  std::array<OracleLabel, kLabelCount> labels{};
  double micro_f1 = 0;
  double macro_f1 = 0;
  double exact_row_match = 0;
};
using KeyedBits = std::map<std::string, std::array<int, kLabelCount>>;
OracleReport oracle_evaluate(const KeyedBits& gold, const KeyedBits& pred);
KeyedBits keyed(const LabelTable& table);

// Random table of `rows` distinct keys with uniform bits.
LabelTable random_table(std::mt19937_64& rng, std::size_t rows);
// Same keys as `base`, each bit flipped with probability `flip`.
LabelTable perturb(std::mt19937_64& rng, const LabelTable& base, double flip);

// SVG inspection.
using Tree = boost::property_tree::ptree;
Tree parse_xml(const std::string& xml);
// Depth-first search for the element whose id attribute equals `id`.
const Tree* find_id(const Tree& root, std::string_view id);
std::string attr(const Tree& element, std::string_view name);
// Element name of a node found by find_id, e.g. "circle".
std::string tag_of(const Tree& root, std::string_view id);
// Counts elements with the given tag anywhere in the tree.
std::size_t count_tag(const Tree& root, std::string_view tag);

}  // namespace focal::test

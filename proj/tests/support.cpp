#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>

#include "focal/utf8.hpp"

namespace focal::test {

std::filesystem::path tests_dir() { return FOCAL_TESTS_DIR; }
std::filesystem::path fixture(std::string_view name) { return tests_dir() / "fixtures" / name; }
std::filesystem::path golden(std::string_view name) { return tests_dir() / "golden" / name; }

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string check_golden(std::string_view name, std::string_view actual) {
  const auto path = golden(name);
  const char* update = std::getenv("FOCAL_UPDATE_GOLDEN");
  if (update != nullptr && std::string_view(update) == "1") {
    std::ofstream(path, std::ios::binary) << actual;
    return {};
  }
  if (!std::filesystem::exists(path)) return fmt::format("golden file {} is missing", path.string());
  const std::string expected = slurp(path);
  if (expected == actual) return {};
  std::size_t i = 0;
  while (i < expected.size() && i < actual.size() && expected[i] == actual[i]) ++i;
  return fmt::format("{} differs at byte {} (expected {} bytes, got {})", name, i, expected.size(), actual.size());
}

TempDir::TempDir() {
  static std::mt19937_64 rng{std::random_device{}()};
  path_ = std::filesystem::temp_directory_path() / fmt::format("focal-test-{:016x}", rng());
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

namespace {

constexpr std::array<std::string_view, 14> kWords = {
    "sky", "wave", "oar", "boat", "été", "naïve", "日本", "—", "cold", "light", "said", "she", "he", "Ω"};

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

NarrativeDocument random_document(std::mt19937_64& rng, const RandomDocOptions& options) {
  NarrativeDocument doc;
  doc.id = fmt::format("doc-{}", uniform(rng, 0, 1 << 20));
  doc.title = "Random story";

  const int n_chars = uniform(rng, 1, options.max_characters);
  for (int c = 0; c < n_chars; ++c) doc.characters.push_back({fmt::format("c{}", c), fmt::format("Character {}", c)});

  std::size_t cp = 0;
  auto append = [&](std::string_view s) {
    doc.text += s;
    cp += utf8::length(s);
  };

  const int n_scenes = uniform(rng, 1, options.max_scenes);
  for (int s = 0; s < n_scenes; ++s) {
    Scene scene;
    scene.id = fmt::format("s{}", s);
    scene.title = fmt::format("Scene {}", s);
    if (s > 0) append("\n\n");
    scene.span.start = cp;
    const int n_events = uniform(rng, 1, options.max_events);
    for (int e = 0; e < n_events; ++e) {
      if (e > 0) append(" ");
      Event event;
      event.id = fmt::format("s{}e{}", s, e);
      event.span.start = cp;
      const int n_words = uniform(rng, 2, 9);
      for (int w = 0; w < n_words; ++w) {
        if (w > 0) append(" ");
        append(kWords[uniform(rng, 0, kWords.size() - 1)]);
      }
      append(".");
      event.span.end = cp;

      for (const Character& ch : doc.characters) {
        const bool forced = e == 0 && &ch == &doc.characters.front();
        if (!forced && !coin(rng, options.annotate_probability)) continue;
        Annotation a;
        a.character = ch.id;
        for (int& b : a.bits) b = uniform(rng, 0, 1);
        if (options.with_explanations && coin(rng, 0.5)) {
          Explanation x;
          x.rationale = "because";
          const auto lo = uniform(rng, event.span.start, event.span.end - 1);
          const auto hi = uniform(rng, lo + 1, event.span.end);
          x.cues.push_back({static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)});
          a.explanation = std::move(x);
        }
        event.annotations.push_back(std::move(a));
      }
      scene.events.push_back(std::move(event));
    }
    scene.span.end = cp;
    doc.scenes.push_back(std::move(scene));
  }
  return doc;
}

namespace {

double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

}  // namespace

OracleReport oracle_evaluate(const KeyedBits& gold, const KeyedBits& pred) {
  OracleReport r;
  long exact = 0;
  for (const auto& [key, g] : gold) {
    const auto& p = pred.at(key);
    bool all = true;
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      OracleLabel& l = r.labels[j];
      if (g[j] == 1 && p[j] == 1) ++l.tp;
      if (g[j] == 0 && p[j] == 1) ++l.fp;
      if (g[j] == 1 && p[j] == 0) ++l.fn;
      if (g[j] == 0 && p[j] == 0) ++l.tn;
      all = all && g[j] == p[j];
    }
    exact += all ? 1 : 0;
  }
  long tp = 0, fp = 0, fn = 0;
  double f1_sum = 0;
  for (OracleLabel& l : r.labels) {
    l.accuracy = ratio(l.tp + l.tn, l.tp + l.fp + l.fn + l.tn);
    l.precision = ratio(l.tp, l.tp + l.fp);
    l.recall = ratio(l.tp, l.tp + l.fn);
    l.f1 = ratio(2.0 * l.tp, 2.0 * l.tp + l.fp + l.fn);
    f1_sum += l.f1;
    tp += l.tp;
    fp += l.fp;
    fn += l.fn;
  }
  r.micro_f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  r.macro_f1 = f1_sum / kLabelCount;
  r.exact_row_match = ratio(exact, gold.size());
  return r;
}

KeyedBits keyed(const LabelTable& table) {
  KeyedBits out;
  for (const LabelRow& row : table.rows()) out.emplace(row.key.to_string(), row.bits);
  return out;
}

LabelTable random_table(std::mt19937_64& rng, std::size_t rows) {
  std::vector<LabelRow> out;
  std::set<std::string> seen;
  while (out.size() < rows) {
    RowKey key = row_key(fmt::format("s{}", uniform(rng, 0, 9)), fmt::format("e{}", uniform(rng, 0, 9)),
                         fmt::format("c{}", uniform(rng, 0, 9)));
    if (!seen.insert(key.to_string()).second) continue;
    LabelRow row{std::move(key), {}};
    for (int& b : row.bits) b = uniform(rng, 0, 1);
    out.push_back(std::move(row));
  }
  return LabelTable(std::move(out));
}

LabelTable perturb(std::mt19937_64& rng, const LabelTable& base, double flip) {
  std::vector<LabelRow> out = base.rows();
  for (LabelRow& row : out)
    for (int& b : row.bits)
      if (coin(rng, flip)) b = 1 - b;
  return LabelTable(std::move(out));
}

Tree parse_xml(const std::string& xml) {
  std::istringstream in(xml);
  Tree tree;
  boost::property_tree::read_xml(in, tree);
  return tree;
}

namespace {

const Tree* find_id_impl(const Tree& node, std::string_view id, std::string* tag) {
  for (const auto& [name, child] : node) {
    if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
    if (auto a = child.get_child_optional("<xmlattr>.id"); a && a->data() == id) {
      if (tag != nullptr) *tag = name;
      return &child;
    }
    if (const Tree* hit = find_id_impl(child, id, tag)) return hit;
  }
  return nullptr;
}

}  // namespace

const Tree* find_id(const Tree& root, std::string_view id) { return find_id_impl(root, id, nullptr); }

std::string tag_of(const Tree& root, std::string_view id) {
  std::string tag;
  find_id_impl(root, id, &tag);
  return tag;
}

std::string attr(const Tree& element, std::string_view name) {
  return element.get<std::string>("<xmlattr>." + std::string(name), "");
}

std::size_t count_tag(const Tree& root, std::string_view tag) {
  std::size_t n = 0;
  for (const auto& [name, child] : root) {
    if (name == tag) ++n;
    if (name != "<xmlattr>") n += count_tag(child, tag);
  }
  return n;
}

}  // namespace focal::test

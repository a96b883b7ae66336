#include "focal/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "focal/errors.hpp"
#include "focal/store.hpp"

namespace focal {

using nlohmann::ordered_json;

LabelTable::LabelTable(std::vector<LabelRow> rows) : rows_(std::move(rows)) {
  std::set<RowKey> seen;
  for (const LabelRow& row : rows_) {
    if (!seen.insert(row.key).second)
      throw std::invalid_argument(fmt::format("duplicate row key {}", row.key.to_string()));
    for (int b : row.bits) {
      if (b != 0 && b != 1)
        throw std::invalid_argument(fmt::format("row {} has a flag outside {{0, 1}}", row.key.to_string()));
    }
  }
}

LabelTable extract_labels(const NarrativeDocument& doc) {
  std::vector<LabelRow> rows;
  for (const Scene& s : doc.scenes) {
    for (const Event& e : s.events) {
      for (const Annotation& a : e.annotations) rows.push_back({row_key(s.id, e.id, a.character), a.bits});
    }
  }
  return LabelTable(std::move(rows));
}

LabelTable parse_label_table(std::string_view bytes) {
  const ordered_json root = json_io::parse_json(bytes);
  if (!root.is_object()) throw ParseError("<root>: expected an object");
  if (root.contains("scenes")) {
    const NarrativeDocument doc = parse(bytes);
    try {
      return extract_labels(doc);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }
  const auto version = root.find("schema_version");
  if (version == root.end() || !version->is_string()) throw ParseError("<root>: missing schema_version");
  if (*version != kSchemaVersion)
    throw VersionError(fmt::format("unsupported schema_version '{}'", version->get<std::string>()));
  const auto rows_it = root.find("rows");
  if (rows_it == root.end() || !rows_it->is_array()) throw ParseError("<root>: expected a 'rows' array");

  std::vector<LabelRow> rows;
  for (std::size_t i = 0; i < rows_it->size(); ++i) {
    const auto& r = (*rows_it)[i];
    const std::string path = fmt::format("rows[{}]", i);
    if (!r.is_object()) throw ParseError(path + ": expected an object");
    auto str = [&](std::string_view key) {
      auto it = r.find(key);
      if (it == r.end() || !it->is_string() || it->get<std::string>().empty())
        throw ParseError(fmt::format("{}.{}: expected a non-empty string", path, key));
      return it->get<std::string>();
    };
    LabelRow row;
    row.key = row_key(str("scene"), str("event"), str("character"));
    for (Label label : kAllLabels) {
      auto it = r.find(label_key(label));
      if (it == r.end() || !it->is_number_integer())
        throw ParseError(fmt::format("{}.{}: expected an integer", path, label_key(label)));
      row.bits[static_cast<std::size_t>(label)] = it->get<int>();
    }
    rows.push_back(std::move(row));
  }
  try {
    return LabelTable(std::move(rows));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

LabelTable load_label_table(const std::filesystem::path& path) {
  try {
    return parse_label_table(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.line(), e.column(), e.path());
  }
}

std::string serialize_label_table(const LabelTable& table) {
  ordered_json root = ordered_json::object();
  root["schema_version"] = kSchemaVersion;
  ordered_json rows = ordered_json::array();
  for (const LabelRow& row : table.rows()) {
    ordered_json o = ordered_json::object();
    o["scene"] = row.key.scene;
    o["event"] = row.key.event;
    o["character"] = row.key.character;
    for (Label label : kAllLabels) o[std::string(label_key(label))] = row.bits[static_cast<std::size_t>(label)];
    rows.push_back(std::move(o));
  }
  root["rows"] = std::move(rows);
  return json_io::dump(root);
}

AlignedTables align(const LabelTable& gold, const LabelTable& pred, AlignPolicy policy) {
  std::map<RowKey, const LabelBits*> g;
  std::map<RowKey, const LabelBits*> p;
  for (const LabelRow& r : gold.rows()) g.emplace(r.key, &r.bits);
  for (const LabelRow& r : pred.rows()) p.emplace(r.key, &r.bits);

  std::vector<std::string> missing_in_pred;
  std::vector<std::string> missing_in_gold;
  for (const auto& [key, bits] : g) {
    if (!p.contains(key)) missing_in_pred.push_back(key.to_string());
  }
  for (const auto& [key, bits] : p) {
    if (!g.contains(key)) missing_in_gold.push_back(key.to_string());
  }

  if (policy == AlignPolicy::kStrict && (!missing_in_pred.empty() || !missing_in_gold.empty())) {
    std::string msg = "row keys differ between gold and prediction";
    if (!missing_in_pred.empty()) msg += fmt::format("; missing in prediction: {}", fmt::join(missing_in_pred, ", "));
    if (!missing_in_gold.empty()) msg += fmt::format("; missing in gold: {}", fmt::join(missing_in_gold, ", "));
    throw AlignmentError(msg, std::move(missing_in_pred), std::move(missing_in_gold));
  }

  AlignedTables out;
  out.dropped_gold = missing_in_pred.size();
  out.dropped_pred = missing_in_gold.size();
  for (const auto& [key, bits] : g) {
    auto it = p.find(key);
    if (it == p.end()) continue;
    out.keys.push_back(key);
    out.gold.push_back(*bits);
    out.pred.push_back(*it->second);
  }
  return out;
}

namespace {

// 0/0 is defined as 0; the flag records that it happened.
double ratio(std::size_t num, std::size_t den, bool& zero_division) {
  if (den == 0) {
    zero_division = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r, bool& zero_division) {
  if (p + r == 0.0) {
    zero_division = true;
    return 0.0;
  }
  return 2.0 * p * r / (p + r);
}

}  // namespace

EvalReport evaluate(const AlignedTables& aligned) {
  const std::size_t n = aligned.keys.size();
  if (n == 0) throw EmptyEvaluation("no rows to evaluate after alignment");

  EvalReport report;
  report.rows = n;
  report.dropped_gold = aligned.dropped_gold;
  report.dropped_pred = aligned.dropped_pred;

  std::size_t exact = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool match = true;
    for (std::size_t l = 0; l < kLabelCount; ++l) {
      const int g = aligned.gold[i][l];
      const int p = aligned.pred[i][l];
      ConfusionCounts& c = report.labels[l].counts;
      if (g == 1 && p == 1) ++c.tp;
      else if (g == 0 && p == 1) ++c.fp;
      else if (g == 1 && p == 0) ++c.fn;
      else ++c.tn;
      match = match && g == p;
    }
    if (match) ++exact;
  }

  ConfusionCounts sum;
  double f1_sum = 0;
  for (LabelMetrics& m : report.labels) {
    const ConfusionCounts& c = m.counts;
    m.accuracy = ratio(c.tp + c.tn, n, m.zero_division);
    m.precision = ratio(c.tp, c.tp + c.fp, m.zero_division);
    m.recall = ratio(c.tp, c.tp + c.fn, m.zero_division);
    m.f1 = harmonic(m.precision, m.recall, m.zero_division);
    f1_sum += m.f1;
    sum.tp += c.tp;
    sum.fp += c.fp;
    sum.fn += c.fn;
  }
  bool unused = false;
  const double micro_p = ratio(sum.tp, sum.tp + sum.fp, unused);
  const double micro_r = ratio(sum.tp, sum.tp + sum.fn, unused);
  report.micro_f1 = harmonic(micro_p, micro_r, unused);
  report.macro_f1 = f1_sum / static_cast<double>(kLabelCount);
  report.exact_row_match = static_cast<double>(exact) / static_cast<double>(n);
  return report;
}

EvalReport evaluate(const LabelTable& gold, const LabelTable& pred, AlignPolicy policy) {
  return evaluate(align(gold, pred, policy));
}

std::string render_report(const EvalReport& report, ReportFormat format, std::span<const Label> labels) {
  if (labels.empty()) throw std::invalid_argument("a report needs at least one label");

  if (format == ReportFormat::kJson) {
    ordered_json root = ordered_json::object();
    ordered_json per_label = ordered_json::object();
    for (Label label : labels) {
      const LabelMetrics& m = report.at(label);
      ordered_json o = ordered_json::object();
      o["accuracy"] = m.accuracy;
      o["precision"] = m.precision;
      o["recall"] = m.recall;
      o["f1"] = m.f1;
      o["tp"] = m.counts.tp;
      o["fp"] = m.counts.fp;
      o["fn"] = m.counts.fn;
      o["tn"] = m.counts.tn;
      o["zero_division"] = m.zero_division;
      per_label[std::string(label_name(label))] = std::move(o);
    }
    root["labels"] = std::move(per_label);
    ordered_json overall = ordered_json::object();
    overall["micro_f1"] = report.micro_f1;
    overall["macro_f1"] = report.macro_f1;
    overall["exact_row_match"] = report.exact_row_match;
    root["overall"] = std::move(overall);
    root["rows"] = report.rows;
    root["dropped_gold"] = report.dropped_gold;
    root["dropped_pred"] = report.dropped_pred;
    return json_io::dump(root);
  }

  std::string out;
  out += fmt::format("{:<26}{:>10}{:>10}{:>10}{:>10}\n", "Label", "Accuracy", "Precision", "Recall", "F1");
  for (Label label : labels) {
    const LabelMetrics& m = report.at(label);
    out += fmt::format("{:<26}{:>10.2f}{:>10.2f}{:>10.2f}{:>10.2f}{}\n", label_name(label), m.accuracy,
                       m.precision, m.recall, m.f1, m.zero_division ? "  *" : "");
  }
  out += "\n";
  out += fmt::format("{:<26}{:>10}\n", "Metric", "Value");
  out += fmt::format("{:<26}{:>10.2f}\n", "Micro F1", report.micro_f1);
  out += fmt::format("{:<26}{:>10.2f}\n", "Macro F1", report.macro_f1);
  out += fmt::format("{:<26}{:>10.2f}\n", "Exact Row Match Accuracy", report.exact_row_match);
  out += fmt::format("{:<26}{:>10}\n", "Rows", report.rows);
  if (report.dropped_gold > 0 || report.dropped_pred > 0)
    out += fmt::format("{:<26}{:>10}\n", "Dropped (gold, pred)", fmt::format("({}, {})", report.dropped_gold, report.dropped_pred));
  if (std::any_of(labels.begin(), labels.end(), [&](Label l) { return report.at(l).zero_division; }))
    out += "* a 0/0 ratio was reported as 0\n";
  return out;
}

}  // namespace focal

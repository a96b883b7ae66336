#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "focal/model.hpp"

namespace focal {

using LabelBits = std::array<int, kLabelCount>;

struct LabelRow {
  RowKey key;
  LabelBits bits{};
};

// Gold or predicted labels, one row per (scene, event, character).
class LabelTable {
 public:
  LabelTable() = default;
  // Throws std::invalid_argument on duplicate keys or bits outside {0, 1}.
  explicit LabelTable(std::vector<LabelRow> rows);

  const std::vector<LabelRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

 private:
  std::vector<LabelRow> rows_;
};

// Every annotation in document order.
LabelTable extract_labels(const NarrativeDocument& doc);

// Reads either a narrative file (annotations extracted) or a bare label-table
// file: {"schema_version": "1.0", "rows": [{"scene", "event", "character",
// "pov", ...}]}.
LabelTable load_label_table(const std::filesystem::path& path);
LabelTable parse_label_table(std::string_view bytes);
std::string serialize_label_table(const LabelTable& table);

enum class AlignPolicy { kStrict, kIntersect };

struct AlignedTables {
  std::vector<RowKey> keys;  // sorted
  std::vector<LabelBits> gold;
  std::vector<LabelBits> pred;
  std::size_t dropped_gold = 0;  // gold rows without a prediction (intersect)
  std::size_t dropped_pred = 0;  // predictions without a gold row (intersect)
};

// Throws AlignmentError under kStrict when the key sets differ.
AlignedTables align(const LabelTable& gold, const LabelTable& pred,
                    AlignPolicy policy = AlignPolicy::kStrict);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct LabelMetrics {
  ConfusionCounts counts;
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  // Set when any ratio above was 0/0 and therefore defined as 0.
  bool zero_division = false;
};

struct EvalReport {
  std::array<LabelMetrics, kLabelCount> labels{};
  double micro_f1 = 0;
  double macro_f1 = 0;
  double exact_row_match = 0;
  std::size_t rows = 0;
  std::size_t dropped_gold = 0;
  std::size_t dropped_pred = 0;

  const LabelMetrics& at(Label label) const { return labels[static_cast<std::size_t>(label)]; }
};

// Throws EmptyEvaluation when no rows remain after alignment.
EvalReport evaluate(const AlignedTables& aligned);
EvalReport evaluate(const LabelTable& gold, const LabelTable& pred,
                    AlignPolicy policy = AlignPolicy::kStrict);

enum class ReportFormat { kTable, kJson };

// Throws std::invalid_argument if `labels` is empty.
std::string render_report(const EvalReport& report, ReportFormat format,
                          std::span<const Label> labels = kAllLabels);

}  // namespace focal

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "focal/errors.hpp"
#include "focal/metrics.hpp"
#include "focal/store.hpp"
#include "support.hpp"

using namespace focal;

namespace {

LabelTable table(std::initializer_list<std::pair<const char*, LabelBits>> rows) {
  std::vector<LabelRow> out;
  for (const auto& [event, bits] : rows) out.push_back({row_key("s1", event, "c1"), bits});
  return LabelTable(std::move(out));
}

LabelTable pinned_gold() { return table({{"e1", {1, 1, 0, 1, 0, 1}}, {"e2", {0, 0, 1, 0, 1, 0}}}); }
LabelTable pinned_pred() { return table({{"e1", {1, 0, 0, 1, 0, 1}}, {"e2", {0, 0, 1, 1, 1, 0}}}); }

// Hand-tallied from the twelve cells of the two-row fixture.
constexpr double kPinnedMicro = 5.0 / 6.0;
constexpr double kPinnedMacro = (1 + 0 + 1 + 2.0 / 3.0 + 1 + 1) / 6.0;

void expect_matches_oracle(const EvalReport& r, const test::OracleReport& o) {
  for (std::size_t j = 0; j < kLabelCount; ++j) {
    const LabelMetrics& m = r.labels[j];
    EXPECT_EQ(static_cast<long>(m.counts.tp), o.labels[j].tp);
    EXPECT_EQ(static_cast<long>(m.counts.fp), o.labels[j].fp);
    EXPECT_EQ(static_cast<long>(m.counts.fn), o.labels[j].fn);
    EXPECT_EQ(static_cast<long>(m.counts.tn), o.labels[j].tn);
    EXPECT_NEAR(m.accuracy, o.labels[j].accuracy, 1e-9);
    EXPECT_NEAR(m.precision, o.labels[j].precision, 1e-9);
    EXPECT_NEAR(m.recall, o.labels[j].recall, 1e-9);
    EXPECT_NEAR(m.f1, o.labels[j].f1, 1e-9);
  }
  EXPECT_NEAR(r.micro_f1, o.micro_f1, 1e-9);
  EXPECT_NEAR(r.macro_f1, o.macro_f1, 1e-9);
  EXPECT_NEAR(r.exact_row_match, o.exact_row_match, 1e-9);
}

}  // namespace

TEST(Metrics, OraclePinsTwoRowFixture) {
  const auto o = test::oracle_evaluate(test::keyed(pinned_gold()), test::keyed(pinned_pred()));
  EXPECT_DOUBLE_EQ(o.micro_f1, kPinnedMicro);
  EXPECT_DOUBLE_EQ(o.macro_f1, kPinnedMacro);
  EXPECT_EQ(o.exact_row_match, 0.0);
  EXPECT_NEAR(o.macro_f1, 0.7778, 5e-5);
}

TEST(Metrics, TwoRowFixture) {
  const EvalReport r = evaluate(pinned_gold(), pinned_pred());
  EXPECT_NEAR(r.micro_f1, kPinnedMicro, 1e-12);
  EXPECT_NEAR(r.macro_f1, kPinnedMacro, 1e-12);
  EXPECT_EQ(r.exact_row_match, 0.0);
  EXPECT_EQ(r.rows, 2u);
  EXPECT_EQ(r.at(Label::kInternal).f1, 0.0);
  EXPECT_NEAR(r.at(Label::kPerceptual).f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.at(Label::kPerceptual).counts, (ConfusionCounts{1, 1, 0, 0}));
}

TEST(Metrics, TwoRowFixtureFromFiles) {
  const EvalReport r =
      evaluate(load_label_table(test::fixture("eval_gold.json")), load_label_table(test::fixture("eval_pred.json")));
  EXPECT_NEAR(r.micro_f1, kPinnedMicro, 1e-12);
  const std::string table_text = render_report(r, ReportFormat::kTable);
  EXPECT_NE(table_text.find("Micro F1                        0.83"), std::string::npos) << table_text;
  const auto json = nlohmann::json::parse(render_report(r, ReportFormat::kJson));
  EXPECT_EQ(json["overall"]["micro_f1"].get<double>(), r.micro_f1);
  EXPECT_EQ(json["labels"]["Perceptual"]["fp"], 1);
}

TEST(Metrics, OracleEquivalenceRandomized) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const LabelTable gold = test::random_table(rng, n);
    const LabelTable pred = test::perturb(rng, gold, trial % 2 == 0 ? 0.5 : 0.1);
    const EvalReport r = evaluate(gold, pred);
    expect_matches_oracle(r, test::oracle_evaluate(test::keyed(gold), test::keyed(pred)));
    for (const LabelMetrics& m : r.labels) {
      EXPECT_EQ(m.counts.total(), n);
      for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
    double sum = 0;
    for (const LabelMetrics& m : r.labels) sum += m.f1;
    EXPECT_NEAR(r.macro_f1, sum / 6, 1e-12);
  }
}

TEST(Metrics, IdentityReport) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const LabelTable g = test::random_table(rng, std::uniform_int_distribution<std::size_t>(1, 50)(rng));
    const EvalReport r = evaluate(g, g);
    EXPECT_EQ(r.exact_row_match, 1.0);
    bool full_support = true;
    for (const LabelMetrics& m : r.labels) {
      EXPECT_EQ(m.accuracy, 1.0);
      EXPECT_EQ(m.counts.fp + m.counts.fn, 0u);
      if (m.counts.tp > 0) {
        EXPECT_EQ(m.f1, 1.0);
        EXPECT_FALSE(m.zero_division);
      } else {
        // No positives anywhere: every ratio but accuracy is 0/0.
        EXPECT_EQ(m.f1, 0.0);
        EXPECT_TRUE(m.zero_division);
        full_support = false;
      }
    }
    if (full_support) {
      EXPECT_EQ(r.micro_f1, 1.0);
      EXPECT_EQ(r.macro_f1, 1.0);
    }
  }
}

TEST(Metrics, IdentityOnSampleIsAllOnes) {
  const LabelTable g = load_label_table(test::fixture("sample.focal.json"));
  const EvalReport r = evaluate(g, g);
  EXPECT_EQ(r.micro_f1, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
  EXPECT_EQ(r.exact_row_match, 1.0);
  for (const LabelMetrics& m : r.labels) {
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.recall, 1.0);
    EXPECT_EQ(m.f1, 1.0);
  }
  const std::string text = render_report(r, ReportFormat::kTable);
  EXPECT_EQ(text.find("0."), std::string::npos) << text;
}

TEST(Metrics, AllWrong) {
  const LabelTable g = table({{"e1", {1, 1, 1, 1, 1, 1}}, {"e2", {1, 1, 1, 1, 1, 1}}, {"e3", {1, 1, 1, 1, 1, 1}}});
  const LabelTable p = table({{"e1", {}}, {"e2", {}}, {"e3", {}}});
  const EvalReport r = evaluate(g, p);
  for (const LabelMetrics& m : r.labels) {
    EXPECT_EQ(m.counts.tp, 0u);
    EXPECT_EQ(m.f1, 0.0);
    EXPECT_EQ(m.accuracy, 0.0);
    EXPECT_TRUE(m.zero_division);  // precision is 0/0
  }
  EXPECT_EQ(r.exact_row_match, 0.0);
  EXPECT_EQ(r.micro_f1, 0.0);
}

TEST(Metrics, PermutationInvariance) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const LabelTable g = test::random_table(rng, 30);
    const LabelTable p = test::perturb(rng, g, 0.3);
    std::vector<std::size_t> order(g.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<LabelRow> gs, ps;
    for (std::size_t i : order) {
      gs.push_back(g.rows()[i]);
      ps.push_back(p.rows()[i]);
    }
    const EvalReport a = evaluate(g, p);
    const EvalReport b = evaluate(LabelTable(gs), LabelTable(ps));
    EXPECT_EQ(render_report(a, ReportFormat::kJson), render_report(b, ReportFormat::kJson));
  }
}

TEST(Metrics, FixingABitNeverLowersMicroF1) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const LabelTable g = test::random_table(rng, 20);
    const LabelTable p = test::perturb(rng, g, 0.4);
    std::vector<std::pair<std::size_t, std::size_t>> wrong;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < kLabelCount; ++j)
        if (g.rows()[i].bits[j] != p.rows()[i].bits[j]) wrong.emplace_back(i, j);
    if (wrong.empty()) continue;
    const auto [i, j] = wrong[std::uniform_int_distribution<std::size_t>(0, wrong.size() - 1)(rng)];
    std::vector<LabelRow> fixed = p.rows();
    fixed[i].bits[j] = g.rows()[i].bits[j];
    EXPECT_GE(evaluate(g, LabelTable(fixed)).micro_f1, evaluate(g, p).micro_f1);
  }
}

TEST(Align, StrictAndIntersect) {
  std::vector<LabelRow> gold_rows, pred_rows;
  for (int i = 0; i < 10; ++i) {
    LabelRow r{row_key("s", "e" + std::to_string(i), "c"), {1, 0, 0, 0, 0, 0}};
    if (i < 8) pred_rows.push_back(r);
    gold_rows.push_back(std::move(r));
  }
  const LabelTable gold(gold_rows), pred(pred_rows);

  EXPECT_EQ(align(gold, gold).keys.size(), 10u);
  try {
    align(gold, pred);
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_EQ(e.missing_in_pred(), (std::vector<std::string>{"s/e8/c", "s/e9/c"}));
    EXPECT_TRUE(e.missing_in_gold().empty());
  }
  const AlignedTables t = align(gold, pred, AlignPolicy::kIntersect);
  EXPECT_EQ(t.keys.size(), 8u);
  EXPECT_EQ(t.dropped_gold, 2u);
  EXPECT_EQ(t.dropped_pred, 0u);
  EXPECT_TRUE(std::is_sorted(t.keys.begin(), t.keys.end()));
}

TEST(Align, EmptyEvaluation) {
  const LabelTable a = table({{"e1", {1, 0, 0, 0, 0, 0}}});
  const LabelTable b({{row_key("x", "y", "z"), {}}});
  EXPECT_THROW(evaluate(a, b, AlignPolicy::kIntersect), EmptyEvaluation);
  EXPECT_THROW(evaluate(LabelTable{}, LabelTable{}), EmptyEvaluation);
}

TEST(LabelTableTest, RejectsBadRows) {
  EXPECT_THROW(table({{"e1", {}}, {"e1", {}}}), std::invalid_argument);
  EXPECT_THROW(table({{"e1", {0, 0, 2, 0, 0, 0}}}), std::invalid_argument);
}

TEST(LabelTableTest, FileRoundTripAndExtraction) {
  const LabelTable from_doc = load_label_table(test::fixture("sample.focal.json"));
  EXPECT_EQ(from_doc.size(), 5u);
  EXPECT_EQ(from_doc.rows()[0].key.to_string(), "s1/e1/narrator");
  const std::string text = serialize_label_table(from_doc);
  const LabelTable back = parse_label_table(text);
  EXPECT_EQ(serialize_label_table(back), text);
  ASSERT_EQ(back.size(), from_doc.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.rows()[i].key, from_doc.rows()[i].key);
    EXPECT_EQ(back.rows()[i].bits, from_doc.rows()[i].bits);
  }
  EXPECT_THROW(parse_label_table(R"({"schema_version": "1.0", "rows": [{"scene": "s"}]})"), ParseError);
}

TEST(Report, Formats) {
  const EvalReport r = evaluate(pinned_gold(), pinned_pred());
  EXPECT_THROW(render_report(r, ReportFormat::kTable, {}), std::invalid_argument);
  const std::string t = render_report(r, ReportFormat::kTable);
  EXPECT_NE(t.find("Exact Row Match Accuracy"), std::string::npos);
  EXPECT_NE(t.find("Macro F1                        0.78"), std::string::npos) << t;
  const std::array<Label, 1> one = {Label::kPov};
  const std::string sub = render_report(r, ReportFormat::kTable, one);
  EXPECT_EQ(sub.find("Internal"), std::string::npos);
  EXPECT_EQ(render_report(r, ReportFormat::kJson), render_report(r, ReportFormat::kJson));
}

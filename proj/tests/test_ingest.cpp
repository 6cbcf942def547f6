#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "botdyn/ingest.hpp"

using namespace botdyn;

namespace {

const char* kHeader = "id,timestamp,anger,fear,sadness,joy,disgust,bot_score,word_count,char_count\n";

Corpus parse_csv(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Ingest, ThreeValidRows) {
  const auto c = parse_csv(std::string(kHeader) +
                           "a,1,0.1,0.2,0.3,0.4,0.5,0.05,3,12\n"
                           "b,2,0,0,0,0,0,0,1,1\n"
                           "c,3,1,1,1,1,1,1,0,0\n");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.records[0].id, "a");
  EXPECT_DOUBLE_EQ(c.records[0].emotion(Emotion::joy), 0.4);
  EXPECT_DOUBLE_EQ(c.records[0].bot_score, 0.05);
  EXPECT_EQ(c.records[2].word_count, 0);
}

TEST(Ingest, ColumnOrderIsFree) {
  const auto c = parse_csv(
      "bot_score,char_count,word_count,disgust,joy,sadness,fear,anger,timestamp,id\n"
      "0.2,10,2,0.5,0.4,0.3,0.2,0.1,7,x\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_DOUBLE_EQ(c.records[0].emotion(Emotion::anger), 0.1);
  EXPECT_DOUBLE_EQ(c.records[0].emotion(Emotion::disgust), 0.5);
  EXPECT_DOUBLE_EQ(c.records[0].timestamp, 7.0);
}

TEST(Ingest, OutOfRangeBotScoreNamesField) {
  const auto msg = error_of([] {
    parse_csv(std::string(kHeader) + "a,1,0.1,0.2,0.3,0.4,0.5,1.5,3,12\n");
  });
  EXPECT_NE(msg.find("bot_score"), std::string::npos) << msg;
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
}

TEST(Ingest, NeverClampsEmotionScores) {
  const auto msg = error_of([] {
    parse_csv(std::string(kHeader) + "a,1,0.1,-0.01,0.3,0.4,0.5,0.5,3,12\n");
  });
  EXPECT_NE(msg.find("fear"), std::string::npos) << msg;
}

TEST(Ingest, MalformedFieldNamesRowAndField) {
  const auto msg = error_of([] {
    parse_csv(std::string(kHeader) + "a,1,0.1,0.2,0.3,0.4,0.5,0.5,3,12\n"
                                     "b,2,0.1,0.2,oops,0.4,0.5,0.5,3,12\n");
  });
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("sadness"), std::string::npos) << msg;
}

TEST(Ingest, MissingEmotionColumn) {
  const auto msg = error_of([] {
    parse_csv("id,timestamp,anger,fear,sadness,disgust,bot_score,word_count,char_count\n");
  });
  EXPECT_NE(msg.find("joy"), std::string::npos) << msg;
}

TEST(Ingest, CharCountBelowWordCountRejected) {
  EXPECT_THROW(parse_csv(std::string(kHeader) + "a,1,0.1,0.2,0.3,0.4,0.5,0.5,5,3\n"), ValidationError);
}

TEST(Ingest, SortsSwappedTimestampsStably) {
  const std::string rows[] = {"a,5,0.1,0.1,0.1,0.1,0.1,0.1,1,1\n", "b,2,0.1,0.1,0.1,0.1,0.1,0.1,1,1\n",
                              "c,5,0.1,0.1,0.1,0.1,0.1,0.1,1,1\n", "d,1,0.1,0.1,0.1,0.1,0.1,0.1,1,1\n"};
  std::string text = kHeader;
  for (const auto& r : rows) text += r;
  const auto c = parse_csv(text);
  // Reference: stable sort of (timestamp, input position).
  std::vector<std::pair<double, std::string>> ref = {{5, "a"}, {2, "b"}, {5, "c"}, {1, "d"}};
  std::stable_sort(ref.begin(), ref.end(), [](auto& x, auto& y) { return x.first < y.first; });
  ASSERT_EQ(c.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(c.records[i].id, ref[i].second);
}

TEST(Ingest, IsoTimestamps) {
  EXPECT_DOUBLE_EQ(*parse_timestamp("1970-01-01T00:00:00Z"), 0.0);
  EXPECT_DOUBLE_EQ(*parse_timestamp("1970-01-02"), 86400.0);
  EXPECT_DOUBLE_EQ(*parse_timestamp("2020-10-01T12:30:05.25Z"), 1601555405.25);
  EXPECT_DOUBLE_EQ(*parse_timestamp("2020-10-01 14:30:05+02:00"), 1601555405.0);
  EXPECT_DOUBLE_EQ(*parse_timestamp("1601555405.5"), 1601555405.5);
  EXPECT_FALSE(parse_timestamp("2020-13-01"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
}

TEST(Ingest, JsonlWithNestedEmotions) {
  std::istringstream in(
      R"({"id":"x","timestamp":"2020-01-01T00:00:01Z","emotions":{"anger":0.1,"fear":0.2,"sadness":0.3,"joy":0.4,"disgust":0.5},"bot_score":0.9,"word_count":2,"char_count":8})"
      "\n"
      R"({"id":"y","timestamp":1,"anger":0.1,"fear":0.2,"sadness":0.3,"joy":0.4,"disgust":0.5,"bot_score":0.1,"word_count":1,"char_count":4})"
      "\n");
  const auto c = read_jsonl(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.records[0].id, "y");
  EXPECT_DOUBLE_EQ(c.records[1].emotion(Emotion::disgust), 0.5);
}

TEST(Ingest, JsonlMissingLabel) {
  std::istringstream in(
      R"({"id":"x","timestamp":1,"emotions":{"anger":0.1,"fear":0.2,"sadness":0.3,"disgust":0.5},"bot_score":0.9,"word_count":2,"char_count":8})");
  const auto msg = error_of([&] { read_jsonl(in); });
  EXPECT_NE(msg.find("joy"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
}

// read_records after write_records is the identity, for random valid corpora
// in both formats.
TEST(Ingest, RoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Corpus c;
    double t = 1.6e9;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      MessageRecord r;
      r.id = "id," + std::to_string(i) + (i % 3 ? "\"q\"" : "");
      t += u(rng) * 10.0;
      r.timestamp = t;
      for (auto& e : r.emotions) e = u(rng);
      r.bot_score = u(rng);
      r.word_count = static_cast<std::int64_t>(rng() % 30);
      r.char_count = r.word_count * (1 + static_cast<std::int64_t>(rng() % 8));
      c.records.push_back(r);
    }
    for (auto fmt : {RecordFormat::csv, RecordFormat::jsonl}) {
      std::stringstream ss;
      write_records(ss, c, fmt);
      EXPECT_EQ(read_records(ss, fmt), c);
    }
  }
}

TEST(Scoring, ConstantScorer) {
  const auto c = score_with({"one two", "three"}, ConstantScorer(0.5));
  ASSERT_EQ(c.size(), 2u);
  for (const auto& r : c.records) {
    for (double v : r.emotions) EXPECT_EQ(v, 0.5);
    EXPECT_EQ(r.bot_score, 0.5);
  }
}

TEST(Scoring, WordAndCharacterCounts) {
  const auto c = score_with({"hello world", "", "  a\tb  c "}, ConstantScorer(0.2));
  EXPECT_EQ(c.records[0].word_count, 2);
  EXPECT_EQ(c.records[0].char_count, 10);
  EXPECT_EQ(c.records[1].word_count, 0);
  EXPECT_EQ(c.records[1].char_count, 0);
  EXPECT_EQ(c.records[1].bot_score, 0.2);
  EXPECT_EQ(c.records[2].word_count, 3);
  EXPECT_EQ(c.records[2].char_count, 3);
  EXPECT_EQ(count_words("see https://t.co/x #tag"), 3);
}

TEST(Scoring, HashScorerIsDeterministic) {
  const std::vector<std::string> texts = {"bots everywhere", "vote today", "bots everywhere"};
  const auto a = score_with(texts, HashScorer{});
  const auto b = score_with(texts, HashScorer{});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.records[0].emotions, a.records[2].emotions);
  EXPECT_NE(a.records[0].emotions, a.records[1].emotions);
}

TEST(Scoring, FailureCarriesItemIndex) {
  struct Failing : Scorer {
    Scores score(std::string_view text) const override {
      if (text == "bad") throw std::runtime_error("service unavailable");
      return ConstantScorer(0.1).score(text);
    }
  };
  const auto msg = error_of([] { score_with({"ok", "ok", "bad"}, Failing{}); });
  EXPECT_NE(msg.find("item 2"), std::string::npos) << msg;
}

TEST(Scoring, OutOfRangeScorerOutputRejected) {
  EXPECT_THROW(score_with({"x"}, ConstantScorer(1.5)), ValidationError);
}

// Copyright 2026 The memelens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "memelens/review_service.h"

#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "memelens/errors.h"
#include "memelens/review_server.h"
#include "memelens/synthetic.h"
#include "test_util.h"

namespace memelens {
namespace {

using nlohmann::json;
using testing::TempDir;

AugmentedMeme Scored(const std::string &id, double score) {
  AugmentedMeme m;
  m.id = id;
  m.text = "text of " + id;
  m.score = score;
  m.predicted_label = score >= 0.5 ? 1 : 0;
  m.top_features.push_back({"hate_word_count", FeatureChannel::kEngineered, 0.5});
  return m;
}

// Ten memes, model positive on the first six at threshold 0.5.
std::vector<AugmentedMeme> TenMemes() {
  const double scores[] = {0.95, 0.9, 0.85, 0.8, 0.7, 0.6, 0.4, 0.3, 0.2, 0.1};
  std::vector<AugmentedMeme> out;
  for (int i = 0; i < 10; ++i) out.push_back(Scored("m" + std::to_string(i), scores[i]));
  return out;
}

std::map<std::string, std::string> Images(const std::vector<AugmentedMeme> &ms) {
  std::map<std::string, std::string> out;
  for (const auto &m : ms) out[m.id] = "img/" + m.id + ".png";
  return out;
}

std::vector<std::string> Ids(const std::vector<ReviewItem> &items) {
  std::vector<std::string> out;
  for (const auto &i : items) out.push_back(i.id);
  return out;
}

TEST(ParseQueueSort, Names) {
  EXPECT_EQ(ParseQueueSort("score"), QueueSort::kScoreDescending);
  EXPECT_EQ(ParseQueueSort(""), QueueSort::kScoreDescending);
  EXPECT_EQ(ParseQueueSort("id"), QueueSort::kIdAscending);
  EXPECT_FALSE(ParseQueueSort("random"));
}

TEST(BuildQueue, ThresholdZeroTakesEverything) {
  const auto ms = TenMemes();
  EXPECT_EQ(BuildQueue(ms, 0.0, QueueSort::kScoreDescending).size(), ms.size());
}

TEST(BuildQueue, ThresholdOneWithSubOneScoresIsEmpty) {
  const auto ms = TenMemes();
  EXPECT_TRUE(BuildQueue(ms, 1.0, QueueSort::kScoreDescending).empty());
}

TEST(BuildQueue, OrderingAndTies) {
  std::vector<AugmentedMeme> ms = {Scored("c", 0.7), Scored("a", 0.9),
                                   Scored("b", 0.7), Scored("d", 0.2)};
  std::vector<std::string> got;
  for (const auto *m : BuildQueue(ms, 0.5, QueueSort::kScoreDescending)) {
    got.push_back(m->id);
  }
  EXPECT_EQ(got, (std::vector<std::string>{"a", "b", "c"}));
  got.clear();
  for (const auto *m : BuildQueue(ms, 0.5, QueueSort::kIdAscending)) {
    got.push_back(m->id);
  }
  EXPECT_EQ(got, (std::vector<std::string>{"a", "b", "c"}));
  got.clear();
  for (const auto *m : BuildQueue(ms, 0.0, QueueSort::kIdAscending)) {
    got.push_back(m->id);
  }
  EXPECT_EQ(got, (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(BuildQueue, DeterministicUnderInputPermutation) {
  Rng rng(3);
  std::vector<AugmentedMeme> ms;
  for (int i = 0; i < 60; ++i) {
    // Coarse scores force plenty of ties.
    ms.push_back(Scored("q" + std::to_string(i), rng.Below(10) / 10.0));
  }
  std::vector<std::string> first;
  for (const auto *m : BuildQueue(ms, 0.3, QueueSort::kScoreDescending)) {
    first.push_back(m->id);
  }
  for (int trial = 0; trial < 10; ++trial) {
    rng.Shuffle(std::span<AugmentedMeme>(ms));
    std::vector<std::string> again;
    for (const auto *m : BuildQueue(ms, 0.3, QueueSort::kScoreDescending)) {
      again.push_back(m->id);
    }
    ASSERT_EQ(again, first);
  }
}

TEST(BuildQueue, TrainedModelHighScoresLead) {
  SyntheticOptions opt;
  opt.count = 60;
  opt.write_images = false;
  const SyntheticCorpus syn = GenerateSynthetic(opt);
  Corpus corpus(syn.memes, syn.annotations);
  std::vector<const MemeRecord *> records;
  for (const auto &r : corpus.records()) records.push_back(&r);
  FeaturePipeline pipeline(LoadLexicons(MEMELENS_TEST_LEXICONS),
                           FeaturePipeline::FitVocabulary(corpus, records, {}));
  std::vector<SparseVector> rows;
  std::vector<int> labels;
  for (const auto *r : records) {
    rows.push_back(pipeline.Row(*r, *corpus.Annotation(r->id)));
    labels.push_back(*r->label);
  }
  GbdtParams p;
  p.n_estimators = 10;
  p.max_depth = 4;
  const GbdtModel model = TrainGbdt(rows, labels, p, pipeline.feature_names());

  std::vector<AugmentedMeme> scored;
  std::vector<std::pair<double, std::string>> high;
  for (size_t i = 0; i < records.size(); ++i) {
    scored.push_back(AugmentMeme(*records[i], *corpus.Annotation(records[i]->id),
                                 model, pipeline));
    const double s = model.PredictProba(rows[i]);
    if (s > 0.9) high.emplace_back(-s, records[i]->id);
  }
  ASSERT_GE(high.size(), 3u);
  std::sort(high.begin(), high.end());
  const auto queue = BuildQueue(scored, 0.0, QueueSort::kScoreDescending);
  for (size_t i = 0; i < high.size(); ++i) {
    EXPECT_EQ(queue[i]->id, high[i].second);
  }
  EXPECT_LE(queue[high.size()]->score, 0.9);
}

TEST(ReviewService, QueueItemsArePendingWithImages) {
  TempDir dir;
  const auto ms = TenMemes();
  ReviewService svc(ms, Images(ms), 0.5, dir / "labels.jsonl");
  const auto q = svc.Queue();
  EXPECT_EQ(Ids(q), (std::vector<std::string>{"m0", "m1", "m2", "m3", "m4", "m5"}));
  for (const auto &item : q) {
    EXPECT_EQ(item.status, ReviewStatus::kPending);
    EXPECT_FALSE(item.human);
    EXPECT_EQ(item.img, "img/" + item.id + ".png");
  }
  EXPECT_EQ(svc.Queue(0.0, QueueSort::kIdAscending).size(), 10u);
}

TEST(ReviewService, SubmitLabelEchoesLabeledItem) {
  TempDir dir;
  const auto ms = TenMemes();
  ReviewService svc(ms, Images(ms), 0.5, dir / "labels.jsonl");
  const ReviewItem item = svc.SubmitLabel("m3", 1, "ana");
  EXPECT_EQ(item.id, "m3");
  EXPECT_EQ(item.status, ReviewStatus::kLabeled);
  ASSERT_TRUE(item.human);
  EXPECT_EQ(item.human->label, 1);
  EXPECT_EQ(item.human->annotator, "ana");
  EXPECT_EQ(item.human->labeled_at.size(), 20u);  // 2026-01-02T03:04:05Z
  EXPECT_EQ(item.human->labeled_at.back(), 'Z');
  EXPECT_EQ(svc.Get("m3").status, ReviewStatus::kLabeled);
}

TEST(ReviewService, IdempotentResubmissionAndConflict) {
  TempDir dir;
  const auto ms = TenMemes();
  ReviewService svc(ms, Images(ms), 0.5, dir / "labels.jsonl");
  const ReviewItem first = svc.SubmitLabel("m0", 1, "ana");
  const ReviewItem again = svc.SubmitLabel("m0", 1, "bo");
  EXPECT_EQ(again.human->annotator, "ana");
  EXPECT_EQ(again.human->labeled_at, first.human->labeled_at);
  EXPECT_THROW(svc.SubmitLabel("m0", 0, "bo"), ConflictError);
  EXPECT_EQ(svc.Get("m0").human->label, 1);
  // Only one record reaches the log.
  const std::string log = testing::ReadFile(dir / "labels.jsonl");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1);
}

TEST(ReviewService, NotFoundAndInvalidLabel) {
  TempDir dir;
  const auto ms = TenMemes();
  ReviewService svc(ms, {}, 0.5, dir / "labels.jsonl");
  EXPECT_THROW(svc.Get("nope"), NotFoundError);
  EXPECT_THROW(svc.SubmitLabel("nope", 1, ""), NotFoundError);
  EXPECT_THROW(svc.SubmitLabel("m0", 2, ""), std::invalid_argument);
  EXPECT_THROW(svc.ImagePath("m0"), NotFoundError);
  EXPECT_EQ(svc.Agreement().n_reviewed, 0u);
}

TEST(ReviewService, DuplicateScoredIdRejected) {
  TempDir dir;
  std::vector<AugmentedMeme> ms = {Scored("a", 0.5), Scored("a", 0.6)};
  EXPECT_THROW(ReviewService(ms, {}, 0.5, dir / "l.jsonl"), ValidationError);
}

TEST(LabelStore, SurvivesRestart) {
  TempDir dir;
  const auto ms = TenMemes();
  {
    ReviewService svc(ms, Images(ms), 0.5, dir / "sub" / "labels.jsonl");
    svc.SubmitLabel("m1", 0, "ana");
    svc.SubmitLabel("m7", 1, "bo");
  }
  ReviewService svc(ms, Images(ms), 0.5, dir / "sub" / "labels.jsonl");
  EXPECT_EQ(svc.Get("m1").human->label, 0);
  EXPECT_EQ(svc.Get("m7").human->annotator, "bo");
  EXPECT_EQ(svc.Get("m2").status, ReviewStatus::kPending);
  EXPECT_THROW(svc.SubmitLabel("m1", 1, "cy"), ConflictError);
  EXPECT_EQ(svc.Agreement().n_reviewed, 2u);
}

TEST(LabelStore, TornFinalLineDropped) {
  TempDir dir;
  const auto path = dir / "labels.jsonl";
  testing::WriteFile(path,
                     "{\"id\":\"m1\",\"label\":1,\"annotator\":\"a\","
                     "\"labeled_at\":\"2026-01-01T00:00:00Z\"}\n{\"id\":\"m2\",\"la");
  LabelStore store(path);
  EXPECT_TRUE(store.Find("m1"));
  EXPECT_FALSE(store.Find("m2"));
}

TEST(LabelStore, CorruptMiddleLineRejected) {
  TempDir dir;
  const auto path = dir / "labels.jsonl";
  testing::WriteFile(path, "garbage\n{\"id\":\"m1\",\"label\":1}\n");
  try {
    LabelStore store(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 1u);
  }
  testing::WriteFile(path, "{\"id\":\"m1\"}\n{\"id\":\"m2\",\"label\":0}\n");
  EXPECT_THROW(LabelStore{path}, ParseError);
}

TEST(LabelStore, ConcurrentDistinctItemsKeepEveryWrite) {
  TempDir dir;
  std::vector<AugmentedMeme> ms;
  for (int i = 0; i < 64; ++i) ms.push_back(Scored("c" + std::to_string(i), 0.6));
  {
    ReviewService svc(ms, {}, 0.5, dir / "labels.jsonl");
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&svc, t] {
        for (int i = t; i < 64; i += 8) {
          svc.SubmitLabel("c" + std::to_string(i), i % 2, "t" + std::to_string(t));
        }
      });
    }
    for (auto &th : threads) th.join();
    EXPECT_EQ(svc.Agreement().n_reviewed, 64u);
  }
  LabelStore reread(dir / "labels.jsonl");
  const auto snap = reread.Snapshot();
  ASSERT_EQ(snap.size(), 64u);
  for (int i = 0; i < 64; ++i) {
    EXPECT_EQ(snap.at("c" + std::to_string(i)).label, i % 2);
  }
}

TEST(LabelStore, ConcurrentConflictingSubmissions) {
  for (int trial = 0; trial < 25; ++trial) {
    TempDir dir;
    const auto ms = TenMemes();
    ReviewService svc(ms, {}, 0.5, dir / "labels.jsonl");
    std::atomic<int> conflicts{0};
    std::atomic<bool> go{false};
    auto submit = [&](int label) {
      while (!go.load()) std::this_thread::yield();
      try {
        svc.SubmitLabel("m4", label, "x");
      } catch (const ConflictError &) {
        ++conflicts;
      }
    };
    std::thread a(submit, 0), b(submit, 1);
    go = true;
    a.join();
    b.join();
    EXPECT_EQ(conflicts.load(), 1);
    LabelStore reread(dir / "labels.jsonl");
    ASSERT_EQ(reread.Snapshot().size(), 1u);
    EXPECT_EQ(reread.Find("m4")->label, svc.Get("m4").human->label);
  }
}

TEST(Agreement, FourLabelsThreeMatching) {
  TempDir dir;
  const auto ms = TenMemes();
  ReviewService svc(ms, {}, 0.5, dir / "labels.jsonl");
  svc.SubmitLabel("m0", 1, "");  // agrees
  svc.SubmitLabel("m1", 1, "");  // agrees
  svc.SubmitLabel("m8", 0, "");  // agrees
  svc.SubmitLabel("m9", 1, "");  // model says 0
  const AgreementStats s = svc.Agreement();
  EXPECT_EQ(s.n_reviewed, 4u);
  EXPECT_DOUBLE_EQ(s.agreement, 0.75);
}

TEST(Agreement, ScriptedTenLabelSession) {
  TempDir dir;
  const auto ms = TenMemes();
  ReviewService svc(ms, {}, 0.5, dir / "labels.jsonl");
  const int human[] = {1, 1, 0, 1, 1, 0, 0, 1, 0, 0};
  for (int i = 0; i < 10; ++i) svc.SubmitLabel("m" + std::to_string(i), human[i], "s");
  // Model: 1 1 1 1 1 1 0 0 0 0. Matches at 0 1 3 4 6 8 9.
  const AgreementStats s = svc.Agreement();
  EXPECT_EQ(s.n_reviewed, 10u);
  EXPECT_DOUBLE_EQ(s.agreement, 0.7);
  EXPECT_DOUBLE_EQ(s.human_positive_rate, 0.5);
  EXPECT_DOUBLE_EQ(s.model_positive_rate, 0.6);
  EXPECT_EQ(s.both_positive, 4u);
  EXPECT_EQ(s.model_only_positive, 2u);
  EXPECT_EQ(s.human_only_positive, 1u);
  EXPECT_EQ(s.both_negative, 3u);
  const json j = ToJson(s);
  EXPECT_EQ(j["confusion"]["model_1_human_0"], 2);
  EXPECT_EQ(j["n_reviewed"], 10);
}

TEST(Agreement, ConfusionPartitionsReviewed) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    TempDir dir;
    std::vector<AugmentedMeme> ms;
    for (int i = 0; i < 40; ++i) ms.push_back(Scored("r" + std::to_string(i), rng.Uniform()));
    const double threshold = rng.Uniform();
    ReviewService svc(ms, {}, threshold, dir / "labels.jsonl");
    size_t agree = 0, n = 0;
    for (const auto &m : ms) {
      if (rng.Below(2) == 0) continue;
      const int label = static_cast<int>(rng.Below(2));
      svc.SubmitLabel(m.id, label, "");
      ++n;
      if ((m.score >= threshold) == (label == 1)) ++agree;
    }
    const AgreementStats s = svc.Agreement();
    ASSERT_EQ(s.n_reviewed, n);
    ASSERT_EQ(s.both_positive + s.model_only_positive + s.human_only_positive +
                  s.both_negative,
              n);
    if (n > 0) {
      ASSERT_DOUBLE_EQ(s.agreement, static_cast<double>(agree) / n);
    }
  }
}

TEST(ReviewItemJson, PendingAndLabeled) {
  TempDir dir;
  const auto ms = TenMemes();
  ReviewService svc(ms, Images(ms), 0.5, dir / "labels.jsonl");
  json j = ToJson(svc.Get("m2"));
  EXPECT_EQ(j["status"], "pending");
  EXPECT_TRUE(j["human_label"].is_null());
  EXPECT_TRUE(j["annotator"].is_null());
  EXPECT_EQ(j["img"], "img/m2.png");
  EXPECT_EQ(j["augmentation"]["id"], "m2");
  j = ToJson(svc.SubmitLabel("m2", 0, "ana"));
  EXPECT_EQ(j["status"], "labeled");
  EXPECT_EQ(j["human_label"], 0);
  EXPECT_EQ(j["annotator"], "ana");
  EXPECT_TRUE(j["labeled_at"].is_string());
}

// Runs a ReviewServer on an ephemeral port for the lifetime of the fixture.
class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    memes_ = TenMemes();
    std::filesystem::create_directories(dir_ / "img");
    testing::WriteFile(dir_ / "img" / "m0.png", "PNGDATA");
    auto images = Images(memes_);
    images["m1"] = "../outside.png";
    service_ = std::make_unique<ReviewService>(memes_, images, 0.5,
                                               dir_ / "labels.jsonl");
    server_ = std::make_unique<ReviewServer>(*service_, dir_.path(),
                                             json{{"model", "test"}});
    port_ = server_->BindToAnyPort("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->ListenAfterBind(); });
    server_->WaitUntilReady();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    if (server_) server_->Stop();
    if (thread_.joinable()) thread_.join();
  }

  json GetJson(const std::string &path, int want_status) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return json();
    EXPECT_EQ(res->status, want_status) << path << " " << res->body;
    return json::parse(res->body);
  }
  json PostLabel(const std::string &id, const std::string &body,
                 int want_status) {
    auto res = client_->Post("/api/memes/" + id + "/label", body,
                             "application/json");
    EXPECT_TRUE(res);
    if (!res) return json();
    EXPECT_EQ(res->status, want_status) << body << " " << res->body;
    return json::parse(res->body);
  }

  TempDir dir_;
  std::vector<AugmentedMeme> memes_;
  std::unique_ptr<ReviewService> service_;
  std::unique_ptr<ReviewServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = -1;
};

TEST_F(ServerTest, Health) {
  const json j = GetJson("/api/health", 200);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_EQ(j["items"], 10);
  EXPECT_EQ(j["model"], "test");
  EXPECT_TRUE(j["simd"].is_string());
}

TEST_F(ServerTest, QueueOrderingAndValidation) {
  json j = GetJson("/api/queue", 200);
  ASSERT_EQ(j.size(), 6u);
  EXPECT_EQ(j[0]["id"], "m0");
  EXPECT_EQ(j[5]["id"], "m5");
  j = GetJson("/api/queue?threshold=0.75&sort=id", 200);
  ASSERT_EQ(j.size(), 4u);
  EXPECT_EQ(j[0]["id"], "m0");
  EXPECT_EQ(j[3]["id"], "m3");
  EXPECT_EQ(GetJson("/api/queue?threshold=0", 200).size(), 10u);
  EXPECT_EQ(GetJson("/api/queue?threshold=1", 200).size(), 0u);
  EXPECT_EQ(GetJson("/api/queue", 200), GetJson("/api/queue", 200));
  EXPECT_TRUE(GetJson("/api/queue?threshold=1.5", 400).contains("error"));
  EXPECT_TRUE(GetJson("/api/queue?threshold=abc", 400).contains("error"));
  EXPECT_TRUE(GetJson("/api/queue?sort=random", 400).contains("error"));
}

TEST_F(ServerTest, MemeDetailAndImage) {
  const json j = GetJson("/api/memes/m0", 200);
  EXPECT_EQ(j["id"], "m0");
  EXPECT_EQ(j["augmentation"]["top_features"][0]["name"], "hate_word_count");
  GetJson("/api/memes/zzz", 404);

  auto res = client_->Get("/api/memes/m0/image");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, "PNGDATA");
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  GetJson("/api/memes/m2/image", 404);   // file missing
  GetJson("/api/memes/m1/image", 404);   // escapes the root
  GetJson("/api/memes/zzz/image", 404);
}

TEST_F(ServerTest, LabelRoundTripAndConflicts) {
  json j = PostLabel("m3", R"({"label": 1, "annotator": "ana"})", 200);
  EXPECT_EQ(j["status"], "labeled");
  EXPECT_EQ(j["human_label"], 1);
  PostLabel("m3", R"({"label": 1, "annotator": "bo"})", 200);
  j = PostLabel("m3", R"({"label": 0})", 409);
  EXPECT_TRUE(j.contains("error"));
  EXPECT_EQ(j["item"]["human_label"], 1);
  EXPECT_EQ(j["item"]["annotator"], "ana");
  PostLabel("zzz", R"({"label": 1})", 404);
  PostLabel("m3", R"({"label": 2})", 400);
  PostLabel("m3", R"({"label": "1"})", 400);
  PostLabel("m3", "not json", 400);
  PostLabel("m3", "{}", 400);

  j = GetJson("/api/stats/agreement", 200);
  EXPECT_EQ(j["n_reviewed"], 1);
  EXPECT_EQ(j["agreement"], 1.0);
  EXPECT_EQ(GetJson("/api/queue", 200)[3]["status"], "labeled");
}

TEST_F(ServerTest, ScriptedSessionAgreement) {
  const int human[] = {1, 1, 0, 1, 1, 0, 0, 1, 0, 0};
  for (int i = 0; i < 10; ++i) {
    PostLabel("m" + std::to_string(i),
              json{{"label", human[i]}, {"annotator", "s"}}.dump(), 200);
  }
  const json j = GetJson("/api/stats/agreement", 200);
  EXPECT_EQ(j["n_reviewed"], 10);
  EXPECT_DOUBLE_EQ(j["agreement"].get<double>(), 0.7);
  EXPECT_EQ(j["confusion"]["model_1_human_1"], 4);
  EXPECT_EQ(j["confusion"]["model_0_human_1"], 1);
  EXPECT_EQ(j["confusion"]["model_0_human_0"], 3);
}

}  // namespace
}  // namespace memelens

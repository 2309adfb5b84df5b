/* Copyright 2026 The D3TW Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <unistd.h>

#include "d3tw/data.h"
#include "d3tw/error.h"
#include "d3tw/metrics.h"

namespace d3tw {
namespace {

namespace fs = std::filesystem;

Transcript tr(std::vector<ActionId> a) { return Transcript{std::move(a)}; }

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() /
               ("d3tw_" + std::to_string(::getpid()) + "_" + info->test_suite_name() + "_" +
                info->name());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

SynthConfig small_config() {
  SynthConfig c;
  c.train_count = 12;
  c.test_count = 4;
  c.sparse_fraction = 0.2;
  return c;
}

template <typename F>
Error error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no d3tw::Error thrown";
  return Error(ErrorCode::kInvalidInput, "none");
}

TEST(Labels, Collapse) {
  EXPECT_EQ(collapse_labels(std::vector<ActionId>{0, 0, 1, 1, 1}), (std::vector<ActionId>{0, 1}));
  EXPECT_EQ(collapse_labels(std::vector<ActionId>{2, 1, 2}), (std::vector<ActionId>{2, 1, 2}));
  EXPECT_TRUE(collapse_labels(std::vector<ActionId>{}).empty());
}

TEST(Labels, ExpandUniform) {
  EXPECT_EQ(expand_transcript_uniform(tr({0, 1}), 4), (std::vector<ActionId>{0, 0, 1, 1}));
  EXPECT_EQ(expand_transcript_uniform(tr({0, 1, 2}), 4), (std::vector<ActionId>{0, 1, 2, 2}));
  EXPECT_EQ(expand_transcript_uniform(tr({3}), 3), (std::vector<ActionId>{3, 3, 3}));
  EXPECT_EQ(error_of([] { expand_transcript_uniform(tr({0, 1, 2}), 2); }).code(),
            ErrorCode::kInfeasible);
}

TEST(Vocabulary, Validation) {
  const Vocabulary v({"pour", "stir"});
  EXPECT_EQ(v.size(), 2);
  EXPECT_EQ(v.find("stir"), 1);
  EXPECT_FALSE(v.find("cut").has_value());
  EXPECT_EQ(error_of([] { Vocabulary({"a", "a"}); }).code(), ErrorCode::kInvalidInput);
  EXPECT_EQ(error_of([] { Vocabulary({"a b"}); }).code(), ErrorCode::kInvalidInput);
  EXPECT_EQ(error_of([] { Vocabulary({""}); }).code(), ErrorCode::kInvalidInput);
}

TEST(Synthetic, DefaultsMatchTheFixture) {
  const SynthConfig c;
  EXPECT_EQ(c.num_actions, 5);
  EXPECT_EQ(c.feature_dim, 3);
  EXPECT_EQ(c.sigma_between, 4.0);
  EXPECT_EQ(c.sigma_within, 0.5);
  EXPECT_EQ(c.min_transcript_length, 3);
  EXPECT_EQ(c.max_transcript_length, 6);
  EXPECT_EQ(c.train_count, 200);
  EXPECT_EQ(c.test_count, 50);
  EXPECT_EQ(c.seed, 7u);
}

TEST(Synthetic, RecordsAreConsistent) {
  const SynthConfig c = small_config();
  const SyntheticDataset s = generate_synthetic(c);
  EXPECT_NO_THROW(validate_dataset(s.dataset));
  EXPECT_EQ(s.dataset.split("train").size(), 12u);
  EXPECT_EQ(s.dataset.split("test").size(), 4u);
  EXPECT_EQ(s.class_means.rows(), c.num_actions);
  for (const auto& [name, records] : s.dataset.splits) {
    for (const SequenceRecord& r : records) {
      ASSERT_TRUE(r.gt_frame_labels.has_value());
      const auto& gt = *r.gt_frame_labels;
      EXPECT_EQ(collapse_labels(gt), r.transcript.actions);
      EXPECT_GE(r.transcript.size(), 3u);
      EXPECT_LE(r.transcript.size(), 6u);
      for (const Segment& seg : segments_from_labels(gt)) {
        EXPECT_GE(seg.length(), 10u);
        EXPECT_LE(seg.length(), 16u);
      }
      ASSERT_TRUE(r.sparse_annotations.has_value());
      for (const auto& [frame, action] : *r.sparse_annotations) EXPECT_EQ(gt.at(frame), action);
    }
  }
}

TEST(Synthetic, SameSeedSameData) {
  EXPECT_EQ(generate_synthetic(small_config()).dataset, generate_synthetic(small_config()).dataset);
  SynthConfig other = small_config();
  other.seed = 8;
  EXPECT_NE(generate_synthetic(small_config()).dataset, generate_synthetic(other).dataset);
}

TEST(Synthetic, SparseFractionDoesNotMoveFeatures) {
  SynthConfig a = small_config();
  SynthConfig b = small_config();
  a.sparse_fraction = 0.0;
  b.sparse_fraction = 0.5;
  const Dataset da = generate_synthetic(a).dataset;
  const Dataset db = generate_synthetic(b).dataset;
  for (std::size_t n = 0; n < da.split("train").size(); ++n) {
    EXPECT_EQ(da.split("train")[n].features, db.split("train")[n].features);
    EXPECT_EQ(da.split("train")[n].transcript, db.split("train")[n].transcript);
  }
}

TEST(Synthetic, NoiselessFramesSitOnTheirMeans) {
  SynthConfig c = small_config();
  c.sigma_within = 0.0;
  const SyntheticDataset s = generate_synthetic(c);
  for (const SequenceRecord& r : s.dataset.split("train")) {
    std::vector<ActionId> pred;
    for (Eigen::Index t = 0; t < r.features.rows(); ++t) {
      Eigen::Index best = 0;
      (s.class_means.rowwise() - r.features.row(t)).rowwise().squaredNorm().minCoeff(&best);
      pred.push_back(static_cast<ActionId>(best));
    }
    EXPECT_EQ(frame_accuracy(pred, *r.gt_frame_labels), 1.0);
  }
}

TEST(Synthetic, ConfigValidation) {
  SynthConfig c;
  c.num_actions = 1;
  EXPECT_EQ(error_of([&] { c.validate(); }).code(), ErrorCode::kInvalidInput);
  c = SynthConfig{};
  c.min_transcript_length = 7;
  EXPECT_EQ(error_of([&] { c.validate(); }).code(), ErrorCode::kInvalidInput);
  c = SynthConfig{};
  c.sparse_fraction = 1.5;
  EXPECT_EQ(error_of([&] { c.validate(); }).code(), ErrorCode::kInvalidInput);
  EXPECT_EQ(SynthConfig::from_json(small_config().to_json()).to_json(), small_config().to_json());
}

TEST(Storage, RoundTrip) {
  const fs::path dir = scratch_dir();
  const Dataset d = generate_synthetic(small_config()).dataset;
  save_dataset(d, dir);
  EXPECT_TRUE(fs::exists(dir / "vocab.txt"));
  EXPECT_TRUE(fs::exists(dir / "train" / "train_0000.features.csv"));
  EXPECT_TRUE(fs::exists(dir / "train" / "train_0000.transcript.txt"));
  EXPECT_TRUE(fs::exists(dir / "train" / "train_0000.labels.txt"));
  EXPECT_EQ(load_dataset(dir), d);
  fs::remove_all(dir);
}

TEST(Storage, Subsample) {
  const Dataset d = generate_synthetic(small_config()).dataset;
  const Dataset s = subsample(d, 3);
  const SequenceRecord& a = d.split("train")[0];
  const SequenceRecord& b = s.split("train")[0];
  EXPECT_EQ(b.num_frames(), (a.num_frames() + 2) / 3);
  EXPECT_EQ(b.features.row(1), a.features.row(3));
  EXPECT_EQ((*b.gt_frame_labels)[2], (*a.gt_frame_labels)[6]);
  for (const auto& [frame, action] : *b.sparse_annotations) {
    EXPECT_EQ(a.sparse_annotations->at(frame * 3), action);
  }
}

class BrokenFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir();
    SynthConfig c = small_config();
    c.train_count = 1;
    c.test_count = 1;
    save_dataset(generate_synthetic(c).dataset, dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(BrokenFiles, UnknownActionCitesTheLine) {
  write(dir_ / "train" / "train_0000.transcript.txt", "action0 jump\n");
  const Error e = error_of([&] { load_dataset(dir_); });
  EXPECT_EQ(e.code(), ErrorCode::kUnknownAction);
  EXPECT_NE(std::string(e.what()).find("train_0000.transcript.txt:1"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find("jump"), std::string::npos);
}

TEST_F(BrokenFiles, NonNumericTokenCitesLineAndColumn) {
  write(dir_ / "train" / "train_0000.features.csv", "1,2,3\n4,x5,6\n");
  const Error e = error_of([&] { load_dataset(dir_); });
  EXPECT_EQ(e.code(), ErrorCode::kParse);
  EXPECT_NE(std::string(e.what()).find("train_0000.features.csv:2:3"), std::string::npos) << e.what();
}

TEST_F(BrokenFiles, WrongColumnCount) {
  write(dir_ / "train" / "train_0000.features.csv", "1,2\n");
  EXPECT_EQ(error_of([&] { load_dataset(dir_); }).code(), ErrorCode::kParse);
  write(dir_ / "train" / "train_0000.features.csv", "1,2,3,4\n");
  EXPECT_EQ(error_of([&] { load_dataset(dir_); }).code(), ErrorCode::kParse);
}

TEST_F(BrokenFiles, LabelCountMismatch) {
  write(dir_ / "train" / "train_0000.labels.txt", "action0\n");
  EXPECT_EQ(error_of([&] { load_dataset(dir_); }).code(), ErrorCode::kInconsistentLength);
}

TEST_F(BrokenFiles, MissingFile) {
  fs::remove(dir_ / "test" / "test_0000.features.csv");
  EXPECT_EQ(error_of([&] { load_dataset(dir_); }).code(), ErrorCode::kMissingFile);
  EXPECT_EQ(error_of([] { load_dataset("/nonexistent/d3tw"); }).code(), ErrorCode::kMissingFile);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

}  // namespace
}  // namespace d3tw

/*
Copyright 2026 The binscene Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include <gtest/gtest.h>

#include "binscene/core/error.hpp"
#include "binscene/materials/materials.hpp"
#include "support/scenes.hpp"
#include "support/temp_dir.hpp"

namespace binscene::materials {
namespace {

using binscene::testing::GridBox;
using binscene::testing::Shoebox;
using binscene::testing::TempDir;

void WriteText(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

MaterialDatabase Db(std::vector<MaterialEntry> entries) {
  MaterialDatabase db;
  db.entries = std::move(entries);
  return db;
}

BandCoefficients Flat(double a) {
  BandCoefficients b;
  b.fill(a);
  return b;
}

std::string ErrorText(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(LoadMaterialDatabase, ThreeRowCsv) {
  TempDir dir;
  WriteText(dir.file("db.csv"),
            "name,a62,a125,a250,a500,a1000,a2000,a4000,a8000\n"
            "wall,0.01,0.01,0.02,0.02,0.03,0.04,0.05,0.05\n"
            "carpet,0.02,0.05,0.1,0.3,0.5,0.6,0.65,0.7\n"
            "glass,0.3,0.25,0.18,0.12,0.07,0.04,0.03,0.02\n");
  const auto db = LoadMaterialDatabase(dir.file("db.csv"));
  ASSERT_EQ(db.entries.size(), 3u);
  ASSERT_NE(db.Find("carpet"), nullptr);
  EXPECT_DOUBLE_EQ(db.Find("carpet")->absorption[4], 0.5);
}

TEST(LoadMaterialDatabase, JsonObjectAndArrayForms) {
  TempDir dir;
  WriteText(dir.file("a.json"), R"({"wood": [0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1]})");
  WriteText(dir.file("b.json"), R"([{"name": "wood", "absorption": [0.2,0.2,0.2,0.2,0.2,0.2,0.2,0.2]}])");
  EXPECT_DOUBLE_EQ(LoadMaterialDatabase(dir.file("a.json")).entries.at(0).absorption[0], 0.1);
  EXPECT_DOUBLE_EQ(LoadMaterialDatabase(dir.file("b.json")).entries.at(0).absorption[7], 0.2);
}

TEST(LoadMaterialDatabase, CoefficientAboveOneRejected) {
  TempDir dir;
  WriteText(dir.file("db.csv"), "wall,0.1,0.1,0.1,1.3,0.1,0.1,0.1,0.1\n");
  const auto msg = ErrorText([&] { LoadMaterialDatabase(dir.file("db.csv")); });
  EXPECT_NE(msg.find("absorption out of range"), std::string::npos) << msg;
}

TEST(LoadMaterialDatabase, DuplicateNameRejected) {
  TempDir dir;
  WriteText(dir.file("db.csv"), "wall,0,0,0,0,0,0,0,0\nwall,0,0,0,0,0,0,0,0\n");
  EXPECT_THROW(LoadMaterialDatabase(dir.file("db.csv")), Error);
}

TEST(LoadMaterialDatabase, RaggedEmbeddingsRejected) {
  TempDir dir;
  WriteText(dir.file("db.csv"), "a,0,0,0,0,0,0,0,0\nb,0,0,0,0,0,0,0,0\n");
  std::ofstream emb(dir.file("emb.json"));
  emb << "{\"a\": [";
  for (int i = 0; i < 768; ++i) emb << (i ? "," : "") << "0.1";
  emb << "], \"b\": [";
  for (int i = 0; i < 512; ++i) emb << (i ? "," : "") << "0.1";
  emb << "]}";
  emb.close();
  const auto msg = ErrorText([&] { LoadMaterialDatabase(dir.file("db.csv"), dir.file("emb.json")); });
  EXPECT_NE(msg.find("ragged embedding dimensions"), std::string::npos) << msg;
}

TEST(LoadMaterialDatabase, WrongColumnCountRejected) {
  TempDir dir;
  WriteText(dir.file("db.csv"), "wall,0.1,0.1\n");
  EXPECT_THROW(LoadMaterialDatabase(dir.file("db.csv")), Error);
}

TEST(MatchLabel, ExactName) {
  const auto db = Db({{"wall", Flat(0.1)}, {"floor", Flat(0.2)}});
  const auto hit = MatchLabel("wall", db, MatchStrategy::kExact);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->name, "wall");
}

TEST(MatchLabel, ExactNormalizesCaseAndSeparators) {
  const auto db = Db({{"wood table", Flat(0.1)}});
  const auto hit = MatchLabel("Wood_Table", db, MatchStrategy::kExact);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->name, "wood table");
}

TEST(MatchLabel, TokenOverlapPicksHighestJaccard) {
  // {wooden, table} vs {wood, table}: one shared token out of three.
  EXPECT_DOUBLE_EQ(JaccardSimilarity("wooden table", "wood table"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(JaccardSimilarity("wooden table", "metal door"), 0.0);
  const auto db = Db({{"wood table", Flat(0.1)}, {"metal door", Flat(0.2)}});
  const auto hit = MatchLabel("wooden table", db, MatchStrategy::kTokenOverlap);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->name, "wood table");
}

TEST(MatchLabel, TokenOverlapNoSharedTokenIsNoMatch) {
  const auto db = Db({{"metal door", Flat(0.2)}});
  EXPECT_FALSE(MatchLabel("zzz", db, MatchStrategy::kTokenOverlap));
}

TEST(MatchLabel, TiesGoToSmallestName) {
  const auto db = Db({{"red chair", Flat(0.1)}, {"blue chair", Flat(0.2)}});
  const auto hit = MatchLabel("chair", db, MatchStrategy::kTokenOverlap);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->name, "blue chair");
}

TEST(MatchLabel, EmbeddingIdentityVector) {
  auto db = Db({{"brick", Flat(0.1)}, {"curtain", Flat(0.5)}});
  db.embeddings["brick"] = {1.0, 0.0, 0.0};
  db.embeddings["curtain"] = {0.0, 1.0, 0.2};
  db.embeddings["drape"] = {0.0, 1.0, 0.2};
  const auto hit = MatchLabel("drape", db, MatchStrategy::kEmbeddingCosine);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->name, "curtain");
}

TEST(MatchLabel, EmbeddingMissingForQueryThrows) {
  auto db = Db({{"brick", Flat(0.1)}});
  db.embeddings["brick"] = {1.0, 0.0};
  EXPECT_THROW(MatchLabel("drape", db, MatchStrategy::kEmbeddingCosine), Error);
}

TEST(MatchLabel, Deterministic) {
  const auto db = Db({{"wood table", Flat(0.1)}, {"wood floor", Flat(0.2)}, {"metal door", Flat(0.3)}});
  const auto first = MatchLabel("wood", db, MatchStrategy::kTokenOverlap);
  for (int i = 0; i < 5; ++i) {
    const auto again = MatchLabel("wood", db, MatchStrategy::kTokenOverlap);
    ASSERT_TRUE(again);
    EXPECT_EQ(again->name, first->name);
  }
}

TEST(ResolveLabel, ExactFallsThroughToTokenOverlap) {
  const auto db = Db({{"wood table", Flat(0.1)}});
  const auto hit = ResolveLabel("wooden table", db, MatchStrategy::kExact);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->name, "wood table");
  EXPECT_FALSE(ResolveLabel("zzz", db, MatchStrategy::kExact));
}

TEST(BandAverage, MidAndFull) {
  EXPECT_NEAR(BandAverage({.1, .1, .1, .2, .4, .5, .5, .5}, BandAverageMode::kMid), 0.3, 1e-12);
  EXPECT_NEAR(BandAverage({0, 0, 0, 0, 0, 0, 0, 0.8}, BandAverageMode::kFull), 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(BandAverage(Flat(0.7), BandAverageMode::kMid), 0.7);
  EXPECT_NEAR(BandAverage(Flat(0.7), BandAverageMode::kFull), 0.7, 1e-12);
}

TEST(BandAverage, ParseMode) {
  EXPECT_EQ(ParseBandAverageMode("mid"), BandAverageMode::kMid);
  EXPECT_EQ(ParseBandAverageMode("full"), BandAverageMode::kFull);
  EXPECT_THROW(ParseBandAverageMode("median"), Error);
}

TEST(SampleScattering, ZeroStddevReturnsMean) {
  ScatteringPrior prior;
  prior.mean = 0.42;
  prior.stddev = 0.0;
  EXPECT_EQ(SampleScattering(prior, 7), 0.42);
}

TEST(SampleScattering, NegativeMeanClampsToLowerBound) {
  ScatteringPrior prior;
  prior.mean = -1.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) EXPECT_GE(SampleScattering(prior, seed), 0.01);
}

TEST(SampleScattering, DeterministicInSeed) {
  const ScatteringPrior prior;
  EXPECT_EQ(SampleScattering(prior, 99), SampleScattering(prior, 99));
  EXPECT_NE(SampleScattering(prior, 99), SampleScattering(prior, 100));
}

TEST(SampleScattering, InvalidPriorRejected) {
  ScatteringPrior prior;
  prior.stddev = -0.1;
  EXPECT_THROW(SampleScattering(prior, 0), Error);
  prior = ScatteringPrior{};
  prior.clamp_lo = 0.8;
  prior.clamp_hi = 0.2;
  EXPECT_THROW(SampleScattering(prior, 0), Error);
}

double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double PhiDensity(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

TEST(SampleScattering, MonteCarloMeanMatchesClosedForm) {
  const ScatteringPrior prior;  // mean .3, std .15, clamp [.01, .99]
  const double a = (prior.clamp_lo - prior.mean) / prior.stddev;
  const double b = (prior.clamp_hi - prior.mean) / prior.stddev;
  const double mass = Phi(b) - Phi(a);
  const double truncated = prior.mean + prior.stddev * (PhiDensity(a) - PhiDensity(b)) / mass;
  // Draws outside the interval are clamped onto its ends, which pulls the
  // mean below the truncated one by a few thousandths.
  const double clamped = prior.clamp_lo * Phi(a) + prior.clamp_hi * (1.0 - Phi(b)) +
                         prior.mean * mass + prior.stddev * (PhiDensity(a) - PhiDensity(b));

  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = SampleScattering(prior, static_cast<std::uint64_t>(i));
    ASSERT_GE(s, prior.clamp_lo);
    ASSERT_LE(s, prior.clamp_hi);
    sum += s;
  }
  const double empirical = sum / n;
  EXPECT_NEAR(empirical, truncated, 0.01);
  EXPECT_NEAR(empirical, clamped, 0.002);
}

TEST(AssignMaterials, UniformScene) {
  auto mesh = Shoebox({4, 3, 2.5});
  mesh.label_names = {"wall"};
  std::fill(mesh.vertex_labels.begin(), mesh.vertex_labels.end(), 0);
  const auto db = Db({{"wall", {.1, .1, .1, .2, .4, .5, .5, .5}}});
  AssignOptions opt;
  opt.prior.mean = 0.2;
  opt.prior.stddev = 0.0;
  const auto out = AssignMaterials(mesh, db, opt);
  ASSERT_EQ(out.absorption.size(), mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    EXPECT_NEAR(out.absorption[v], 0.3, 1e-12);
    EXPECT_DOUBLE_EQ(out.scattering[v], 0.2);
  }
  ASSERT_EQ(out.band_absorption.size(), mesh.faces.size());
  EXPECT_DOUBLE_EQ(out.band_absorption[0][4], 0.4);
  EXPECT_NO_THROW(ValidateMaterialMesh(out));
}

TEST(AssignMaterials, UnknownLabelUsesDefault) {
  auto mesh = Shoebox({2, 2, 2});
  mesh.label_names = {"zzz"};
  std::fill(mesh.vertex_labels.begin(), mesh.vertex_labels.end(), 0);
  const auto db = Db({{"metal door", Flat(0.5)}});
  Warnings warnings;
  const auto out = AssignMaterials(mesh, db, AssignOptions{}, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  for (double ab : out.absorption) EXPECT_DOUBLE_EQ(ab, 0.1);
}

TEST(AssignMaterials, TwoLabelsTwoValues) {
  // Shoebox labels are floor, ceiling, wall; fold ceiling into wall.
  auto mesh = Shoebox({4, 3, 2.5});
  const auto ceiling = mesh.InternLabel("ceiling");
  const auto wall = mesh.InternLabel("wall");
  for (auto& l : mesh.vertex_labels) {
    if (l == ceiling) l = wall;
  }
  const auto db = Db({{"floor", {.1, .1, .1, .1, .3, .1, .1, .1}},
                      {"wall", {.2, .2, .2, .5, .7, .2, .2, .2}},
                      {"ceiling", Flat(0.9)}});
  AssignOptions opt;
  opt.seed = 5;
  const auto out = AssignMaterials(mesh, db, opt);
  std::set<double> ab(out.absorption.begin(), out.absorption.end());
  std::set<double> sc(out.scattering.begin(), out.scattering.end());
  ASSERT_EQ(ab.size(), 2u);
  EXPECT_EQ(sc.size(), 1u);
  std::set<double> expected;
  for (const auto* name : {"floor", "wall"}) {
    expected.insert(BandAverage(MatchLabel(name, db, MatchStrategy::kExact)->absorption, BandAverageMode::kMid));
  }
  EXPECT_EQ(ab, expected);
}

TEST(AssignMaterials, FeaturesStayInUnitInterval) {
  const auto mesh = GridBox({5, 4, 3}, {3, 3, 2});
  const auto db = Db({{"floor", Flat(1.0)}, {"wall", Flat(0.0)}, {"ceiling", Flat(0.5)}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    AssignOptions opt;
    opt.seed = seed;
    opt.prior.mean = 0.9;
    opt.prior.stddev = 0.5;
    opt.mode = seed % 2 ? BandAverageMode::kFull : BandAverageMode::kMid;
    const auto out = AssignMaterials(mesh, db, opt);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      EXPECT_GE(out.absorption[v], 0.0);
      EXPECT_LE(out.absorption[v], 1.0);
      EXPECT_GE(out.scattering[v], 0.0);
      EXPECT_LE(out.scattering[v], 1.0);
      EXPECT_EQ(out.scattering[v], out.scene_scattering);
    }
  }
}

TEST(MaterialMesh, PlyRoundTrip) {
  TempDir dir;
  const auto mesh = Shoebox({3, 3, 3});
  const auto db = Db({{"floor", Flat(0.3)}, {"wall", Flat(0.2)}, {"ceiling", Flat(0.6)}});
  const auto out = AssignMaterials(mesh, db, AssignOptions{});
  WriteMaterialMesh(out, dir.file("m.ply"), dir.file("m.labels.json"));
  const auto back = ReadMaterialMesh(dir.file("m.ply"), dir.file("m.labels.json"));
  ASSERT_EQ(back.vertices.size(), out.vertices.size());
  EXPECT_EQ(back.label_names, out.label_names);
  EXPECT_DOUBLE_EQ(back.scene_scattering, out.scene_scattering);
  for (std::size_t v = 0; v < out.vertices.size(); ++v) {
    EXPECT_NEAR(back.absorption[v], out.absorption[v], 1e-9);
  }
  for (std::size_t f = 0; f < out.faces.size(); ++f) {
    EXPECT_EQ(back.face_labels[f], out.face_labels[f]);
    EXPECT_NEAR(back.band_absorption[f][0], out.band_absorption[f][0], 1e-9);
  }
}

}  // namespace
}  // namespace binscene::materials

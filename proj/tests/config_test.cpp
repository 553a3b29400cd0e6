/*
 * Copyright 2026 The ejlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "ejlab/config.hpp"
#include "ejlab/plot.hpp"

using namespace ejlab;

TEST(Config, DefaultsResolve) {
  const auto c = parse_config_text("{}");
  EXPECT_FALSE(c.seed.has_value());
  EXPECT_EQ(c.alpha, (EisensteinInt{3, 4}));
  EXPECT_EQ(c.trials, 20);
  EXPECT_EQ(c.training.gamma, 0.95);
  EXPECT_EQ(c.training.gae_lambda, 0.92);
  EXPECT_EQ(c.traffic.buffer, 8);
  EXPECT_THROW(c.require_seed(), ConfigError);
}

TEST(Config, OverridesApply) {
  const auto c = parse_config_text(R"({
    "seed": 42,
    "topology": {"a": 5, "b": 6},
    "faults": {"model": "clustered", "counts": [0, 9], "trials": 3},
    "engine": {"engines": ["greedy", "dijkstra"], "greedy_metric": "raw_euclidean"},
    "training": {"episodes_per_density": 10, "family": [[2, 3]], "fault_models": ["uniform"]},
    "traffic": {"loads": [0.1], "fault_count": 2}
  })");
  EXPECT_EQ(*c.seed, 42u);
  EXPECT_EQ(c.alpha, (EisensteinInt{5, 6}));
  EXPECT_EQ(c.fault_model, FaultModel::clustered);
  EXPECT_EQ(c.fault_counts, (std::vector<int>{0, 9}));
  EXPECT_EQ(c.engines.size(), 2u);
  EXPECT_EQ(c.greedy_metric, GreedyMetric::raw_euclidean);
  EXPECT_EQ(c.training.family, (std::vector<EisensteinInt>{{2, 3}}));
  EXPECT_EQ(c.traffic.loads, (std::vector<double>{0.1}));
  EXPECT_EQ(c.traffic_fault_count, 2);
}

TEST(Config, UnknownKeysAreNamed) {
  try {
    parse_config_text(R"({"training": {"gama": 0.9}})");
    FAIL() << "accepted an unknown key";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("training.gama"), std::string::npos);
  }
  try {
    parse_config_text(R"({"sed": 1})");
    FAIL() << "accepted an unknown key";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'sed'"), std::string::npos);
  }
}

TEST(Config, BadValuesAreRejected) {
  EXPECT_THROW(parse_config_text(R"({"seed": -1})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"faults": {"trials": "many"}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"faults": {"model": "random"}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"training": {"gamma": 2}})"), ParameterError);
  EXPECT_THROW(parse_config_text(R"({"topology": {"a": 4, "b": 3}})"), ConfigError);
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"traffic": []})"), ConfigError);
}

TEST(Config, CanonicalFormRoundTripsAndHashIsStable) {
  auto c = parse_config_text(R"({"seed": 7, "faults": {"counts": [1, 2]}})");
  const auto text = canonical_config(c);
  const auto again = parse_config_text(text);
  EXPECT_EQ(canonical_config(again), text);
  EXPECT_EQ(manifest_hash(again), manifest_hash(c));
  c.trials = 21;
  EXPECT_NE(manifest_hash(c), manifest_hash(again));
  // key order in the input does not matter
  EXPECT_EQ(manifest_hash(parse_config_text(R"({"faults": {"counts": [1, 2]}, "seed": 7})")), manifest_hash(again));
}

TEST(Config, GitBlobHash) {
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Config, DerivedSeedsDiffer) {
  const auto c = parse_config_text(R"({"seed": 7})");
  EXPECT_NE(c.reachability().seed, c.traffic_config().seed);
  EXPECT_NE(c.train_config().seed, c.traffic_faults().seed);
}

TEST(Plot, ChartsCarryManifestAndLabels) {
  std::istringstream csv(
      "# manifest=abc123\n"
      "engine,alpha_a,alpha_b,fault_model,fault_count,trial,pairs,pdr,err,avg_distance\n"
      "greedy,5,6,uniform,0,0,10,1,1,2.5\n"
      "greedy,5,6,uniform,1,0,10,0.5,0.5,11\n"
      "greedy,5,6,uniform,1,1,10,0.7,0.7,9\n"
      "dijkstra,5,6,uniform,0,0,10,1,1,2.5\n");
  const auto table = read_csv(csv);
  EXPECT_EQ(table.manifest, "abc123");
  const auto series = aggregate(table, "engine", "fault_count", "pdr");
  EXPECT_DOUBLE_EQ(series.at("greedy")[1].second, 0.6);
  const auto charts = charts_for(table);
  ASSERT_EQ(charts.size(), 3u);
  for (const auto& [stem, chart] : charts) {
    const auto svg = render_svg(chart);
    EXPECT_NE(svg.find("<metadata>manifest=abc123</metadata>"), std::string::npos);
    EXPECT_NE(svg.find("Number of Faulty Nodes"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
  }
  EXPECT_NE(render_svg(charts[1].second).find("Packet Delivery Ratio"), std::string::npos);
}

TEST(Plot, MalformedCsvRejected) {
  std::istringstream empty("# manifest=x\n");
  EXPECT_THROW(read_csv(empty), FormatError);
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(read_csv(ragged), FormatError);
}

// Copyright 2026 the kmv authors
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

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "kmv/experiment.hpp"
#include "kmv/repro.hpp"

using namespace kmv;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kTorusConfig = R"(
[system]
name = torus
grid = 16
mode_pairs = 2
[sampling]
dt = 0.02
steps = 120
seed = 5
[method]
name = exact
rank = 4
[outputs]
dir = OUTDIR
)";

}  // namespace

TEST_CASE("config parsing validates keys before compute", "[cli]") {
  REQUIRE_THROWS_AS(parse_config("[system]\nname = warp-drive\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("[systems]\nname = lorenz\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("[system]\nflux = 3\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("[method]\nname = nonsense\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("name = lorenz\n"), ConfigError);   // key outside section
  REQUIRE_THROWS_AS(parse_config("[sampling]\ndt = abc\n"), ConfigError);

  ExperimentConfig cfg = parse_config("[system]\nname = rossler\n[method]\nname = fb\nrank = 7\n");
  REQUIRE(cfg.system == "rossler");
  REQUIRE(cfg.method == "fb");
  REQUIRE(cfg.rank == 7);
}

TEST_CASE("run is deterministic and the manifest lists every artifact", "[cli]") {
  const auto dir = std::filesystem::temp_directory_path() / "kmv_cli_run";
  std::filesystem::remove_all(dir);
  std::string text = kTorusConfig;
  text.replace(text.find("OUTDIR"), 6, (dir / "a").string());
  ExperimentConfig cfg = parse_config(text);
  Manifest first = run(cfg, text);
  REQUIRE(first.artifacts.size() == 1);
  REQUIRE(first.artifacts[0].first == "eigs.csv");
  const std::string bytes_a = read_file(dir / "a" / "eigs.csv");

  // rerun into a second directory: artifacts byte-identical, hashes equal
  std::string text_b = kTorusConfig;
  text_b.replace(text_b.find("OUTDIR"), 6, (dir / "b").string());
  Manifest second = run(parse_config(text_b), text_b);
  REQUIRE(read_file(dir / "b" / "eigs.csv") == bytes_a);
  REQUIRE(second.artifacts[0].second == first.artifacts[0].second);

  // the eigenvalue CSV has the documented column layout
  REQUIRE(bytes_a.rfind("re,im,abs,log_re,log_im\n", 0) == 0);

  // manifest file exists and lists the artifact with its hash
  const std::string manifest = read_file(dir / "a" / "manifest.txt");
  REQUIRE(manifest.find("artifact: eigs.csv " + first.artifacts[0].second) != std::string::npos);
}

TEST_CASE("pipeline failures remove partial artifacts", "[cli]") {
  const auto dir = std::filesystem::temp_directory_path() / "kmv_cli_fail";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg;
  cfg.system = "lorenz";
  cfg.dt = 0.01;
  cfg.steps = 50;
  cfg.method = "exact";
  cfg.rank = 40;  // impossible: rank > min(d, M)
  cfg.out_dir = (dir / "x").string();
  REQUIRE_THROWS_AS(run(cfg), NumericalError);
  REQUIRE(!std::filesystem::exists(dir / "x" / "eigs.csv"));
}

TEST_CASE("torus exact run emits the expected eigenvalue rows", "[cli]") {
  // generator ground truth: 2 mode pairs -> 4 eigenvalue rows at rank 4
  const auto dir = std::filesystem::temp_directory_path() / "kmv_cli_torus";
  std::filesystem::remove_all(dir);
  std::string text = kTorusConfig;
  text.replace(text.find("OUTDIR"), 6, (dir / "t").string());
  run(parse_config(text), text);
  std::ifstream is(dir / "t" / "eigs.csv");
  std::string line;
  int rows = -1;  // header
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  REQUIRE(rows == 4);
}

TEST_CASE("repro names are exposed", "[cli]") {
  REQUIRE(repro_names().size() == 8);
  REQUIRE_THROWS_AS(run_repro("not-an-experiment", "/tmp/kmv_nowhere"), ConfigError);
}

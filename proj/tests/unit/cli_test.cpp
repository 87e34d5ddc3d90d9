// Copyright 2026 The scpa-host Authors. All Rights Reserved.
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

#include <doctest.h>

#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cli.hpp"
#include "test_support.hpp"

using namespace scpa;
using testing::TempDir;

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const std::vector<testing::BindingSpec> kBinding{{"business", "business.sales.compute", "h"}};

fs::path bundle(const fs::path& root, const std::string& name, const std::string& version) {
  return testing::write_ref_bundle(root, name, version, 100, kBinding,
                                   "rule h append k " + version + " => continue\n");
}

std::string data(const char* name) { return (fs::path(SCPA_DATA_DIR) / name).string(); }

// Every path under `root` with its contents, for before/after comparison.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    out[e.path().lexically_relative(root).string()] =
        e.is_regular_file() ? testing::read_file(e.path()) : "<dir>";
  }
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  TempDir drop;
  const std::string d = drop.path().string();
  for (const std::vector<std::string>& args : std::vector<std::vector<std::string>>{
           {},
           {"bogus"},
           {"list"},
           {"list", "--drop-dir"},
           {"list", "--drop-dir", d, "--format", "xml"},
           {"deploy", "--drop-dir", d},
           {"disable", "--drop-dir", d},
           {"rollback"},
           {"impact", "--graph", data("fig1.graph")},
           {"paper-metrics", "--baseline", data("table1.csv")},
           {"run"},
           {"run", "--drop-dir", d, "--max-runtime-ms", "soon"},
           {"list", "--drop-dir", d, "--frobnicate"},
       }) {
    CAPTURE(fmt::format("{}", fmt::join(args, " ")));
    const Result r = invoke(args);
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.out.empty());
    CHECK_FALSE(r.err.empty());
  }
  const Result help = invoke({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("deploy") != std::string::npos);
}

TEST_CASE("random argument soup never crashes and usage errors touch nothing") {
  TempDir drop, src;
  bundle(drop.path(), "u", "1.0.0");
  bundle(drop.path(), "u", "1.1.0");
  const fs::path b = bundle(src.path(), "v", "2.0.0");
  // `run` is left out: with valid arguments it serves until stopped.
  const std::vector<std::string> pool{
      "list",   "status", "deploy", "disable",   "enable", "rollback", "unpin", "impact",
      "--drop-dir", drop.path().string(), "--format", "csv", "text", "u", "v", b.string(),
      "--graph", data("fig1.graph"), "--changed", "sales-data", "-x", "--", "", "=",
      "paper-metrics", "--baseline", "--treatment", data("table1.csv")};
  std::mt19937_64 rng(1234);
  int usage = 0;
  for (int round = 0; round < 400; ++round) {
    std::vector<std::string> args;
    for (std::size_t i = 0, n = rng() % 6; i < n; ++i) args.push_back(pool[rng() % pool.size()]);
    const auto before = tree(drop.path());
    const Result r = invoke(args);
    CAPTURE(fmt::format("{}", fmt::join(args, " ")));
    CHECK((r.code == cli::kExitOk || r.code == cli::kExitError || r.code == cli::kExitUsage));
    if (r.code == cli::kExitUsage) {
      ++usage;
      CHECK(tree(drop.path()) == before);
    }
    if (r.code == cli::kExitError) CHECK(r.err.rfind("error: ", 0) == 0);
  }
  CHECK(usage > 100);
}

TEST_CASE("list on an empty drop folder prints only the header") {
  TempDir drop;
  const Result r = invoke({"list", "--drop-dir", drop.path().string()});
  CHECK(r.code == 0);
  CHECK(r.out == "unit  version  active  pinned  status  detail\n");
  CHECK(invoke({"status", "--drop-dir", drop.path().string(), "--format", "csv"}).out ==
        "unit,version,active,pinned,status,detail\n");
  CHECK(invoke({"list", "--drop-dir", (drop / "missing").string()}).code == cli::kExitError);
}

TEST_CASE("deploy, list, disable, enable, rollback, unpin") {
  TempDir drop, src;
  const std::string d = drop.path().string();
  const fs::path b1 = bundle(src.path(), "u", "1.0.0");
  const fs::path b2 = bundle(src.path(), "u", "1.0.1");

  CHECK(invoke({"deploy", b1.string(), "--drop-dir", d}).out == "deployed u@1.0.0\n");
  CHECK(invoke({"deploy", b1.string(), "--drop-dir", d}).out ==
        "unchanged u@1.0.0 (identical bundle, no-op)\n");
  CHECK(invoke({"deploy", b2.string(), "--drop-dir", d}).out == "deployed u@1.0.1\n");

  CHECK(lines(invoke({"list", "--drop-dir", d, "--format", "csv"}).out) ==
        std::vector<std::string>{"unit,version,active,pinned,status,detail",
                                 "u,1.0.0,no,no,ok,", "u,1.0.1,yes,no,ok,"});

  CHECK(invoke({"disable", "u", "--drop-dir", d}).out == "disabled u\n");
  CHECK(invoke({"disable", "u", "--drop-dir", d}).out == "disabled u (already)\n");
  CHECK(lines(invoke({"list", "--drop-dir", d, "--format", "csv"}).out)[2] == "u,1.0.1,no,no,disabled,");
  CHECK(invoke({"enable", "u", "--drop-dir", d}).out == "enabled u\n");
  CHECK(invoke({"enable", "u", "--drop-dir", d}).out == "enabled u (already)\n");

  CHECK(invoke({"rollback", "u", "--drop-dir", d}).out == "pinned u@1.0.0\n");
  CHECK(lines(invoke({"list", "--drop-dir", d, "--format", "csv"}).out)[1] == "u,1.0.0,yes,yes,ok,");
  const Result again = invoke({"rollback", "u", "--drop-dir", d});
  CHECK(again.code == cli::kExitError);
  CHECK(again.err.find("NoPriorVersion") != std::string::npos);
  CHECK(invoke({"unpin", "u", "--drop-dir", d}).out == "unpinned u\n");
  CHECK(invoke({"unpin", "u", "--drop-dir", d}).out == "unpinned u (no pin)\n");

  CHECK(invoke({"disable", "ghost", "--drop-dir", d}).code == cli::kExitError);
  CHECK(invoke({"deploy", (src / "nothing").string(), "--drop-dir", d}).code == cli::kExitError);
}

TEST_CASE("list reports rejected bundles and dangling pins") {
  TempDir drop;
  const fs::path b = bundle(drop.path(), "u", "1.0.0");
  testing::write_file(b / "payload.ref", "tampered");
  bundle(drop.path(), "w", "1.0.0");
  testing::write_file(drop / "w" / "pin", "pin: 9.9.9\n");
  const auto rows = lines(invoke({"list", "--drop-dir", drop.path().string(), "--format", "csv"}).out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].rfind("u,1.0.0,no,-,ChecksumMismatch,", 0) == 0);
  CHECK(rows[2] == "w,1.0.0,no,no,ok,");
  CHECK(rows[3].rfind("w,-,no,-,PinMissing,", 0) == 0);
}

TEST_CASE("impact") {
  const Result r = invoke({"impact", "--graph", data("fig1.graph"), "--changed", "sales-data"});
  CHECK(r.code == 0);
  CHECK(r.out ==
        "changed component: sales-data\n"
        "layered rebuild closure (4): product-business product-ui sales-business sales-data\n"
        "scpa rebuild closure (1): sales-data\n"
        "closure size 4 vs 1: 75.00% fewer components to rebuild\n");
  CHECK(invoke({"impact", "--graph", data("fig1.graph"), "--changed", "sales-data", "--format", "csv"})
            .out ==
        "changed,layered_size,scpa_size,reduction_percent,layered_closure\n"
        "sales-data,4,1,75.00,product-business;product-ui;sales-business;sales-data\n");
  const Result unknown = invoke({"impact", "--graph", data("fig1.graph"), "--changed", "nope"});
  CHECK(unknown.code == cli::kExitError);
}

TEST_CASE("paper-metrics") {
  const Result r = invoke({"paper-metrics", "--baseline", data("table1.csv"), "--treatment",
                        data("table2.csv")});
  CHECK(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() == 9);
  CHECK(out[0].rfind("metric", 0) == 0);
  CHECK(out[1].find("-85.71%") != std::string::npos);
  CHECK(out[2].find("-42.99%") != std::string::npos);
  CHECK(out[6].find("+22.58%") != std::string::npos);
  CHECK(out[7].rfind("means over 5 projects", 0) == 0);
  CHECK(out[8] ==
        "note: post_release_defects is published as -85.54%; the table means give -85.71% "
        "(0.17 points apart)");

  const Result csv = invoke({"paper-metrics", "--baseline", data("table1.csv"), "--treatment",
                          data("table2.csv"), "--format", "csv"});
  CHECK(lines(csv.out).size() == 7);
  CHECK(lines(csv.out)[2] == "release_time,15.7860,9.0000,-42.99%,-42.99%");

  TempDir dir;
  testing::write_file(dir / "bad.csv", "project,defects\nP1,1\n");
  const Result bad = invoke({"paper-metrics", "--baseline", (dir / "bad.csv").string(),
                          "--treatment", data("table2.csv")});
  CHECK(bad.code == cli::kExitError);
  CHECK(bad.err.rfind("error: BadRow", 0) == 0);
}

TEST_CASE("run serves until the deadline and reports its epoch") {
  TempDir drop;
  bundle(drop.path(), "u", "1.0.0");
  const Result r = invoke({"run", "--drop-dir", drop.path().string(), "--max-runtime-ms", "100",
                        "--diagnostics", "none"});
  CHECK(r.code == 0);
  CHECK(r.out.find("at epoch 1") != std::string::npos);
  CHECK(r.out.find("scpa-host stopped") != std::string::npos);

  const Result missing =
      invoke({"run", "--drop-dir", (drop / "missing").string(), "--max-runtime-ms", "50"});
  CHECK(missing.code == cli::kExitError);
  CHECK(missing.err.find("DropDirUnreadable") != std::string::npos);

  testing::write_file(drop / "host.conf", "drop_dir: .\nscan_interval_ms: 20\ndiagnostics: none\n");
  const Result conf =
      invoke({"run", "--config", (drop / "host.conf").string(), "--max-runtime-ms", "60"});
  CHECK(conf.code == 0);
}

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

#include <cmath>
#include <cstdio>
#include <sstream>

#include <fmt/format.h>

#include "cli.hpp"
#include "legacy_app.hpp"
#include "scpa/host.hpp"
#include "test_support.hpp"

using namespace scpa;
using testing::TempDir;

namespace fs = std::filesystem;

namespace {

const fs::path kBundles = SCPA_BUNDLE_ROOT;
const fs::path kFixtures = SCPA_DEMO_FIXTURES;
const fs::path kGolden = SCPA_DEMO_GOLDEN;

std::string golden(const char* name) { return testing::read_file(kGolden / name); }

int cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  if (code != 0) MESSAGE(err.str());
  return code;
}

void deploy(const fs::path& drop, const std::string& name, const std::string& version) {
  REQUIRE(cli_run({"deploy", (kBundles / name / version).string(), "--drop-dir", drop.string()}) == 0);
}

// A host over `drop` and the app wired to it, as scpa-demo does.
struct Stack {
  std::unique_ptr<Host> host;
  std::unique_ptr<demo::LegacyApp> app;

  Stack(const fs::path& drop, const fs::path& fixtures = kFixtures) {
    HostConfig config;
    config.drop_dir = drop;
    config.default_policy = ErrorPolicy::kFailOpen;
    config.diagnostics = "none";
    config.watch = false;
    host = Host::start(config);
    app = std::make_unique<demo::LegacyApp>(
        fixtures, [h = host.get()](std::string_view point, ValueMap payload) {
          return h->dispatch(point, std::move(payload));
        });
  }
  std::string render() const { return app->render_product_listing(); }
};

std::string run_demo_exe(const fs::path& drop) {
  TempDir out;
  const std::string cmd = fmt::format("'{}' --fixtures '{}' --drop-dir '{}' > '{}'", SCPA_DEMO_EXE,
                                      kFixtures.string(), drop.string(), (out / "out").string());
  REQUIRE(std::system(cmd.c_str()) == 0);
  return testing::read_file(out / "out");
}

}  // namespace

TEST_CASE("fixture loading") {
  const auto products = demo::load_products(kFixtures / "products.csv");
  REQUIRE(products.size() == 3);
  CHECK(products[1].id == "p2");
  CHECK(products[1].price == doctest::Approx(12.499));
  CHECK(products[1].price_text == "12.499");
  CHECK(demo::load_sales(kFixtures / "sales.csv", products).size() == 4);

  TempDir dir;
  const auto bad_products = [&](const std::string& body) {
    testing::write_file(dir / "p.csv", "id,name,price\n" + body);
    return demo::load_products(dir / "p.csv");
  };
  CHECK(bad_products("").empty());
  for (const char* body : {"p1,widget\n", "p1,widget,-1\n", "p1,widget,cheap\n",
                           "p1,a,1\np1,b,2\n", ",a,1\n"}) {
    CAPTURE(body);
    CHECK_THROWS_AS(bad_products(body), std::runtime_error);
  }
  testing::write_file(dir / "p.csv", "sku,name,price\n");
  CHECK_THROWS_AS(demo::load_products(dir / "p.csv"), std::runtime_error);
  CHECK_THROWS_AS(demo::load_products(dir / "none.csv"), std::runtime_error);

  const auto bad_sales = [&](const std::string& body) {
    testing::write_file(dir / "s.csv", "product_id,quantity,date\n" + body);
    return demo::load_sales(dir / "s.csv", products);
  };
  CHECK(bad_sales("p3,0,2024-02-29\n").size() == 1);
  for (const char* body : {"p9,1,2024-01-01\n", "p1,-1,2024-01-01\n", "p1,1.5,2024-01-01\n",
                           "p1,1,01/02/2024\n", "p1,1,2024-13-01\n", "p1,1\n"}) {
    CAPTURE(body);
    CHECK_THROWS_AS(bad_sales(body), std::runtime_error);
  }
}

TEST_CASE("render_table") {
  CHECK(demo::render_table({{"a", "bb"}, {{"xxx", "y"}, {"z", ""}}}) == "a    bb\nxxx  y\nz\n");
}

TEST_CASE("the golden totals match hand arithmetic over the fixtures") {
  // Oracle: parse the fixtures with sscanf and sum quantity * price.
  std::map<std::string, double> price, total;
  std::istringstream products(testing::read_file(kFixtures / "products.csv"));
  std::string line;
  std::getline(products, line);
  while (std::getline(products, line)) {
    char id[16], name[32];
    double p = 0;
    REQUIRE(std::sscanf(line.c_str(), "%15[^,],%31[^,],%lf", id, name, &p) == 3);
    price[id] = p;
    total[id] = 0;
  }
  std::istringstream sales(testing::read_file(kFixtures / "sales.csv"));
  std::getline(sales, line);
  while (std::getline(sales, line)) {
    char id[16];
    int qty = 0;
    REQUIRE(std::sscanf(line.c_str(), "%15[^,],%d", id, &qty) == 2);
    total[id] += qty * price.at(id);
  }
  CHECK(total["p1"] == doctest::Approx(50.0));
  CHECK(total["p2"] == doctest::Approx(49.996));
  CHECK(total["p3"] == 0.0);

  const auto column = [](const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    std::getline(in, l);
    while (std::getline(in, l)) out.push_back(l.substr(l.rfind(' ') + 1));
    return out;
  };
  const auto cents = [](double v, bool round) {
    return fmt::format("{:.2f}", (round ? std::floor(v * 100 + 0.5) : std::floor(v * 100)) / 100);
  };
  CHECK(column(golden("sales.txt")) ==
        std::vector<std::string>{fmt::format("{:.2f}", total["p1"]),
                                 fmt::format("{:.2f}", total["p2"]),
                                 fmt::format("{:.2f}", total["p3"])});
  CHECK(column(golden("sales_fix_1.0.0.txt")) ==
        std::vector<std::string>{cents(total["p1"], false), cents(total["p2"], false),
                                 cents(total["p3"], false)});
  CHECK(column(golden("sales_fix_1.0.1.txt")) ==
        std::vector<std::string>{cents(total["p1"], true), cents(total["p2"], true),
                                 cents(total["p3"], true)});
  CHECK(golden("baseline.txt").find("total_sales") == std::string::npos);
}

TEST_CASE("baseline without a host and without units") {
  CHECK(demo::LegacyApp(kFixtures).render_product_listing() == golden("baseline.txt"));
  TempDir drop;
  CHECK(Stack(drop.path()).render() == golden("baseline.txt"));
}

TEST_CASE("each drop-folder state reproduces its golden file") {
  TempDir drop;
  deploy(drop.path(), "sales-by-product", "1.0.0");
  CHECK(Stack(drop.path()).render() == golden("sales.txt"));
  CHECK(run_demo_exe(drop.path()) == golden("sales.txt"));

  deploy(drop.path(), "price-rounding-fix", "1.0.0");
  CHECK(Stack(drop.path()).render() == golden("sales_fix_1.0.0.txt"));

  deploy(drop.path(), "price-rounding-fix", "1.0.1");
  CHECK(Stack(drop.path()).render() == golden("sales_fix_1.0.1.txt"));
  CHECK(run_demo_exe(drop.path()) == golden("sales_fix_1.0.1.txt"));

  REQUIRE(cli_run({"rollback", "price-rounding-fix", "--drop-dir", drop.path().string()}) == 0);
  CHECK(Stack(drop.path()).render() == golden("sales_fix_1.0.0.txt"));
  CHECK(run_demo_exe(drop.path()) == golden("sales_fix_1.0.0.txt"));

  REQUIRE(cli_run({"disable", "price-rounding-fix", "--drop-dir", drop.path().string()}) == 0);
  REQUIRE(cli_run({"disable", "sales-by-product", "--drop-dir", drop.path().string()}) == 0);
  CHECK(run_demo_exe(drop.path()) == golden("baseline.txt"));

  // Removing the units entirely is the same as disabling them.
  fs::remove_all(drop / "sales-by-product");
  fs::remove_all(drop / "price-rounding-fix");
  CHECK(run_demo_exe(drop.path()) == golden("baseline.txt"));
}

TEST_CASE("a running host follows deploy, fix, rollback and disable") {
  TempDir drop;
  Stack stack(drop.path());
  const auto tick_and_render = [&] {
    stack.host->hot_swap_cycle();
    return stack.render();
  };
  CHECK(stack.render() == golden("baseline.txt"));
  deploy(drop.path(), "sales-by-product", "1.0.0");
  deploy(drop.path(), "price-rounding-fix", "1.0.0");
  CHECK(tick_and_render() == golden("sales_fix_1.0.0.txt"));
  deploy(drop.path(), "price-rounding-fix", "1.0.1");
  CHECK(tick_and_render() == golden("sales_fix_1.0.1.txt"));
  REQUIRE(cli_run({"rollback", "price-rounding-fix", "--drop-dir", drop.path().string()}) == 0);
  CHECK(tick_and_render() == golden("sales_fix_1.0.0.txt"));
  REQUIRE(cli_run({"disable", "price-rounding-fix", "--drop-dir", drop.path().string()}) == 0);
  CHECK(tick_and_render() == golden("sales.txt"));
  REQUIRE(cli_run({"disable", "sales-by-product", "--drop-dir", drop.path().string()}) == 0);
  CHECK(tick_and_render() == golden("baseline.txt"));
  REQUIRE(cli_run({"enable", "sales-by-product", "--drop-dir", drop.path().string()}) == 0);
  CHECK(tick_and_render() == golden("sales.txt"));
}

TEST_CASE("a missing sales fixture leaves the baseline listing intact under FailOpen") {
  TempDir drop, fixtures;
  fs::copy_file(kFixtures / "products.csv", fixtures / "products.csv");
  deploy(drop.path(), "sales-by-product", "1.0.0");
  deploy(drop.path(), "price-rounding-fix", "1.0.1");
  Stack stack(drop.path(), fixtures.path());
  CHECK(stack.render() == golden("baseline.txt"));

  // The failure is attributed to the unit that read the data.
  const Envelope env = stack.host->dispatch_envelope(
      demo::kReadPoint, ValueMap{{"fixture_dir", fixtures.path().string()}}, ErrorPolicy::kFailOpen);
  REQUIRE(env.trace.size() == 1);
  CHECK(env.trace[0].unit == "sales-by-product");
  CHECK(env.trace[0].outcome == Outcome::kError);
  CHECK_THROWS_AS(stack.host->dispatch(demo::kReadPoint,
                                       ValueMap{{"fixture_dir", fixtures.path().string()}},
                                       ErrorPolicy::kFailClosed),
                  ChainError);
}

TEST_CASE("rounding fix keeps zero at zero and leaves unknown payloads alone") {
  for (const char* version : {"1.0.0", "1.0.1"}) {
    TempDir drop;
    deploy(drop.path(), "price-rounding-fix", version);
    Stack stack(drop.path());
    const ValueMap out =
        stack.host->dispatch(demo::kComputePoint, ValueMap{{"totals", ValueMap{{"p", 0.0}}}});
    CHECK(out.at("totals").as_map().at("p").as_number() == 0.0);
    CHECK(stack.host->dispatch(demo::kComputePoint, ValueMap{{"other", 1}}).find("totals") == nullptr);
  }
}

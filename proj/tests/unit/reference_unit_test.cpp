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

#include "scpa/chain.hpp"
#include "scpa/reference_unit.hpp"
#include "test_support.hpp"

using namespace scpa;
using Call = CallLog::Call;

TEST_CASE("append then continue") {
  auto unit = make_reference_unit(ReferenceSpec{}.on("h", {RefAction::Append("k", "a")}));
  CHECK(unit->load({}).ok);
  auto env = testing::make_envelope("x.y", ValueMap{{"k", ""}});
  const Envelope out = unit->execute("h", env);
  CHECK(out.payload.at("k").as_text() == "a");
  CHECK(unit->next("h", out) == ChainDirective::Continue());
}

TEST_CASE("fail leaves the input untouched") {
  auto unit = make_reference_unit(
      ReferenceSpec{}.on("h", {RefAction::Append("k", "a"), RefAction::Fail("m")}));
  unit->load({});
  const auto env = testing::make_envelope("x.y", ValueMap{{"k", ""}});
  const Envelope before = env;
  try {
    (void)unit->execute("h", env);
    FAIL("no error");
  } catch (const UnitError& e) {
    CHECK(std::string(e.what()) == "m");
  }
  CHECK(env.payload == before.payload);
}

TEST_CASE("set then stop keeps the second unit from running") {
  auto first = testing::make_manifest("first", "1.0.0", 1, {{"business", "x.y", "h"}});
  auto second = testing::make_manifest("second", "1.0.0", 2, {{"business", "x.y", "h"}});
  testing::SpecLoader specs;
  specs.add("first", "1.0.0", ReferenceSpec{}.on("h", {RefAction::Set("k", 1)}, ChainDirective::Stop()));
  specs.add("second", "1.0.0", ReferenceSpec{}.on("h", {RefAction::Set("k", 2)}));
  Registry registry(specs.loader());
  registry.activate(testing::make_deployment(first));
  registry.activate(testing::make_deployment(second));
  const Envelope out = run_chain(*registry.snapshot(), "x.y", testing::make_envelope("x.y"));
  CHECK(out.payload.at("k").as_integer() == 1);
  REQUIRE(out.trace.size() == 1);
  CHECK(out.trace[0].unit == "first");
  CHECK(specs.logs("second@1.0.0")[0]->entries().size() == 1);  // load only
}

TEST_CASE("handler selectors win over extension point selectors; unmatched calls pass through") {
  auto unit = make_reference_unit(ReferenceSpec{}
                                      .on("a.b", {RefAction::Append("k", "ep")})
                                      .on("h", {RefAction::Append("k", "handler")}));
  unit->load({});
  CHECK(unit->execute("h", testing::make_envelope("a.b")).payload.at("k").as_text() == "handler");
  CHECK(unit->execute("other", testing::make_envelope("a.b")).payload.at("k").as_text() == "ep");
  CHECK(unit->execute("other", testing::make_envelope("c.d")).payload.empty());
}

TEST_CASE("the text table format") {
  const ReferenceSpec spec = parse_reference_spec(
      "# behaviour table\n"
      "rule render append out r ; push seen render => continue\n"
      "rule data.read set n 42 => stop\n"
      "rule compute pass => divert later-unit\n"
      "rule broken fail disk is on fire => continue\n"
      "rule slow sleep 5 => continue\n");
  REQUIRE(spec.rules.size() == 5);
  CHECK(spec.rules[0].actions.size() == 2);
  CHECK(spec.rules[1].directive == ChainDirective::Stop());
  CHECK(spec.rules[1].actions[0].value == Value(std::int64_t{42}));
  CHECK(spec.rules[2].actions.empty());
  CHECK(spec.rules[2].directive == ChainDirective::Divert("later-unit"));
  CHECK(spec.rules[3].actions[0].message == "disk is on fire");
  CHECK(spec.rules[4].actions[0].delay == std::chrono::milliseconds(5));

  CHECK(parse_reference_spec("load fail no licence\n").load_failure == "no licence");
  for (const char* bad : {"rule x append k => continue", "rule x pass", "rule x pass => sideways",
                          "rule x jump => continue", "rule x sleep soon => continue",
                          "bogus line", "rule x pass => divert"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_reference_spec(bad), std::invalid_argument);
  }
}

TEST_CASE("load failures are reported, not thrown") {
  ReferenceSpec spec;
  spec.load_failure = "nope";
  auto unit = make_reference_unit(spec);
  const LoadReport r = unit->load({});
  CHECK_FALSE(r.ok);
  CHECK(r.message == "nope");
}

TEST_CASE("call log contract checker") {
  const auto check = [](std::vector<Call> calls) {
    CallLog log;
    for (Call c : calls) log.record(c, "h");
    return log.follows_contract();
  };
  CHECK(check({}));
  CHECK(check({Call::kLoad}));
  CHECK(check({Call::kLoad, Call::kExecute, Call::kExecuteEnd, Call::kNext}));
  CHECK(check({Call::kLoad, Call::kExecute, Call::kExecute, Call::kExecuteEnd, Call::kNext}));
  CHECK(check({Call::kLoad, Call::kExecute, Call::kExecuteEnd, Call::kNext, Call::kUnload}));
  CHECK_FALSE(check({Call::kExecute}));
  CHECK_FALSE(check({Call::kLoad, Call::kNext}));
  CHECK_FALSE(check({Call::kLoad, Call::kLoad}));
  CHECK_FALSE(check({Call::kLoad, Call::kExecute, Call::kNext}));
  CHECK_FALSE(check({Call::kLoad, Call::kUnload, Call::kExecute}));
}

TEST_CASE("host calls observed by a recording unit follow load (execute next)*") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 40; ++round) {
    testing::SpecLoader specs;
    ReferenceSpec spec;
    const bool fails = rng() % 3 == 0;
    spec.on("h", {fails && rng() % 2 ? RefAction::Fail("x") : RefAction::Append("k", "a")});
    specs.add("u", "1.0.0", spec);
    specs.add("v", "1.0.0", ReferenceSpec{}.on("h", {RefAction::Fail("always")}));
    Registry registry(specs.loader());
    registry.activate(testing::make_deployment(
        testing::make_manifest("u", "1.0.0", 5, {{"business", "x.y", "h"}, {"ui", "x.z", "h"}})));
    registry.activate(testing::make_deployment(
        testing::make_manifest("v", "1.0.0", 1, {{"business", "x.y", "h"}})));
    const int dispatches = static_cast<int>(rng() % 6);
    for (int i = 0; i < dispatches; ++i) {
      const std::string ep = rng() % 2 ? "x.y" : "x.z";
      try {
        run_chain(*registry.snapshot(), ep, testing::make_envelope(ep),
                  rng() % 2 ? ErrorPolicy::kFailOpen : ErrorPolicy::kFailClosed);
      } catch (const ChainError&) {
      }
    }
    if (rng() % 2) {
      registry.deactivate("u");
      registry.reap();
    }
    const auto logs = specs.logs("u@1.0.0");
    REQUIRE(logs.size() == 1);
    CHECK(logs[0]->follows_contract());
    CHECK(logs[0]->entries().front().call == Call::kLoad);
  }
}

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

// Rounds sales totals to whole cents, half-up: 49.996 becomes 50.00.

#include <cmath>

#include "scpa/unit.hpp"

namespace {

double to_cents(double value) { return std::floor(value * 100.0 + 0.5) / 100.0; }

class PriceRoundingFix final : public scpa::PipelineUnit {
 public:
  scpa::LoadReport load(const scpa::HostContext&) override { return scpa::LoadReport::Ok(); }

  scpa::Envelope execute(std::string_view, const scpa::Envelope& env) override {
    scpa::Envelope out = env;
    if (scpa::Value* totals = out.payload.find("totals")) {
      scpa::ValueMap rounded;
      for (const auto& [id, total] : totals->as_map()) rounded.set(id, to_cents(total.as_number()));
      *totals = std::move(rounded);
    }
    out.annotations.set("price-rounding-fix", SCPA_UNIT_VERSION);
    return out;
  }

  scpa::ChainDirective next(std::string_view, const scpa::Envelope&) override {
    return scpa::ChainDirective::Continue();
  }
};

}  // namespace

SCPA_EXPORT_UNIT(PriceRoundingFix)

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

// Sales totals per product. One unit carrying all three layers: it reads the
// sales file, sums quantity * price per product and adds the listing column.
// It shares no code with the app; everything arrives through the payload.

#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "scpa/unit.hpp"

namespace {

using scpa::Envelope;
using scpa::Value;
using scpa::ValueList;
using scpa::ValueMap;

std::string cell(const std::string& line, std::size_t& pos) {
  const auto comma = line.find(',', pos);
  std::string out = line.substr(pos, comma - pos);
  pos = comma == std::string::npos ? line.size() : comma + 1;
  while (!out.empty() && (out.back() == '\r' || out.back() == ' ')) out.pop_back();
  return out;
}

ValueList read_sales_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw scpa::UnitError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("product_id,quantity,date", 0) != 0) {
    throw scpa::UnitError(path + ": missing header");
  }
  ValueList sales;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::size_t pos = 0;
    std::string id = cell(line, pos);
    std::string qty = cell(line, pos);
    std::string date = cell(line, pos);
    std::int64_t quantity = 0;
    try {
      quantity = std::stoll(qty);
    } catch (const std::exception&) {
      throw scpa::UnitError(path + ": bad quantity `" + qty + "`");
    }
    sales.emplace_back(ValueMap{{"product_id", id}, {"quantity", quantity}, {"date", date}});
  }
  return sales;
}

class SalesByProduct final : public scpa::PipelineUnit {
 public:
  scpa::LoadReport load(const scpa::HostContext&) override { return scpa::LoadReport::Ok(); }

  Envelope execute(std::string_view handler, const Envelope& env) override {
    Envelope out = env;
    if (handler == "read_sales") {
      const Value* dir = env.payload.find("fixture_dir");
      if (dir == nullptr || !dir->is_text()) throw scpa::UnitError("payload lacks fixture_dir");
      out.payload.set("sales", read_sales_file(dir->as_text() + "/sales.csv"));
    } else if (handler == "compute_totals") {
      if (const Value* sales = env.payload.find("sales")) {
        out.payload.set("totals", totals(env.payload.at("products").as_list(), sales->as_list()));
      }
    } else if (handler == "render_column") {
      if (const Value* t = env.payload.find("totals")) add_column(out.payload, t->as_map());
    } else {
      throw scpa::UnitError("unknown handler " + std::string(handler));
    }
    return out;
  }

  scpa::ChainDirective next(std::string_view, const Envelope&) override {
    return scpa::ChainDirective::Continue();
  }

 private:
  static ValueMap totals(const ValueList& products, const ValueList& sales) {
    std::map<std::string, double> price;
    ValueMap out;
    for (const auto& p : products) {
      const auto& id = p.as_map().at("id").as_text();
      price[id] = p.as_map().at("price").as_number();
      out.set(id, 0.0);
    }
    for (const auto& s : sales) {
      const auto& id = s.as_map().at("product_id").as_text();
      auto it = price.find(id);
      if (it == price.end()) continue;
      const auto qty = static_cast<double>(s.as_map().at("quantity").as_integer());
      out.set(id, out.at(id).as_decimal() + qty * it->second);
    }
    return out;
  }

  static void add_column(ValueMap& view, const ValueMap& totals) {
    Value* columns = view.find("columns");
    Value* rows = view.find("rows");
    if (columns == nullptr || rows == nullptr) return;
    columns->as_list().emplace_back("total_sales");
    for (auto& row : rows->as_list()) {
      auto& cells = row.as_list();
      const Value* total = cells.empty() ? nullptr : totals.find(cells.front().as_text());
      char text[32];
      std::snprintf(text, sizeof text, "%.2f", total != nullptr ? total->as_number() : 0.0);
      cells.emplace_back(std::string(text));
    }
  }
};

}  // namespace

SCPA_EXPORT_UNIT(SalesByProduct)

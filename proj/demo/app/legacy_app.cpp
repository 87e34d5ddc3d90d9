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

#include "legacy_app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace fs = std::filesystem;

namespace demo {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string cell = line.substr(start, comma - start);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(std::move(cell));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Calls `row` for each non-blank data line after checking the header.
template <typename Fn>
void read_csv(const fs::path& path, std::string_view header, Fn row) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != header) {
        throw std::runtime_error(
            fmt::format("{}:{}: expected header `{}`", path.string(), line_no, header));
      }
      header_seen = true;
      continue;
    }
    const auto cells = split_csv(line);
    const auto where = fmt::format("{}:{}", path.string(), line_no);
    if (cells.size() != 3) throw std::runtime_error(where + ": expected 3 cells");
    row(cells, where);
  }
  if (!header_seen) throw std::runtime_error(fmt::format("{}: empty file", path.string()));
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

}  // namespace

std::vector<ProductRecord> load_products(const fs::path& path) {
  std::vector<ProductRecord> products;
  std::set<std::string> ids;
  read_csv(path, "id,name,price", [&](const std::vector<std::string>& c, const std::string& where) {
    ProductRecord p{c[0], c[1], 0.0, c[2]};
    auto [end, ec] = std::from_chars(c[2].data(), c[2].data() + c[2].size(), p.price);
    if (p.id.empty() || ec != std::errc{} || end != c[2].data() + c[2].size() ||
        !std::isfinite(p.price) || p.price < 0) {
      throw std::runtime_error(where + ": bad product row");
    }
    if (!ids.insert(p.id).second) throw std::runtime_error(where + ": duplicate id " + p.id);
    products.push_back(std::move(p));
  });
  return products;
}

std::vector<SaleRecord> load_sales(const fs::path& path,
                                   const std::vector<ProductRecord>& products) {
  std::vector<SaleRecord> sales;
  read_csv(path, "product_id,quantity,date",
           [&](const std::vector<std::string>& c, const std::string& where) {
             SaleRecord s{c[0], 0, c[2]};
             auto [end, ec] = std::from_chars(c[1].data(), c[1].data() + c[1].size(), s.quantity);
             if (ec != std::errc{} || end != c[1].data() + c[1].size() || s.quantity < 0 ||
                 !is_iso_date(s.date)) {
               throw std::runtime_error(where + ": bad sale row");
             }
             const bool known = std::any_of(products.begin(), products.end(),
                                            [&](const ProductRecord& p) { return p.id == s.product_id; });
             if (!known) throw std::runtime_error(where + ": unknown product " + s.product_id);
             sales.push_back(std::move(s));
           });
  return sales;
}

std::string render_table(const Table& table) {
  std::vector<std::size_t> widths;
  const auto widen = [&](const std::vector<std::string>& cells) {
    if (widths.size() < cells.size()) widths.resize(cells.size(), 0);
    for (std::size_t i = 0; i < cells.size(); ++i) widths[i] = std::max(widths[i], cells[i].size());
  };
  widen(table.columns);
  for (const auto& row : table.rows) widen(row);

  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    std::string text;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) text += "  ";
      text += cells[i];
      text.append(widths[i] - cells[i].size(), ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text;
    out += '\n';
  };
  line(table.columns);
  for (const auto& row : table.rows) line(row);
  return out;
}

LegacyApp::LegacyApp(fs::path fixture_dir, Dispatcher dispatch)
    : fixture_dir_(std::move(fixture_dir)),
      dispatch_(std::move(dispatch)),
      products_(load_products(fixture_dir_ / "products.csv")) {}

scpa::ValueMap LegacyApp::call(std::string_view point, scpa::ValueMap payload) const {
  return dispatch_ ? dispatch_(point, std::move(payload)) : payload;
}

std::string LegacyApp::render_product_listing() const {
  // Data and business hooks see the catalogue; the render hook sees the view.
  scpa::ValueMap model;
  model.set("fixture_dir", fixture_dir_.string());
  scpa::ValueList catalogue;
  for (const auto& p : products_) {
    catalogue.emplace_back(scpa::ValueMap{{"id", p.id}, {"name", p.name}, {"price", p.price}});
  }
  model.set("products", std::move(catalogue));
  model = call(kReadPoint, std::move(model));
  model = call(kComputePoint, std::move(model));

  scpa::ValueList columns{"id", "name", "price"};
  scpa::ValueList rows;
  for (const auto& p : products_) rows.emplace_back(scpa::ValueList{p.id, p.name, p.price_text});
  model.set("columns", std::move(columns));
  model.set("rows", std::move(rows));
  model = call(kRenderPoint, std::move(model));

  // Whatever came back is shown as text; anything malformed is dropped.
  Table table;
  const auto text_of = [](const scpa::Value& v) {
    return v.is_text() ? v.as_text() : std::string();
  };
  if (const auto* cols = model.find("columns"); cols != nullptr && cols->is_list()) {
    for (const auto& c : cols->as_list()) table.columns.push_back(text_of(c));
  }
  if (const auto* rs = model.find("rows"); rs != nullptr && rs->is_list()) {
    for (const auto& r : rs->as_list()) {
      if (!r.is_list()) continue;
      std::vector<std::string> cells;
      for (const auto& c : r.as_list()) cells.push_back(text_of(c));
      cells.resize(table.columns.size());
      table.rows.push_back(std::move(cells));
    }
  }
  return render_table(table);
}

}  // namespace demo

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

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "scpa/value.hpp"

namespace demo {

// Extension points the legacy app exposes, one per layer.
inline constexpr std::string_view kRenderPoint = "ui.product.render";
inline constexpr std::string_view kComputePoint = "business.sales.compute";
inline constexpr std::string_view kReadPoint = "data.sales.read";

struct ProductRecord {
  std::string id;
  std::string name;
  double price = 0;
  std::string price_text;  // as written in the fixture
};

struct SaleRecord {
  std::string product_id;
  std::int64_t quantity = 0;
  std::string date;  // YYYY-MM-DD
};

/// products.csv: `id,name,price`. Throws std::runtime_error naming the line
/// on malformed rows, negative prices or duplicate ids.
std::vector<ProductRecord> load_products(const std::filesystem::path& path);

/// sales.csv: `product_id,quantity,date`. Every product id must exist.
std::vector<SaleRecord> load_sales(const std::filesystem::path& path,
                                   const std::vector<ProductRecord>& products);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Left-aligned columns separated by two spaces, trailing blanks trimmed.
std::string render_table(const Table& table);

/// Hands a payload to whatever is plugged into an extension point and
/// returns the result. The app only knows this signature.
using Dispatcher = std::function<scpa::ValueMap(std::string_view, scpa::ValueMap)>;

/// The product listing screen. Without a dispatcher (or with nothing bound)
/// it renders id, name and price only.
class LegacyApp {
 public:
  explicit LegacyApp(std::filesystem::path fixture_dir, Dispatcher dispatch = {});

  const std::vector<ProductRecord>& products() const { return products_; }
  std::string render_product_listing() const;

 private:
  scpa::ValueMap call(std::string_view point, scpa::ValueMap payload) const;

  std::filesystem::path fixture_dir_;
  Dispatcher dispatch_;
  std::vector<ProductRecord> products_;
};

}  // namespace demo

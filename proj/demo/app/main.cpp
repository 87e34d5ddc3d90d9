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

// Renders the product listing once, optionally with the units deployed in
// a drop folder.

#include <exception>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "legacy_app.hpp"
#include "scpa/host.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Product listing demo for scpa-host"};
  std::string fixtures;
  std::string drop_dir;
  std::string diagnostics = "none";
  cli.add_option("--fixtures", fixtures, "Directory holding products.csv and sales.csv")
      ->required();
  cli.add_option("--drop-dir", drop_dir, "Drop folder to load units from");
  cli.add_option("--diagnostics", diagnostics, "stderr, stdout, none or a file path");
  CLI11_PARSE(cli, argc, argv);

  try {
    std::unique_ptr<scpa::Host> host;
    demo::Dispatcher dispatch;
    if (!drop_dir.empty()) {
      scpa::HostConfig config;
      config.drop_dir = drop_dir;
      config.default_policy = scpa::ErrorPolicy::kFailOpen;
      config.diagnostics = diagnostics;
      config.watch = false;
      host = scpa::Host::start(std::move(config));
      dispatch = [h = host.get()](std::string_view point, scpa::ValueMap payload) {
        return h->dispatch(point, std::move(payload));
      };
    }
    const demo::LegacyApp app(fixtures, dispatch);
    std::cout << app.render_product_listing();
    if (host) host->stop();
  } catch (const std::exception& e) {
    std::cerr << "scpa-demo: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

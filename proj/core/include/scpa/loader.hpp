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
#include <memory>

#include "scpa/registry.hpp"

namespace scpa {

/// Instantiates a deployment's payload:
///   *.so   shared library exporting the SCPA_EXPORT_UNIT entry points
///   *.ref  reference-unit behaviour table (see reference_unit.hpp)
/// Throws std::runtime_error on anything else or on load errors.
std::shared_ptr<PipelineUnit> load_payload(const Deployment& deployment);

/// `load_payload` as a UnitLoader.
UnitLoader payload_loader();

}  // namespace scpa

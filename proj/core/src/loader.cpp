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

#include "scpa/loader.hpp"

#include <dlfcn.h>
#include <unistd.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "scpa/reference_unit.hpp"

namespace fs = std::filesystem;

namespace scpa {
namespace {

class SharedLibrary {
 public:
  explicit SharedLibrary(const fs::path& path)
      : handle_(::dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL)) {
    if (handle_ == nullptr) {
      const char* err = ::dlerror();
      throw std::runtime_error(
          fmt::format("dlopen {}: {}", path.string(), err != nullptr ? err : "unknown error"));
    }
  }
  ~SharedLibrary() { ::dlclose(handle_); }

  SharedLibrary(const SharedLibrary&) = delete;
  SharedLibrary& operator=(const SharedLibrary&) = delete;

  template <typename Fn>
  Fn symbol(const char* name) const {
    void* sym = ::dlsym(handle_, name);
    if (sym == nullptr) throw std::runtime_error(fmt::format("missing symbol {}", name));
    return reinterpret_cast<Fn>(sym);
  }

 private:
  void* handle_;
};

std::shared_ptr<PipelineUnit> load_shared_library(const fs::path& path) {
  auto library = std::make_shared<SharedLibrary>(path);
  const auto abi = library->symbol<UnitAbiFn>(kUnitAbiSymbol);
  if (abi() != kUnitAbiVersion) {
    throw std::runtime_error(
        fmt::format("unit ABI {} does not match host ABI {}", abi(), kUnitAbiVersion));
  }
  const auto create = library->symbol<UnitCreateFn>(kUnitCreateSymbol);
  const auto destroy = library->symbol<UnitDestroyFn>(kUnitDestroySymbol);
  PipelineUnit* unit = create();
  if (unit == nullptr) throw std::runtime_error("unit factory returned null");
  // The deleter owns the library so the code outlives the object.
  return std::shared_ptr<PipelineUnit>(
      unit, [library, destroy](PipelineUnit* p) { destroy(p); });
}

// dlopen() identifies libraries by path, so a bundle redeployed in place
// would resolve to the stale image. Load from a copy named by checksum.
fs::path content_addressed_copy(const fs::path& payload, const std::string& checksum) {
  const fs::path dir = fs::temp_directory_path() / "scpa-units";
  fs::create_directories(dir);
  const fs::path target = dir / (checksum + ".so");
  std::error_code ec;
  if (fs::exists(target, ec)) return target;
  const fs::path tmp = dir / fmt::format(".{}.{}.tmp", checksum, ::getpid());
  fs::copy_file(payload, tmp, fs::copy_options::overwrite_existing);
  fs::rename(tmp, target);
  return target;
}

std::shared_ptr<PipelineUnit> load_reference_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return make_reference_unit(parse_reference_spec(text.str()));
}

}  // namespace

std::shared_ptr<PipelineUnit> load_payload(const Deployment& deployment) {
  const fs::path payload = deployment.bundle_dir / deployment.manifest.payload_ref;
  const auto ext = payload.extension();
  if (ext == ".so") {
    return load_shared_library(
        content_addressed_copy(payload, deployment.manifest.checksum));
  }
  if (ext == ".ref") return load_reference_table(payload);
  throw std::runtime_error(
      fmt::format("unsupported payload type `{}` ({})", ext.string(), payload.string()));
}

UnitLoader payload_loader() { return &load_payload; }

}  // namespace scpa

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

#include "test_support.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "scpa/digest.hpp"

namespace fs = std::filesystem;

namespace scpa::testing {

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "scpa-test-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Manifest make_manifest(std::string name, std::string version, int priority,
                       std::vector<BindingSpec> bindings, bool reentrant) {
  Manifest m;
  m.name = std::move(name);
  m.version = *Version::parse(version);
  m.priority = priority;
  m.reentrant = reentrant;
  m.payload_ref = "payload.ref";
  m.checksum = std::string(64, '0');
  for (auto& b : bindings) {
    m.bindings.push_back({*parse_layer(b.layer), std::move(b.extension_point), std::move(b.handler)});
  }
  return m;
}

fs::path write_ref_bundle(const fs::path& drop, const std::string& name,
                          const std::string& version, int priority,
                          const std::vector<BindingSpec>& bindings, const std::string& ref_text,
                          bool reentrant) {
  Manifest m = make_manifest(name, version, priority, bindings, reentrant);
  m.checksum = sha256_hex(ref_text);
  const fs::path dir = drop / name / version;
  write_file(dir / "payload.ref", ref_text);
  write_file(dir / "manifest.scpa", serialize_manifest(m));
  return dir;
}

void SpecLoader::add(const std::string& name, const std::string& version, ReferenceSpec spec) {
  std::lock_guard lock(mutex_);
  specs_[name + "@" + version] = std::move(spec);
}

UnitLoader SpecLoader::loader() {
  return [this](const Deployment& d) -> std::shared_ptr<PipelineUnit> {
    const std::string key = d.manifest.name + "@" + d.manifest.version.to_string();
    std::lock_guard lock(mutex_);
    auto it = specs_.find(key);
    if (it == specs_.end()) throw std::runtime_error("no spec for " + key);
    auto log = std::make_shared<CallLog>();
    logs_[key].push_back(log);
    return make_reference_unit(it->second, log);
  };
}

std::vector<std::shared_ptr<CallLog>> SpecLoader::logs(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = logs_.find(key);
  return it == logs_.end() ? std::vector<std::shared_ptr<CallLog>>{} : it->second;
}

std::size_t SpecLoader::loads() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, logs] : logs_) n += logs.size();
  return n;
}

Deployment make_deployment(Manifest manifest) { return Deployment{std::move(manifest), {}}; }

Envelope make_envelope(std::string extension_point, ValueMap payload) {
  Envelope env;
  env.id = "test-envelope";
  env.extension_point = std::move(extension_point);
  env.payload = std::move(payload);
  return env;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kRound[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

}  // namespace

std::string sha256_oracle(const std::vector<std::uint8_t>& data) {
  std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::vector<std::uint8_t> msg = data;
  const std::uint64_t bit_len = static_cast<std::uint64_t>(data.size()) * 8;
  msg.push_back(0x80);
  while (msg.size() % 64 != 56) msg.push_back(0);
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<std::uint8_t>(bit_len >> (i * 8)));

  for (std::size_t block = 0; block < msg.size(); block += 64) {
    std::uint32_t w[64];
    for (int t = 0; t < 16; ++t) {
      w[t] = (std::uint32_t{msg[block + 4 * t]} << 24) | (std::uint32_t{msg[block + 4 * t + 1]} << 16) |
             (std::uint32_t{msg[block + 4 * t + 2]} << 8) | std::uint32_t{msg[block + 4 * t + 3]};
    }
    for (int t = 16; t < 64; ++t) {
      const std::uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
      const std::uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
      w[t] = w[t - 16] + s0 + w[t - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], k = h[7];
    for (int t = 0; t < 64; ++t) {
      const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = k + S1 + ch + kRound[t] + w[t];
      const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = S0 + maj;
      k = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += k;
  }
  std::string hex;
  char buf[9];
  for (std::uint32_t word : h) {
    std::snprintf(buf, sizeof buf, "%08x", word);
    hex += buf;
  }
  return hex;
}

bool semver_less_oracle(const std::string& a, const std::string& b) {
  const auto parts = [](const std::string& s) {
    std::vector<unsigned long long> out;
    std::stringstream in(s);
    std::string piece;
    while (std::getline(in, piece, '.')) out.push_back(std::stoull(piece));
    return out;
  };
  const auto pa = parts(a), pb = parts(b);
  for (std::size_t i = 0; i < 3; ++i) {
    if (pa[i] != pb[i]) return pa[i] < pb[i];
  }
  return false;
}

std::set<std::string> reverse_bfs_oracle(const std::vector<Edge>& edges,
                                         const std::string& changed) {
  std::set<std::string> seen{changed};
  std::vector<std::string> frontier{changed};
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& target : frontier) {
      for (const auto& [from, to] : edges) {
        if (to == target && seen.insert(from).second) next.push_back(from);
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

std::set<std::string> fixpoint_closure_oracle(const std::vector<Edge>& edges,
                                              const std::string& changed) {
  std::set<std::string> set{changed};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [from, to] : edges) {
      if (set.count(to) != 0 && set.count(from) == 0) {
        set.insert(from);
        grew = true;
      }
    }
  }
  return set;
}

RandomDag random_dag(std::mt19937_64& rng, std::size_t max_nodes, double edge_probability) {
  RandomDag dag;
  const std::size_t n = 1 + rng() % max_nodes;
  for (std::size_t i = 0; i < n; ++i) dag.nodes.push_back("n" + std::to_string(i));
  std::shuffle(dag.nodes.begin(), dag.nodes.end(), rng);  // topological order != name order
  std::bernoulli_distribution coin(edge_probability);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (coin(rng)) dag.edges.emplace_back(dag.nodes[i], dag.nodes[j]);
    }
  }
  return dag;
}

std::vector<std::string> expected_order(std::vector<std::pair<int, std::string>> units) {
  for (std::size_t i = 1; i < units.size(); ++i) {
    for (std::size_t j = i; j > 0 && units[j] < units[j - 1]; --j) std::swap(units[j], units[j - 1]);
  }
  std::vector<std::string> names;
  for (auto& u : units) names.push_back(std::move(u.second));
  return names;
}

}  // namespace scpa::testing

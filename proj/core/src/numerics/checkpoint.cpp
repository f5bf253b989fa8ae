// Copyright 2026 The KOAP Authors
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

#include "koap/numerics/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace koap::numerics {

namespace {

constexpr char kMagic[8] = {'K', 'O', 'A', 'P', 'C', 'K', 'P', '1'};

}  // namespace

void save_checkpoint(const std::string& path, const ParamVector& params,
                     const std::string& extra_json) {
  nlohmann::json header;
  header["segments"] = nlohmann::json::array();
  for (const auto& s : params.segments()) {
    header["segments"].push_back(
        {{"name", s.name}, {"offset", s.offset}, {"shape", s.shape}});
  }
  header["extra"] =
      extra_json.empty() ? nlohmann::json(nullptr)
                         : nlohmann::json::parse(extra_json);
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw OrchestrationError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  std::uint64_t len = hs.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  out.write(reinterpret_cast<const char*>(params.values().data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw OrchestrationError("short write on checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OrchestrationError("missing checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw OrchestrationError("bad checkpoint magic in '" + path + "'");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string hs(len, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(len));
  if (!in) throw OrchestrationError("truncated checkpoint header in '" + path + "'");
  nlohmann::json header = nlohmann::json::parse(hs);

  ParamVector::Builder builder;
  for (const auto& s : header.at("segments")) {
    builder.add(s.at("name").get<std::string>(),
                s.at("shape").get<std::vector<Index>>());
  }
  Checkpoint ck;
  ck.params = builder.build();
  in.read(reinterpret_cast<char*>(ck.params.values().data()),
          static_cast<std::streamsize>(ck.params.size() * sizeof(double)));
  if (!in) throw OrchestrationError("truncated checkpoint data in '" + path + "'");
  const auto& extra = header.at("extra");
  ck.extra_json = extra.is_null() ? std::string() : extra.dump();
  return ck;
}

}  // namespace koap::numerics

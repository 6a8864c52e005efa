// Copyright 2026 The basketrec Authors.
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

#include "manifest.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <fstream>
#include <memory>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"

namespace basketrec::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::filesystem::filesystem_error(
        "cannot open input", path,
        std::make_error_code(std::errc::no_such_file_or_directory));
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                             EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    EVP_DigestUpdate(ctx.get(), buffer.data(),
                     static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  std::string hex;
  for (unsigned int k = 0; k < length; ++k) hex += fmt::format("{:02x}", digest[k]);
  return hex;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["tool_version"] = kToolVersion;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["parameters"] = m.parameters;
  auto& inputs = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.inputs) {
    inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  }
  auto& outputs = j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.outputs) outputs.push_back(p.string());
  j["created_at"] = fmt::format(
      "{:%Y-%m-%dT%H:%M:%SZ}",
      fmt::gmtime(std::chrono::system_clock::to_time_t(
          std::chrono::system_clock::now())));
  const auto path = dir / "manifest.json";
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::filesystem::filesystem_error(
        "cannot write manifest", path, std::make_error_code(std::errc::io_error));
  }
}

OutputLock::OutputLock(const std::filesystem::path& dir)
    : path_(dir / kFileName) {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw LockHeld(fmt::format(
        "output directory {} is in use (remove {} if no run is active)",
        dir.string(), path_.string()));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace basketrec::cli

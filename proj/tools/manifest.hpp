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

#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace basketrec::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> parameters;  // command-level settings
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::uint64_t seed = 0;
};

// Writes `dir/manifest.json`, digesting every input.
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

class LockHeld : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exclusive marker file in an output directory, removed on destruction.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

  static constexpr const char* kFileName = ".basketrec.lock";

 private:
  std::filesystem::path path_;
};

}  // namespace basketrec::cli

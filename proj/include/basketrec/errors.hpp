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

#include <stdexcept>
#include <string>

namespace basketrec {

// Base class for every error raised by the library. The CLI maps each
// subclass to its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required column is missing from an input header, or a row is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Input or filtering produced a dataset with no baskets.
class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid data (conflicting basket owners, bad serialized file).
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A loss component became NaN or infinite during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Negative sampling could not find an unpurchased item.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// Cosine similarity requested on a zero-norm row.
class DegenerateEmbeddingError : public Error {
 public:
  using Error::Error;
};

}  // namespace basketrec

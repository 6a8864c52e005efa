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

#include <cstdint>

#include "basketrec/dataset.hpp"

namespace basketrec {

// Users and items are split into equal blocks; each user favours a few
// items of its own block and fills every basket from those favourites.
struct PlantedBlockOptions {
  Index users = 50;
  Index items = 100;
  Index blocks = 5;
  Index favorites_per_user = 8;
  Index baskets_per_user = 3;
  Index basket_size = 6;
};

InteractionDataset planted_blocks(const PlantedBlockOptions& options,
                                  std::uint64_t seed);

}  // namespace basketrec

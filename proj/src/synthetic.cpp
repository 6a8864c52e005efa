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

#include "basketrec/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "basketrec/errors.hpp"
#include "basketrec/rng.hpp"

namespace basketrec {

InteractionDataset planted_blocks(const PlantedBlockOptions& o,
                                  std::uint64_t seed) {
  if (o.blocks < 1 || o.users % o.blocks != 0 || o.items % o.blocks != 0) {
    throw ConfigError("users and items must split evenly into blocks");
  }
  const Index items_per_block = o.items / o.blocks;
  const Index users_per_block = o.users / o.blocks;
  if (o.favorites_per_user > items_per_block ||
      o.basket_size > o.favorites_per_user || o.basket_size < 1) {
    throw ConfigError("need basket_size <= favorites <= items per block");
  }
  Rng rng = Rng::stream(seed, "synthetic");
  InteractionDataset ds;
  for (Index u = 0; u < o.users; ++u) ds.user_ids.push_back("u" + std::to_string(u));
  for (Index i = 0; i < o.items; ++i) ds.item_ids.push_back("i" + std::to_string(i));
  ds.user_baskets.resize(o.users);
  for (Index u = 0; u < o.users; ++u) {
    const Index first = (u / users_per_block) * items_per_block;
    std::vector<Index> block(items_per_block);
    std::iota(block.begin(), block.end(), first);
    rng.shuffle(block);
    block.resize(o.favorites_per_user);
    for (Index k = 0; k < o.baskets_per_user; ++k) {
      rng.shuffle(block);
      std::vector<Index> items(block.begin(), block.begin() + o.basket_size);
      std::sort(items.begin(), items.end());
      const Index b = ds.num_baskets();
      ds.basket_ids.push_back("b" + std::to_string(b));
      ds.basket_owner.push_back(u);
      ds.basket_items.push_back(std::move(items));
      ds.user_baskets[u].push_back(b);
    }
  }
  ds.validate();
  return ds;
}

}  // namespace basketrec

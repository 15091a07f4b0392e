#pragma once

#include <string>

#include "permurank/models.hpp"

namespace permurank {

/// JSON checkpoints holding config plus flat parameter arrays. Doubles are
/// written with shortest round-trip representation, so load(save(p)) is
/// bit-exact.
void save_reward(const RewardParams& p, const std::string& path);
void save_ranker(const RankerParams& p, const std::string& path);

RewardParams load_reward(const std::string& path);
RankerParams load_ranker(const std::string& path);

}  // namespace permurank

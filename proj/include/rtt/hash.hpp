#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rtt {

// FNV-1a, 64-bit. Stable across platforms and runs, unlike std::hash.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t seed = 14695981039346656037ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Derives the per-leg generation seed for one (run, bug, leg, intermediate)
// slot so work items can execute in any order and still reproduce.
inline std::uint64_t derive_leg_seed(std::uint64_t run_seed,
                                     std::string_view bug_id,
                                     std::string_view leg_tag,
                                     int intermediate_index) {
  std::string key = std::to_string(run_seed);
  key += '|';
  key += bug_id;
  key += '|';
  key += leg_tag;
  key += '|';
  key += std::to_string(intermediate_index);
  return fnv1a64(key);
}

}  // namespace rtt

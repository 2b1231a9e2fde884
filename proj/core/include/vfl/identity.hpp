#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace vfl {

// Client identity; unique within one deployment.
struct Identity {
  std::uint64_t value = 0;

  friend auto operator<=>(const Identity&, const Identity&) = default;
  std::string str() const { return std::to_string(value); }
};

}  // namespace vfl

template <>
struct std::hash<vfl::Identity> {
  std::size_t operator()(const vfl::Identity& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};

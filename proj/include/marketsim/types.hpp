#pragma once

#include <cstdint>
#include <string_view>

namespace marketsim {

using AgentId = std::uint32_t;
using OrderId = std::uint64_t;
/// Price in 10^-4 currency units (LOBSTER convention).
using Price = std::int64_t;
/// Share count.
using Quantity = std::int64_t;

enum class Side : std::uint8_t { Buy, Sell };

constexpr Side opposite(Side s) noexcept { return s == Side::Buy ? Side::Sell : Side::Buy; }
constexpr std::string_view to_string(Side s) noexcept { return s == Side::Buy ? "BUY" : "SELL"; }

/// Aggregate volume resting at one price.
struct LevelVolume {
  Price price = 0;
  Quantity volume = 0;
  friend bool operator==(const LevelVolume&, const LevelVolume&) = default;
};

}  // namespace marketsim

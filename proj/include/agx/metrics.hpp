#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agx/netlist.hpp"
#include "agx/sim.hpp"

namespace agx {

/// How primary-output bits form one unsigned integer per vector. `bits`
/// indexes the netlist's flattened output bits, least significant first.
struct OutputDecoding {
  std::string name;
  std::vector<std::uint32_t> bits;

  int width() const { return static_cast<int>(bits.size()); }
  /// 2^width - 1
  std::uint64_t max_value() const;
};

/// Default: all output buses concatenated in port order, the first-declared
/// bus in the most significant bits. `buses` selects (and orders, MSB part
/// first) a subset by name.
OutputDecoding make_decoding(const Netlist& n, const std::vector<std::string>& buses = {});

std::vector<std::uint64_t> decode_outputs(const TraceSet& traces, const OutputDecoding& decoding);
std::vector<std::uint64_t> decode_outputs(const TimedOutcome& outcome,
                                          const OutputDecoding& decoding);

enum class NmedVariant {
  /// mean |Y_true - Y_appr| / max
  Standard,
  /// mean |Y_true - Y_appr| / Y_true / max, terms with Y_true = 0 skipped
  Literal,
};

struct ErrorMetrics {
  double nmed = 0.0;
  double mean_error_distance = 0.0;
  double error_rate = 0.0;
  std::uint64_t max_error_distance = 0;
  std::size_t vectors = 0;
};

ErrorMetrics nmed(std::span<const std::uint64_t> golden, std::span<const std::uint64_t> observed,
                  std::uint64_t max_value, NmedVariant variant = NmedVariant::Standard);
inline ErrorMetrics nmed(std::span<const std::uint64_t> golden,
                         std::span<const std::uint64_t> observed, const OutputDecoding& decoding,
                         NmedVariant variant = NmedVariant::Standard) {
  return nmed(golden, observed, decoding.max_value(), variant);
}

std::optional<NmedVariant> parse_nmed_variant(std::string_view name);

}  // namespace agx

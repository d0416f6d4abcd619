#include "agx/metrics.hpp"

#include <algorithm>
#include <bit>

namespace agx {

std::uint64_t OutputDecoding::max_value() const {
  return bits.size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits.size()) - 1;
}

OutputDecoding make_decoding(const Netlist& n, const std::vector<std::string>& buses) {
  std::vector<std::uint32_t> base;
  std::uint32_t offset = 0;
  for (const Port& p : n.outputs()) {
    base.push_back(offset);
    offset += static_cast<std::uint32_t>(p.width());
  }
  std::vector<std::size_t> chosen;
  if (buses.empty()) {
    for (std::size_t i = 0; i < n.outputs().size(); ++i) chosen.push_back(i);
  } else {
    for (const std::string& name : buses) {
      auto it = std::find_if(n.outputs().begin(), n.outputs().end(),
                             [&](const Port& p) { return p.name == name; });
      if (it == n.outputs().end())
        throw Error(ErrorCode::UnknownNet, "no output bus named '" + name + "'");
      chosen.push_back(static_cast<std::size_t>(it - n.outputs().begin()));
    }
  }
  OutputDecoding d;
  // Last chosen bus supplies the least significant bits.
  for (std::size_t c = chosen.size(); c-- > 0;) {
    const Port& p = n.outputs()[chosen[c]];
    for (int k = 0; k < p.width(); ++k) d.bits.push_back(base[chosen[c]] + static_cast<std::uint32_t>(k));
    d.name = d.name.empty() ? p.name : p.name + "," + d.name;
  }
  if (d.bits.empty()) throw Error(ErrorCode::UnknownNet, "netlist has no output bits to decode");
  if (d.bits.size() > 63)
    throw Error(ErrorCode::InvalidArgument, "decoded output wider than 63 bits");
  return d;
}

namespace {

template <typename BitWord>
std::vector<std::uint64_t> assemble(std::size_t count, const OutputDecoding& decoding,
                                    BitWord&& word_of) {
  std::vector<std::uint64_t> values(count, 0);
  const std::size_t words = words_for(count);
  for (std::size_t k = 0; k < decoding.bits.size(); ++k) {
    const std::uint64_t weight = std::uint64_t{1} << k;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t word = word_of(decoding.bits[k], w);
      while (word) {
        const int lane = std::countr_zero(word);
        const std::size_t v = w * kLanes + static_cast<std::size_t>(lane);
        if (v < count) values[v] |= weight;
        word &= word - 1;
      }
    }
  }
  return values;
}

}  // namespace

std::vector<std::uint64_t> decode_outputs(const TraceSet& traces, const OutputDecoding& decoding) {
  for (std::uint32_t b : decoding.bits)
    if (b >= traces.output_nets().size())
      throw Error(ErrorCode::UnknownNet, "output bit " + std::to_string(b) + " out of range");
  return assemble(traces.count(), decoding,
                  [&](std::uint32_t bit, std::size_t w) { return traces.output_trace(bit)[w]; });
}

std::vector<std::uint64_t> decode_outputs(const TimedOutcome& outcome,
                                          const OutputDecoding& decoding) {
  for (std::uint32_t b : decoding.bits)
    if (b >= outcome.sampled.size())
      throw Error(ErrorCode::UnknownNet, "output bit " + std::to_string(b) + " out of range");
  return assemble(outcome.count, decoding,
                  [&](std::uint32_t bit, std::size_t w) { return outcome.sampled[bit][w]; });
}

ErrorMetrics nmed(std::span<const std::uint64_t> golden, std::span<const std::uint64_t> observed,
                  std::uint64_t max_value, NmedVariant variant) {
  if (golden.size() != observed.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(golden.size()) + " golden vs " +
                                               std::to_string(observed.size()) + " observed");
  if (golden.empty()) throw Error(ErrorCode::EmptyStream, "no vectors");
  if (max_value == 0) throw Error(ErrorCode::InvalidArgument, "max value must be positive");
  ErrorMetrics m;
  m.vectors = golden.size();
  // Integer accumulation keeps the standard NMED exact up to one rounding.
  unsigned __int128 sum = 0;
  long double relative = 0.0L;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < golden.size(); ++i) {
    const std::uint64_t g = golden[i], o = observed[i];
    const std::uint64_t ed = g > o ? g - o : o - g;
    if (ed == 0) continue;
    ++wrong;
    sum += ed;
    m.max_error_distance = std::max(m.max_error_distance, ed);
    if (g != 0) relative += static_cast<long double>(ed) / static_cast<long double>(g);
  }
  const auto n = static_cast<long double>(golden.size());
  m.mean_error_distance = static_cast<double>(static_cast<long double>(sum) / n);
  m.error_rate = static_cast<double>(static_cast<long double>(wrong) / n);
  if (variant == NmedVariant::Standard)
    m.nmed = static_cast<double>(static_cast<long double>(sum) /
                                 (n * static_cast<long double>(max_value)));
  else
    m.nmed = static_cast<double>(relative / (n * static_cast<long double>(max_value)));
  return m;
}

std::optional<NmedVariant> parse_nmed_variant(std::string_view name) {
  if (name == "nmed") return NmedVariant::Standard;
  if (name == "nmed-literal") return NmedVariant::Literal;
  return std::nullopt;
}

}  // namespace agx

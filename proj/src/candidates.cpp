#include "agx/candidates.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "agx/parallel.hpp"
#include "agx/rng.hpp"

namespace agx {

namespace {

constexpr double kScoreTolerance = 1e-12;

std::uint64_t popcount_span(std::span<const std::uint64_t> t) {
  std::uint64_t c = 0;
  for (std::uint64_t w : t) c += static_cast<std::uint64_t>(std::popcount(w));
  return c;
}

bool is_source_candidate(const Netlist& n, NetId j) { return !n.is_constant_net(j); }

/// Seeded choice among equally good wires (sorted ids) for one target.
NetId draw_tied(const std::vector<NetId>& tied, std::uint64_t seed, NetId target) {
  if (tied.size() == 1) return tied.front();
  Rng rng(derive_seed(seed, target, 0x7a11));
  return tied[uniform_below(rng, tied.size())];
}

void require_all_traces(const TraceSet& traces, const Netlist& n) {
  if (traces.net_capacity() != n.net_count())
    throw Error(ErrorCode::LayoutMismatch, "traces were recorded on a different netlist");
  for (NetId i = 0; i < n.net_count(); ++i)
    if (!traces.has(i))
      throw Error(ErrorCode::UnknownNet, "candidate extraction needs traces of every net");
}

}  // namespace

WireActivity compute_activity(const TraceSet& traces) {
  if (traces.count() == 0) throw Error(ErrorCode::EmptyTraces, "no vectors traced");
  WireActivity a;
  a.vectors = traces.count();
  const std::size_t nets = traces.net_capacity();
  a.ones.assign(nets, 0);
  a.t0.assign(nets, 0.0);
  a.t1.assign(nets, 0.0);
  bool any = false;
  for (NetId i = 0; i < nets; ++i) {
    if (!traces.has(i)) continue;
    any = true;
    a.ones[i] = popcount_span(traces.trace(i));
    a.t1[i] = static_cast<double>(a.ones[i]) / static_cast<double>(a.vectors);
    a.t0[i] = static_cast<double>(a.vectors - a.ones[i]) / static_cast<double>(a.vectors);
  }
  if (!any) throw Error(ErrorCode::EmptyTraces, "no nets traced");
  return a;
}

std::vector<NetId> eligible_nets(const Netlist& n, const CandidateOptions& opts) {
  std::vector<NetId> out;
  for (NetId i = 0; i < n.net_count(); ++i) {
    if (n.is_constant_net(i)) continue;
    if (n.is_primary_input(i) && !opts.include_primary_inputs) continue;
    out.push_back(i);
  }
  return out;
}

SimilarityMap compute_similarity(const TraceSet& traces, const AnnotatedDag& aged, double floor) {
  const Netlist& n = aged.netlist();
  require_all_traces(traces, n);
  SimilarityMap out;
  const auto count = static_cast<double>(traces.count());
  for (NetId i = 0; i < n.net_count(); ++i) {
    if (n.is_constant_net(i)) continue;
    const auto ti = traces.trace(i);
    for (NetId j = 0; j < n.net_count(); ++j) {
      if (j == i || !is_source_candidate(n, j) || !(aged.arrival[j] < aged.arrival[i])) continue;
      const auto tj = traces.trace(j);
      std::uint64_t diff = 0;
      for (std::size_t w = 0; w < ti.size(); ++w) diff += static_cast<std::uint64_t>(std::popcount(ti[w] ^ tj[w]));
      const double s = 1.0 - static_cast<double>(diff) / count;
      if (s >= floor) out.emplace(std::make_pair(i, j), s);
    }
  }
  return out;
}

std::vector<ApproximationCandidate> select_candidates(const WireActivity& activity,
                                                      const SimilarityMap& similarities,
                                                      const AnnotatedDag& aged,
                                                      const CandidateOptions& opts) {
  const Netlist& n = aged.netlist();
  const auto targets = eligible_nets(n, opts);
  std::vector<ApproximationCandidate> out;
  out.reserve(targets.size());
  for (NetId i : targets) {
    if (i >= activity.t0.size()) throw Error(ErrorCode::UnknownNet, n.net(i).name);
    ApproximationCandidate c;
    c.target = i;
    const bool prefer_one = activity.t1[i] > activity.t0[i] + kScoreTolerance;
    c.replacement = Replacement::constant(prefer_one);
    c.gamma = prefer_one ? activity.t1[i] : activity.t0[i];

    double best_wire = -1.0;
    std::vector<NetId> tied;
    for (auto it = similarities.lower_bound({i, 0}); it != similarities.end() && it->first.first == i;
         ++it) {
      const NetId j = it->first.second;
      if (!(aged.arrival[j] < aged.arrival[i]))
        throw Error(ErrorCode::InvalidArgument, "similarity pair violates arrival ordering");
      const double s = it->second;
      if (s > best_wire + kScoreTolerance) {
        best_wire = s;
        tied.assign(1, j);
      } else if (std::abs(s - best_wire) <= kScoreTolerance) {
        tied.push_back(j);
      }
    }
    if (!tied.empty() && best_wire > c.gamma + kScoreTolerance) {
      double earliest = aged.arrival[tied.front()];
      for (NetId j : tied) earliest = std::min(earliest, aged.arrival[j]);
      std::vector<NetId> first;
      for (NetId j : tied)
        if (aged.arrival[j] == earliest) first.push_back(j);
      std::sort(first.begin(), first.end());
      c.replacement = Replacement::net(draw_tied(first, opts.seed, i));
      c.gamma = best_wire;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<ApproximationCandidate> extract_candidates(const TraceSet& traces,
                                                       const AnnotatedDag& aged,
                                                       const CandidateOptions& opts) {
  const Netlist& n = aged.netlist();
  require_all_traces(traces, n);
  if (traces.count() == 0) throw Error(ErrorCode::EmptyTraces, "no vectors traced");
  const std::uint64_t count = traces.count();
  const std::size_t words = traces.words();

  // Sources sorted by aged arrival, then id.
  std::vector<NetId> sources;
  for (NetId j = 0; j < n.net_count(); ++j)
    if (is_source_candidate(n, j)) sources.push_back(j);
  std::sort(sources.begin(), sources.end(), [&](NetId a, NetId b) {
    return std::tie(aged.arrival[a], a) < std::tie(aged.arrival[b], b);
  });

  const auto targets = eligible_nets(n, opts);
  std::vector<ApproximationCandidate> out(targets.size());
  constexpr std::size_t kCheckEvery = 8;

  parallel_for(targets.size(), opts.threads, [&](std::size_t t) {
    const NetId i = targets[t];
    const auto ti = traces.trace(i);
    const std::uint64_t ones = popcount_span(ti);
    const std::uint64_t zeros = count - ones;
    ApproximationCandidate& c = out[t];
    c.target = i;
    // Mismatch counts: Const0 errs on every 1, Const1 on every 0.
    const bool use_one = ones > zeros;
    std::uint64_t const_m = use_one ? zeros : ones;
    c.replacement = Replacement::constant(use_one);

    // A wire must be strictly better than the constant; among wires keep all
    // with the minimum mismatch count.
    std::uint64_t bound = const_m == 0 ? 0 : const_m - 1;
    bool have_wire = false;
    std::uint64_t best_m = 0;
    double best_arrival = 0.0;
    std::vector<NetId> tied;
    for (NetId j : sources) {
      if (!(aged.arrival[j] < aged.arrival[i])) break;
      if (const_m == 0) break;
      if (have_wire && aged.arrival[j] > best_arrival && best_m == 0) break;
      const auto tj = traces.trace(j);
      std::uint64_t diff = 0;
      bool pruned = false;
      for (std::size_t w = 0; w < words; ++w) {
        diff += static_cast<std::uint64_t>(std::popcount(ti[w] ^ tj[w]));
        if ((w + 1) % kCheckEvery == 0 && diff > bound) {
          pruned = true;
          break;
        }
      }
      if (pruned || diff > bound) continue;
      if (!have_wire || diff < best_m) {
        have_wire = true;
        best_m = diff;
        best_arrival = aged.arrival[j];
        tied.assign(1, j);
        bound = diff;
      } else if (diff == best_m && aged.arrival[j] == best_arrival) {
        tied.push_back(j);
      }
      // diff == best_m with a later arrival loses the tie-break.
    }
    if (have_wire) {
      std::sort(tied.begin(), tied.end());
      c.replacement = Replacement::net(draw_tied(tied, opts.seed, i));
      const_m = best_m;
    }
    c.gamma = 1.0 - static_cast<double>(const_m) / static_cast<double>(count);
  });
  return out;
}

CandidateMix candidate_mix(const std::vector<ApproximationCandidate>& cands) {
  CandidateMix m;
  if (cands.empty()) return m;
  for (const auto& c : cands) {
    switch (c.replacement.kind) {
      case Replacement::Kind::Const0: m.const0 += 1; break;
      case Replacement::Kind::Const1: m.const1 += 1; break;
      case Replacement::Kind::Net: m.wire += 1; break;
    }
  }
  const auto total = static_cast<double>(cands.size());
  m.const0 /= total;
  m.const1 /= total;
  m.wire /= total;
  return m;
}

std::string format_candidates(const Netlist& n, const std::vector<ApproximationCandidate>& cands) {
  std::ostringstream os;
  os << std::setprecision(12);
  for (const auto& c : cands) {
    os << n.net(c.target).name << " ";
    switch (c.replacement.kind) {
      case Replacement::Kind::Const0: os << "1'b0"; break;
      case Replacement::Kind::Const1: os << "1'b1"; break;
      case Replacement::Kind::Net: os << n.net(c.replacement.source).name; break;
    }
    os << " " << c.gamma << "\n";
  }
  return os.str();
}

}  // namespace agx

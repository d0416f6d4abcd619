#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "agx/netlist.hpp"
#include "agx/sim.hpp"
#include "agx/timing.hpp"

namespace agx {

/// Fraction of vectors at which each net carries 0 / 1.
struct WireActivity {
  std::size_t vectors = 0;
  std::vector<std::uint64_t> ones;  // per net; only traced nets are meaningful
  std::vector<double> t0;
  std::vector<double> t1;
};

WireActivity compute_activity(const TraceSet& traces);

/// S_ij for target i and source j: fraction of vectors with equal values.
using SimilarityMap = std::map<std::pair<NetId, NetId>, double>;

struct CandidateOptions {
  /// Primary-input nets may be tied to constants (input truncation).
  bool include_primary_inputs = true;
  /// Seeds the draw among equally good, equally early wire replacements.
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Pairs (i, j) with aged arrival(j) < aged arrival(i), neither net constant.
/// Pairs scoring below `floor` are omitted.
SimilarityMap compute_similarity(const TraceSet& traces, const AnnotatedDag& aged,
                                 double floor = 0.0);

struct ApproximationCandidate {
  NetId target = 0;
  Replacement replacement;
  double gamma = 0.0;
};

/// Nets that receive a candidate, ascending by id; this is the chromosome order.
std::vector<NetId> eligible_nets(const Netlist& n, const CandidateOptions& opts = {});

/// Highest-scoring replacement per eligible net. Ties: a constant beats a
/// wire (Const0 before Const1), then the earliest-arriving wire, then a
/// seeded uniform draw. Result is sorted by target.
std::vector<ApproximationCandidate> select_candidates(const WireActivity& activity,
                                                      const SimilarityMap& similarities,
                                                      const AnnotatedDag& aged,
                                                      const CandidateOptions& opts = {});

/// Same selection computed directly from the traces with an arrival-sorted,
/// early-terminating similarity sweep; never materializes the pair map.
std::vector<ApproximationCandidate> extract_candidates(const TraceSet& traces,
                                                       const AnnotatedDag& aged,
                                                       const CandidateOptions& opts = {});

struct CandidateMix {
  double const0 = 0.0;
  double const1 = 0.0;
  double wire = 0.0;
};

CandidateMix candidate_mix(const std::vector<ApproximationCandidate>& cands);

/// `net replacement gamma` lines.
std::string format_candidates(const Netlist& n, const std::vector<ApproximationCandidate>& cands);

}  // namespace agx

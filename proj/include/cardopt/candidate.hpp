#pragma once

#include "cardopt/common.hpp"

#include <json.hpp>

#include <string>

namespace cardopt {

/// Where a candidate came from: cluster id (-1 for the full universe),
/// BF-DCQO iteration (-1 if not applicable) and processing stage, e.g.
/// "sampled", "polished", "cluster-ls", "recombined", "global-ls".
struct Provenance {
  int cluster = -1;
  int iteration = -1;
  std::string stage;
};

/// A scored bitstring. `energy` is the QUBO (or equivalently Ising) value
/// under the instance that produced it.
struct Candidate {
  Bits bits;
  double energy = 0.0;
  int weight = 0;
  Provenance provenance;
};

nlohmann::json to_json(const Candidate& c);
Candidate candidate_from_json(const nlohmann::json& j, int n_bits);

}  // namespace cardopt

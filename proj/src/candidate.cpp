#include "cardopt/candidate.hpp"

namespace cardopt {

nlohmann::json to_json(const Candidate& c) {
  return {{"bits", bits_to_hex(c.bits)},
          {"energy", c.energy},
          {"weight", c.weight},
          {"provenance",
           {{"cluster", c.provenance.cluster}, {"iteration", c.provenance.iteration}, {"stage", c.provenance.stage}}}};
}

Candidate candidate_from_json(const nlohmann::json& j, int n_bits) {
  Candidate c;
  c.bits = bits_from_hex(j.at("bits").get<std::string>(), n_bits);
  c.energy = j.at("energy").get<double>();
  c.weight = hamming_weight(c.bits);
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    c.provenance = {p.value("cluster", -1), p.value("iteration", -1), p.value("stage", std::string{})};
  }
  return c;
}

}  // namespace cardopt

#pragma once

#include <set>
#include <string>
#include <vector>

#include "formlab/integrability.hpp"

namespace formlab {

struct Check {
  std::string name;    // unique within a report
  std::string detail;  // printed value / explanation
  bool pass;
};

struct CaseReport {
  std::string case_id;
  std::vector<Relation> relations;
  std::vector<Check> checks;

  bool all_pass() const {
    for (const Check& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

enum class EquationType { Hyperbolic, Elliptic, Parabolic };

const char* to_string(EquationType t);

// Rule table mapping commutator contribution tags and the PDE type of the
// flow to the predicted structure; throws UnmappedCombination outside the
// three tabulated configurations.
std::string classify_instability(const std::set<std::string>& contributions,
                                 EquationType type);

// Gas-dynamic scenario: which source terms of the trajectory-chart 1-form
// are active. Contribution tags are derived from the commutator, not the
// flags directly.
struct GasScenario {
  std::string name;
  bool nonstationarity = false;
  bool multiple_connectivity = false;
  bool nonpotential_force = false;
  bool transport = false;
};

std::set<std::string> gas_contributions(const GasScenario& sc);

CaseReport thermo_case();
CaseReport gasdynamics_case();
CaseReport em_case();

std::vector<CaseReport> run_corpus(const std::string& which);  // thermo|gas|em|all

}  // namespace formlab

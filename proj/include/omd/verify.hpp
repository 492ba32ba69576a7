#ifndef OMD_VERIFY_HPP
#define OMD_VERIFY_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "omd/solvers.hpp"

namespace omd {

struct VerifyOptions {
  std::string filter;      // substring on check names; empty runs everything
  bool mutate_eta = false; // test fixture: corrupt the step-size rule
};

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// The fast bound-check battery behind `verify`: geometry identities,
// lambda-root residuals, Lemma 1 sampling, and Theorem 1-5 / Corollary 1
// checks on small seeded instances. Returns one entry per check.
std::vector<VerifyCheck> run_verify_battery(const VerifyOptions& options);

// Prints one line per check; returns the number of failures.
int run_verify(const VerifyOptions& options, std::ostream& os);

// Test fixture: an Alg2-shaped run whose step sizes decay too fast
// (eta = 1/(mu_{1:t} * t)), which the Theorem 2 bound check must reject.
RunTrace corrupted_eta_trace(const OnlineProblem& problem, int target);

}  // namespace omd

#endif  // OMD_VERIFY_HPP

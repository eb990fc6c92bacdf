#ifndef TORUS_VERIFY_HPP
#define TORUS_VERIFY_HPP

#include "torus/integrate.hpp"
#include "torus/solver.hpp"

namespace torus {

struct VerifyOptions {
  double horizon = 1e3;
  int samples = 8;
  unsigned seed = 1;
  int outputs = 64;          // defect measurements per trajectory
  OdeOptions ode;
  double mod_threshold = 1e-8;  // |m|,|M| above this: verified against H_m
};

struct VerifyReport {
  double max_invariance_defect = 0;
  double conjugacy_defect = 0;
  double horizon = 0;
  int samples = 0;
  bool against_modified = false;  // counterterms too large, H_m flow used
  double energy_drift = 0;        // integrator self-diagnostic
};

VerifyReport verify(const ModifiedSolution& sol, const HamiltonianSpec& H,
                    const VerifyOptions& opt = {},
                    const ResidualOptions& ropt = {});

}  // namespace torus

#endif

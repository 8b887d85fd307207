#pragma once

// Measurement instruments built from the E*(V) coupling: outcome
// probabilities, post-measurement states, the neutral pointer position, and
// perfect-correlation diagnostics.

#include "takdual/groups.hpp"
#include "takdual/kt.hpp"
#include "takdual/num.hpp"
#include "takdual/vna.hpp"

#include <optional>
#include <vector>

namespace takdual::measure {

using groups::DualGroup;
using groups::FiniteAbelianGroup;
using num::Cplx;
using num::Index;
using num::Mat;

// Everything the instrument needs: the spectral measure, its coupling, and
// the pointer space carried by the dual group.
struct MeasurementSetup {
  kt::SpectralMeasure spectral;
  Mat coupling;               // E*(V) on H (x) l^2(U^)
  const DualGroup* dual = nullptr;
  const FiniteAbelianGroup* group = nullptr;

  Index system_dim() const { return spectral.dim; }
  Index pointer_dim() const { return dual->size(); }
};

MeasurementSetup make_setup(const kt::SpectralMeasure& e, const DualGroup& dual,
                            const FiniteAbelianGroup& group);

struct InstrumentResult {
  std::vector<int> outcome_atoms;   // indices into spectral.atoms
  double probability = 0.0;
  Mat unnormalized_post;            // positive, trace = probability
  std::optional<Mat> post_state;    // normalized when probability > 0
};

// J(Delta | omega)(B) with the pointer prepared at iota; Delta is a set of
// atom indices. For B = 1 this is the outcome probability.
Cplx instrument(const MeasurementSetup& setup, const std::vector<int>& delta_atoms,
                const vna::StateOnAlgebra& omega, const Mat& b);

// Same pairing realised through the invariant mean over the pointer translate
// family instead of |iota><iota|; the two must agree (finite amenability).
Cplx instrument_via_mean(const MeasurementSetup& setup,
                         const std::vector<int>& delta_atoms,
                         const vna::StateOnAlgebra& omega, const Mat& b);

InstrumentResult post_state(const MeasurementSetup& setup,
                            const std::vector<int>& delta_atoms,
                            const vna::StateOnAlgebra& omega);

struct CorrelationReport {
  struct AtomEntry {
    int atom = 0;
    int character = 0;
    double residual = 0.0;
    bool exact = false;
  };
  std::vector<AtomEntry> atoms;
  bool all_exact = false;
  double worst_residual = 0.0;
};

// E*(V)(xi_gamma (x) |iota>) = xi_gamma (x) |gamma> checked on a basis of
// every atom subspace.
CorrelationReport perfect_correlation_check(const MeasurementSetup& setup,
                                            double tol = 1e-10);

}  // namespace takdual::measure

#include "takdual/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace takdual::measure {

using num::PreconditionError;

namespace {

// chi_Delta on the pointer: sum of |gamma><gamma| over the characters carried
// by the atoms in Delta (shared characters are counted once).
Mat pointer_indicator(const MeasurementSetup& setup, const std::vector<int>& delta_atoms) {
  const Index n = setup.pointer_dim();
  std::set<int> chars;
  for (int a : delta_atoms) {
    if (a < 0 || static_cast<size_t>(a) >= setup.spectral.atoms.size())
      throw PreconditionError("instrument: unknown atom in outcome set");
    chars.insert(setup.spectral.atoms[static_cast<size_t>(a)].character);
  }
  Mat chi = Mat::Zero(n, n);
  for (int c : chars) chi(c, c) = 1.0;
  return chi;
}

Mat conjugated_observable(const MeasurementSetup& setup, const std::vector<int>& delta_atoms,
                          const Mat& b) {
  const Index d = setup.system_dim();
  if (b.rows() != d || b.cols() != d)
    throw PreconditionError("instrument: observable has wrong dimension");
  Mat chi = pointer_indicator(setup, delta_atoms);
  return setup.coupling.adjoint() * num::kron(b, chi) * setup.coupling;
}

}  // namespace

MeasurementSetup make_setup(const kt::SpectralMeasure& e, const DualGroup& dual,
                            const FiniteAbelianGroup& group) {
  MeasurementSetup s;
  s.spectral = e;
  s.coupling = kt::coupling_estar_v(e, dual);
  s.dual = &dual;
  s.group = &group;
  return s;
}

Cplx instrument(const MeasurementSetup& setup, const std::vector<int>& delta_atoms,
                const vna::StateOnAlgebra& omega, const Mat& b) {
  const Index n = setup.pointer_dim();
  Mat k = conjugated_observable(setup, delta_atoms, b);
  Mat iota_proj = Mat::Zero(n, n);
  iota_proj(setup.dual->iota(), setup.dual->iota()) = 1.0;
  return (num::kron(omega.density(), iota_proj) * k).trace();
}

Cplx instrument_via_mean(const MeasurementSetup& setup,
                         const std::vector<int>& delta_atoms,
                         const vna::StateOnAlgebra& omega, const Mat& b) {
  const Index n = setup.pointer_dim();
  Mat k = conjugated_observable(setup, delta_atoms, b);
  // m_U over the translate family of the pointer: the represented group
  // element u acts on l^2(U^) as multiplication by gamma(u).
  Cplx sum = 0;
  for (int u = 0; u < setup.group->order(); ++u) {
    Mat mu = Mat::Zero(n, n);
    for (int g = 0; g < n; ++g) mu(g, g) = setup.dual->character(g)(u);
    sum += (num::kron(omega.density(), mu) * k).trace();
  }
  return sum / static_cast<double>(setup.group->order());
}

InstrumentResult post_state(const MeasurementSetup& setup,
                            const std::vector<int>& delta_atoms,
                            const vna::StateOnAlgebra& omega) {
  const Index n = setup.pointer_dim();
  const Index d = setup.system_dim();
  Mat chi = pointer_indicator(setup, delta_atoms);
  Mat iota_proj = Mat::Zero(n, n);
  iota_proj(setup.dual->iota(), setup.dual->iota()) = 1.0;

  Mat evolved = setup.coupling * num::kron(omega.density(), iota_proj) *
                setup.coupling.adjoint();
  Mat sandwich = num::kron(Mat::Identity(d, d), chi);
  Mat post = num::partial_trace_second(sandwich * evolved * sandwich, d, n);
  post = 0.5 * (post + post.adjoint());

  InstrumentResult result;
  result.outcome_atoms = delta_atoms;
  result.probability = post.trace().real();
  result.unnormalized_post = post;
  if (result.probability > 1e-12)
    result.post_state = post / result.probability;
  return result;
}

CorrelationReport perfect_correlation_check(const MeasurementSetup& setup, double tol) {
  CorrelationReport report;
  const Index n = setup.pointer_dim();
  const Index d = setup.system_dim();
  report.all_exact = true;
  for (size_t k = 0; k < setup.spectral.atoms.size(); ++k) {
    const auto& atom = setup.spectral.atoms[k];
    num::HermEig e = num::eig_hermitian(atom.projection);
    double worst = 0;
    for (Index i = 0; i < d; ++i) {
      if (e.values[i] < 0.5) continue;
      num::CVec xi = e.vectors.col(i);
      num::CVec in = num::CVec::Zero(d * n);
      num::CVec expect = num::CVec::Zero(d * n);
      for (Index r = 0; r < d; ++r) {
        in[r * n + setup.dual->iota()] = xi[r];
        expect[r * n + atom.character] = xi[r];
      }
      worst = std::max(worst, (setup.coupling * in - expect).norm());
    }
    bool ok = worst <= tol;
    report.atoms.push_back({static_cast<int>(k), atom.character, worst, ok});
    report.all_exact = report.all_exact && ok;
    report.worst_residual = std::max(report.worst_residual, worst);
  }
  return report;
}

}  // namespace takdual::measure

#pragma once

// Abelian W*-dynamical systems as permutation actions on finite atom sets:
// freeness, ergodicity, the crossed-product characterisations, the type
// classifier against the translation flow, and the modular spectrum.

#include "takdual/crossed.hpp"
#include "takdual/groups.hpp"
#include "takdual/vna.hpp"

#include <string>
#include <vector>

namespace takdual::dynsys {

using groups::FiniteAbelianGroup;
using num::Index;
using num::Mat;
using vna::BlockInvariant;
using vna::OperatorAlgebra;

// beta as a permutation representation: perms[g][x] is the image atom of x
// under beta_g.
struct AbelianDynamicalSystem {
  int atoms = 1;
  FiniteAbelianGroup group{std::vector<int>{1}};
  std::vector<std::vector<int>> perms;

  static AbelianDynamicalSystem from_generator_perms(
      int atoms, FiniteAbelianGroup group,
      const std::vector<std::vector<int>>& generator_perms);

  void validate() const;  // beta_e = id and beta_{gh} = beta_g beta_h
  int apply(int g, int x) const { return perms[static_cast<size_t>(g)][static_cast<size_t>(x)]; }
  Mat permutation_matrix(int g) const;

  // The diagonal algebra on the atoms together with the permutation action.
  crossed::GroupAction as_action(double tol) const;

  std::vector<std::vector<int>> orbits() const;
  std::vector<int> fixed_atoms(int g) const;
};

bool is_free(const AbelianDynamicalSystem& sys);
bool is_ergodic(const AbelianDynamicalSystem& sys);

struct Prop2Report {
  bool free = false;
  bool masa = false;
  bool clause_i = false;          // free <=> MASA
  bool ergodic = false;
  bool factor = false;
  bool clause_ii_factor = false;  // (when free) factor <=> ergodic
  bool clause_ii_center = false;  // (when free) Z(Q) = pi_beta(A^beta)
  bool applicable_ii = false;
  BlockInvariant q_invariant;
  bool all_pass() const {
    return clause_i && (!applicable_ii || (clause_ii_factor && clause_ii_center));
  }
};

Prop2Report proposition2_check(const AbelianDynamicalSystem& sys, double tol,
                               std::uint64_t seed = 0);

// N = A (x) B(C^h) with theta_g = beta_g (x) Ad(U_g).
struct CovariantSystem {
  AbelianDynamicalSystem central;
  Index block_dim = 1;
  std::vector<Mat> block_unitaries;  // U_g per group element

  static CovariantSystem from_generator_data(AbelianDynamicalSystem central,
                                             Index block_dim,
                                             const std::vector<Mat>& generator_unitaries);

  Index ambient() const { return static_cast<Index>(central.atoms) * block_dim; }
  Mat implementer(int g) const;  // P_g (x) U_g
  OperatorAlgebra n_algebra(double tol) const;
  crossed::GroupAction theta(double tol) const;
};

struct Prop3Report {
  bool centrally_free = false;
  bool relation_center = false;   // pi_beta(Z(N)) = M cap pi_theta(N)'
  bool relation_algebra = false;  // pi_theta(N)    = M cap pi_beta(Z(N))'
  bool relation_fixed = false;    // pi_theta(N^theta) = M cap Q'
  bool covered_by_hypothesis = false;
  bool corollary_center_chain = false;  // Z(M) = Z(Q) = pi_beta(Z(N)^beta)
  bool all_pass() const {
    return relation_center && relation_algebra && relation_fixed;
  }
};

Prop3Report proposition3_check(const CovariantSystem& cov, double tol,
                               std::uint64_t seed = 0);

struct TypeReport {
  bool centrally_ergodic = false;
  bool factor = false;
  std::string verdict;            // "type I" or "not a factor"
  bool flow_isomorphic = false;
  std::vector<int> flow_bijection;        // g -> atom, empty unless type I
  bool has_invariant_measure = false;
  std::vector<double> invariant_measure;  // normalized when it exists
  bool consistency_ok = false;    // factor => flow-isomorphic at finite dim
  BlockInvariant crossed_invariant;
  std::string note;
};

TypeReport classify_type(const CovariantSystem& cov, double tol,
                         std::uint64_t seed = 0);

// Intersection of relative modular spectra over the supplied faithful weight
// family (plus the uniform weight) and all dual-action elements.
struct ModularSpectrumReport {
  std::vector<double> spectrum;
  std::string note;
};

ModularSpectrumReport modular_spectrum(const AbelianDynamicalSystem& sys,
                                       const std::vector<std::vector<double>>& weights,
                                       double tol);

// Every action of `group` on 1..max_atoms atoms (all homomorphisms into the
// symmetric groups), for the exhaustive proposition sweeps.
std::vector<AbelianDynamicalSystem> enumerate_actions(const FiniteAbelianGroup& group,
                                                      int max_atoms);

}  // namespace takdual::dynsys

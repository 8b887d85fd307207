#include "takdual/scenario.hpp"

#include "takdual/crossed.hpp"
#include "takdual/dynsys.hpp"
#include "takdual/groups.hpp"
#include "takdual/kt.hpp"
#include "takdual/measure.hpp"
#include "takdual/modular.hpp"
#include "takdual/num.hpp"
#include "takdual/vna.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>

namespace takdual::scenario {

using json = nlohmann::ordered_json;
using crossed::GroupAction;
using groups::DualGroup;
using groups::FiniteAbelianGroup;
using num::AmbiguityError;
using num::Cplx;
using num::CVec;
using num::Index;
using num::Mat;
using num::PreconditionError;
using vna::OperatorAlgebra;

namespace {

// ---------------------------------------------------------------------------
// JSON <-> matrix conversions; matrices are nested arrays of [re, im] pairs.

// Computed numbers are rounded to 12 significant digits (and sub-noise
// magnitudes to zero) before they enter a report: heap-alignment-dependent
// SIMD reduction orders otherwise flip last bits between identical runs,
// breaking byte-determinism of the reports.
double quantize(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  if (std::abs(x) < 1e-13) return 0.0;
  const double mag = std::pow(10.0, std::floor(std::log10(std::abs(x))));
  return std::round(x / mag * 1e11) / 1e11 * mag;
}

json quantize_tree(json j) {
  if (j.is_number_float()) return quantize(j.get<double>());
  if (j.is_array() || j.is_object())
    for (auto& item : j) item = quantize_tree(item);
  return j;
}

Cplx parse_entry(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("matrix entry must be a [re, im] pair");
  return Cplx(j[0].get<double>(), j[1].get<double>());
}

Mat parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix must be a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Index>(j[r].size()) != cols)
      throw ParseError("matrix rows have inconsistent lengths");
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_entry(j[r][c]);
  }
  return m;
}

CVec parse_vector(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("vector must be a non-empty array");
  CVec v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = parse_entry(j[i]);
  return v;
}

json dump_matrix(const Mat& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Parsed scenario

struct Scenario {
  json raw;
  double tolerance = num::kDefaultTol;
  std::uint64_t seed = 0;

  std::optional<FiniteAbelianGroup> group;
  std::shared_ptr<OperatorAlgebra> algebra;
  std::optional<GroupAction> action;
  std::shared_ptr<OperatorAlgebra> masa;
  std::optional<vna::StateOnAlgebra> state;
  std::vector<Mat> weights;

  std::optional<dynsys::AbelianDynamicalSystem> dyn;
  std::optional<dynsys::CovariantSystem> covariant;
  std::vector<std::vector<double>> atom_weights;
  bool enumerate = false;
  std::vector<std::vector<int>> enumerate_groups;
  int enumerate_max_atoms = 4;

  json semi_duality;  // null | "auto" | {"matrix": ...}
  std::optional<std::pair<int, int>> tamper_swap;
};

std::shared_ptr<OperatorAlgebra> parse_algebra(const json& j, double tol,
                                               std::uint64_t seed) {
  const std::string type = j.value("type", "");
  if (type == "full") {
    return std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(j.at("dim").get<int>()));
  } else if (type == "diagonal") {
    return std::make_shared<OperatorAlgebra>(
        OperatorAlgebra::diagonal(j.at("dim").get<int>()));
  } else if (type == "scalars") {
    return std::make_shared<OperatorAlgebra>(
        OperatorAlgebra::scalars(j.at("dim").get<int>()));
  } else if (type == "blocks") {
    std::vector<std::pair<int, int>> blocks;
    for (const auto& b : j.at("blocks"))
      blocks.emplace_back(b.at(0).get<int>(), b.at(1).get<int>());
    return std::make_shared<OperatorAlgebra>(OperatorAlgebra::from_blocks(blocks));
  } else if (type == "generators") {
    std::vector<Mat> gens;
    for (const auto& g : j.at("matrices")) gens.push_back(parse_matrix(g));
    if (gens.empty()) throw ParseError("algebra: empty generator list");
    return std::make_shared<OperatorAlgebra>(
        vna::generate(gens, gens.front().rows(), tol, seed));
  }
  throw ParseError("algebra: unknown type '" + type + "'");
}

Scenario parse_scenario(const std::string& text, const Config& config) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");
  if (j.value("schema", 1) != 1) throw ParseError("unsupported scenario schema version");

  Scenario s;
  s.raw = j;
  s.tolerance = config.tolerance_overridden ? config.tolerance
                                            : j.value("tolerance", num::kDefaultTol);
  s.seed = config.seed_overridden ? config.seed : j.value("seed", std::uint64_t{0});
  if (!(s.tolerance > 0)) throw ParseError("tolerance must be positive");

  try {
    if (j.contains("group")) {
      std::vector<int> orders = j.at("group").get<std::vector<int>>();
      s.group = FiniteAbelianGroup(orders);
    }
    if (j.contains("algebra")) s.algebra = parse_algebra(j.at("algebra"), s.tolerance, s.seed);

    if (j.contains("masa")) {
      const auto& m = j.at("masa");
      const std::string type = m.value("type", "");
      if (type == "diagonal") {
        if (!s.algebra) throw ParseError("masa: diagonal needs an algebra for its dimension");
        s.masa = std::make_shared<OperatorAlgebra>(
            OperatorAlgebra::diagonal(s.algebra->dim()));
      } else if (type == "generators") {
        std::vector<Mat> gens;
        for (const auto& g : m.at("matrices")) gens.push_back(parse_matrix(g));
        if (gens.empty()) throw ParseError("masa: empty generator list");
        s.masa = std::make_shared<OperatorAlgebra>(
            vna::generate(gens, gens.front().rows(), s.tolerance, s.seed));
      } else {
        throw ParseError("masa: unknown type '" + type + "'");
      }
    }

    if (j.contains("action")) {
      if (!s.group) throw ParseError("action requires a group");
      if (!s.algebra) throw ParseError("action requires an algebra");
      const auto& a = j.at("action");
      const std::string type = a.value("type", "inner");
      if (type != "inner") throw ParseError("action: unknown type '" + type + "'");
      std::vector<Mat> unitaries;
      for (const auto& u : a.at("unitaries")) unitaries.push_back(parse_matrix(u));
      s.action = GroupAction::from_generator_unitaries(*s.group, s.algebra, unitaries,
                                                       s.tolerance);
    }

    if (j.contains("state")) {
      const auto& st = j.at("state");
      const std::string type = st.value("type", "");
      if (type == "vector")
        s.state = vna::StateOnAlgebra::from_vector(parse_vector(st.at("value")),
                                                   s.tolerance);
      else if (type == "density")
        s.state = vna::StateOnAlgebra::from_density(parse_matrix(st.at("value")),
                                                    s.tolerance);
      else
        throw ParseError("state: unknown type '" + type + "'");
    }
    if (j.contains("weights"))
      for (const auto& w : j.at("weights")) s.weights.push_back(parse_matrix(w));

    if (j.contains("dynsys")) {
      const auto& d = j.at("dynsys");
      if (d.contains("enumerate")) {
        s.enumerate = true;
        const auto& e = d.at("enumerate");
        for (const auto& g : e.at("groups"))
          s.enumerate_groups.push_back(g.get<std::vector<int>>());
        s.enumerate_max_atoms = e.value("max_atoms", 4);
      } else {
        if (!s.group) throw ParseError("dynsys requires a group");
        int atoms = d.at("atoms").get<int>();
        std::vector<std::vector<int>> perms;
        for (const auto& p : d.at("permutations"))
          perms.push_back(p.get<std::vector<int>>());
        s.dyn = dynsys::AbelianDynamicalSystem::from_generator_perms(atoms, *s.group,
                                                                     perms);
        Index h = d.value("block_dim", 1);
        std::vector<Mat> us;
        if (d.contains("block_unitaries"))
          for (const auto& u : d.at("block_unitaries")) us.push_back(parse_matrix(u));
        else
          us.assign(static_cast<size_t>(s.group->rank()), Mat::Identity(h, h));
        s.covariant = dynsys::CovariantSystem::from_generator_data(*s.dyn, h, us);
        if (d.contains("weights"))
          for (const auto& w : d.at("weights"))
            s.atom_weights.push_back(w.get<std::vector<double>>());
      }
    }

    if (j.contains("semi_duality")) s.semi_duality = j.at("semi_duality");
    if (j.contains("tamper")) {
      const auto& t = j.at("tamper").at("swap_atoms");
      s.tamper_swap = std::make_pair(t.at(0).get<int>(), t.at(1).get<int>());
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario field error: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Check collection

struct Checks {
  json list = json::array();
  bool any_failed = false;
  bool any_precondition = false;
  bool any_ambiguous = false;

  void add(const std::string& name, bool pass, double residual, json details = {}) {
    json c;
    c["name"] = name;
    c["status"] = pass ? "pass" : "fail";
    c["residual"] = residual;
    if (!details.is_null()) c["details"] = std::move(details);
    list.push_back(std::move(c));
    any_failed = any_failed || !pass;
  }
  void not_applicable(const std::string& name, const std::string& why) {
    json c;
    c["name"] = name;
    c["status"] = "not_applicable";
    c["details"] = why;
    list.push_back(std::move(c));
  }
  void precondition(const std::string& name, const std::string& what) {
    json c;
    c["name"] = name;
    c["status"] = "precondition_failed";
    c["details"] = what;
    list.push_back(std::move(c));
    any_precondition = true;
  }
  void ambiguous(const std::string& name, const std::string& what) {
    json c;
    c["name"] = name;
    c["status"] = "ambiguous";
    c["details"] = what;
    list.push_back(std::move(c));
    any_ambiguous = true;
  }
};

json invariant_json(const vna::BlockInvariant& inv) {
  json blocks = json::array();
  for (auto& [n, m] : inv.blocks) blocks.push_back({n, m});
  json out;
  out["blocks"] = std::move(blocks);
  out["display"] = inv.to_string();
  return out;
}

std::string character_label(const DualGroup& dual, int index) {
  auto t = dual.as_group().tuple(index);
  std::string out = "chi(";
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(t[i]);
  }
  out += ")";
  return out;
}

// Measurement data shared by `measure` and parts of `theorem1`.
struct MeasureContext {
  DualGroup dual;
  kt::SpectralMeasure spectral;
  measure::MeasurementSetup setup;
};

MeasureContext build_measure_context(const Scenario& s) {
  if (!s.group || !s.action || !s.masa)
    throw PreconditionError("measurement needs group, action and masa");
  MeasureContext ctx{DualGroup(*s.group), {}, {}};
  ctx.spectral = kt::spectral_measure(
      *s.masa, *s.group, [&](int u) { return s.action->implementer(u); }, ctx.dual,
      s.tolerance, s.seed);
  ctx.setup = measure::make_setup(ctx.spectral, ctx.dual, *s.group);
  if (s.tamper_swap) {
    auto [i, k] = *s.tamper_swap;
    if (i < 0 || k < 0 || static_cast<size_t>(i) >= ctx.spectral.atoms.size() ||
        static_cast<size_t>(k) >= ctx.spectral.atoms.size())
      throw PreconditionError("tamper: atom index out of range");
    kt::SpectralMeasure corrupted = ctx.spectral;
    std::swap(corrupted.atoms[static_cast<size_t>(i)].character,
              corrupted.atoms[static_cast<size_t>(k)].character);
    ctx.setup.coupling = kt::coupling_estar_v(corrupted, ctx.dual);
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// Command handlers

void cmd_sectors(const Scenario& s, Checks& checks, json& results) {
  if (!s.algebra) throw PreconditionError("sectors: scenario has no algebra");
  auto dec = vna::sector_decompose(*s.algebra, s.tolerance, s.seed);
  json sectors = json::array();
  Mat sum = Mat::Zero(s.algebra->dim(), s.algebra->dim());
  for (auto& sec : dec.sectors) {
    sectors.push_back({{"block_size", sec.block_size},
                       {"multiplicity", sec.multiplicity},
                       {"rank", static_cast<int>(std::lround(
                                    sec.central_projection.trace().real()))}});
    sum += sec.central_projection;
  }
  results["sectors"] = std::move(sectors);
  results["invariant"] = invariant_json(dec.invariant());
  checks.add("sectors.partition_of_unity",
             (sum - Mat::Identity(s.algebra->dim(), s.algebra->dim())).norm() < 1e-9,
             (sum - Mat::Identity(s.algebra->dim(), s.algebra->dim())).norm());
  checks.add("sectors.dimension_identity",
             dec.invariant().linear_dim() == s.algebra->linear_dim() &&
                 dec.invariant().ambient_dim() == s.algebra->dim(),
             0.0);

  if (s.state) {
    auto mu = vna::qc_channel(*s.state, *s.algebra, s.tolerance, s.seed);
    results["qc_channel"] = mu;
    double total = 0;
    for (double p : mu) total += p;
    checks.add("sectors.qc_channel_distribution", std::abs(total - 1.0) < 1e-8,
               std::abs(total - 1.0));

    // central support of the cyclic subspace generated by the state
    num::HermEig e = num::eig_hermitian(s.state->density());
    Mat cols(s.algebra->dim(), s.algebra->dim());
    Index c = 0;
    for (Index i = 0; i < e.values.size(); ++i)
      if (e.values[i] > 1e-12) cols.col(c++) = e.vectors.col(i);
    cols.conservativeResize(s.algebra->dim(), c);
    // grow to the invariant subspace and take its projection
    Mat grown = cols;
    for (const Mat& b : s.algebra->basis()) {
      Mat more(s.algebra->dim(), grown.cols() + cols.cols());
      more.leftCols(grown.cols()) = grown;
      more.rightCols(cols.cols()) = b * cols;
      grown = num::orthonormal_columns(more, 1e-10);
    }
    Mat support = grown * grown.adjoint();
    Mat z = vna::central_support(support, *s.algebra, s.tolerance);
    results["state_central_support_rank"] =
        static_cast<int>(std::lround(z.trace().real()));
  }
}

void cmd_measure(const Scenario& s, Checks& checks, json& results) {
  MeasureContext ctx = build_measure_context(s);
  if (!s.state) throw PreconditionError("measure: scenario has no state");
  const Index d = ctx.setup.system_dim();

  json atoms = json::array();
  double total = 0;
  double born_worst = 0;
  for (size_t k = 0; k < ctx.spectral.atoms.size(); ++k) {
    auto r = measure::post_state(ctx.setup, {static_cast<int>(k)}, *s.state);
    // independent Born-rule oracle
    const Mat& p = ctx.spectral.atoms[k].projection;
    double born = (p * s.state->density()).trace().real();
    born_worst = std::max(born_worst, std::abs(r.probability - born));
    total += r.probability;
    json a;
    a["atom"] = static_cast<int>(k);
    a["character"] = character_label(ctx.dual, ctx.spectral.atoms[k].character);
    a["probability"] = r.probability;
    if (r.post_state) a["post_state"] = dump_matrix(*r.post_state);
    atoms.push_back(std::move(a));
  }
  results["atoms"] = std::move(atoms);
  results["injective"] = ctx.spectral.injective;
  checks.add("measure.total_probability", std::abs(total - 1.0) < 1e-9,
             std::abs(total - 1.0));
  checks.add("measure.born_oracle", born_worst < 1e-10, born_worst);

  // neutral position: |iota><iota| pairing against the invariant-mean form
  num::Rng rng(s.seed ^ 0x6d656173);
  double neutral_worst = 0;
  Mat b = rng.hermitian(d);
  for (size_t k = 0; k < ctx.spectral.atoms.size(); ++k) {
    Cplx a1 = measure::instrument(ctx.setup, {static_cast<int>(k)}, *s.state, b);
    Cplx a2 = measure::instrument_via_mean(ctx.setup, {static_cast<int>(k)}, *s.state, b);
    neutral_worst = std::max(neutral_worst, std::abs(a1 - a2));
  }
  checks.add("measure.neutral_position_mean_agreement", neutral_worst < 1e-10,
             neutral_worst);

  // additivity over a two-atom split when possible
  if (ctx.spectral.atoms.size() >= 2) {
    Cplx lhs = measure::instrument(ctx.setup, {0, 1}, *s.state, b);
    Cplx rhs = measure::instrument(ctx.setup, {0}, *s.state, b) +
               measure::instrument(ctx.setup, {1}, *s.state, b);
    checks.add("measure.additivity", std::abs(lhs - rhs) < 1e-10, std::abs(lhs - rhs));
  }

  // repeatability on the first outcome with nonzero probability
  for (size_t k = 0; k < ctx.spectral.atoms.size(); ++k) {
    auto first = measure::post_state(ctx.setup, {static_cast<int>(k)}, *s.state);
    if (first.probability < 1e-8) continue;
    auto again = measure::post_state(
        ctx.setup, {static_cast<int>(k)},
        vna::StateOnAlgebra::from_density(*first.post_state, s.tolerance));
    checks.add("measure.repeatability", std::abs(again.probability - 1.0) < 1e-9,
               std::abs(again.probability - 1.0));
    break;
  }

  auto corr = measure::perfect_correlation_check(ctx.setup, 1e-10);
  json catoms = json::array();
  for (auto& a : corr.atoms)
    catoms.push_back({{"atom", a.atom},
                      {"character", character_label(ctx.dual, a.character)},
                      {"residual", a.residual},
                      {"exact", a.exact}});
  results["perfect_correlation"] = corr.all_exact;
  results["perfect_correlation_atoms"] = std::move(catoms);
  checks.add("measure.perfect_correlation", corr.all_exact, corr.worst_residual);

  // Optional outcome sampling: a seeded convenience on top of the exact
  // probabilities (which stay the source of truth).
  if (s.raw.contains("samples")) {
    const int count = s.raw.at("samples").get<int>();
    std::vector<double> cumulative;
    double acc = 0;
    for (size_t k = 0; k < ctx.spectral.atoms.size(); ++k) {
      auto r = measure::post_state(ctx.setup, {static_cast<int>(k)}, *s.state);
      acc += r.probability;
      cumulative.push_back(acc);
    }
    num::Rng sampler(s.seed ^ 0x73616d70);
    std::vector<int> counts(ctx.spectral.atoms.size(), 0);
    for (int t = 0; t < count; ++t) {
      double u = sampler.uniform() * acc;
      size_t k = 0;
      while (k + 1 < cumulative.size() && u > cumulative[k]) ++k;
      ++counts[k];
    }
    results["sampled_counts"] = counts;
    results["sample_size"] = count;
  }

  if (s.raw.value("export_operators", false)) {
    auto v_op = kt::build_V(ctx.dual);
    results["operator_v"] = dump_matrix(v_op.matrix);
    results["operator_estar_v"] = dump_matrix(ctx.setup.coupling);
  }

  // pentagonal data for the couplings in play
  auto v = kt::build_V(ctx.dual);
  checks.add("measure.pentagon_V", kt::pentagon_residual(v.matrix, ctx.dual.size()) < 1e-10,
             kt::pentagon_residual(v.matrix, ctx.dual.size()));
  double mod = kt::modified_pentagon_residual(ctx.setup.coupling, d, ctx.dual.size(),
                                              v.matrix);
  checks.add("measure.modified_pentagon_EstarV", mod < 1e-10, mod);
}

void cmd_crossed(const Scenario& s, Checks& checks, json& results) {
  if (!s.action) throw PreconditionError("crossed-product: scenario has no action");
  auto cp = crossed::crossed_product(*s.action, s.tolerance, s.seed);
  results["invariant"] = invariant_json(cp.invariant);
  results["ambient_dim"] = static_cast<int>(cp.ambient);
  results["linear_dim"] = static_cast<int>(cp.algebra.linear_dim());
  checks.add("crossed.covariance", cp.covariance_residual < 1e-9,
             cp.covariance_residual);

  const int n = s.group->order();
  // EW conjugation matches the covariant embedding for inner actions.
  if (s.action->inner() && s.masa) {
    try {
      DualGroup dual(*s.group);
      auto e = kt::spectral_measure(
          *s.masa, *s.group, [&](int u) { return s.action->implementer(u); }, dual,
          s.tolerance, s.seed);
      Mat ew = kt::coupling_ew(e, *s.group, dual);
      num::Rng rng(s.seed ^ 0x63726f73);
      double worst = 0;
      for (int t = 0; t < 3; ++t) {
        Mat x = rng.gaussian_matrix(s.algebra->dim(), s.algebra->dim());
        Mat lhs = ew * num::kron(x, Mat::Identity(n, n)) * ew.adjoint();
        worst = std::max(worst, (lhs - cp.pi(x)).norm());
      }
      checks.add("crossed.pi_alpha_equals_EW_conjugation", worst < 1e-10, worst);

      // centre = character-twisted copy of the MASA when U generates it
      if (e.injective) {
        auto z = vna::center(cp.algebra, s.tolerance);
        std::vector<Mat> q_chi;
        for (int c = 0; c < dual.size(); ++c) {
          groups::Character chi = dual.character(c);
          Mat q = Mat::Zero(cp.ambient, cp.ambient);
          for (int u = 0; u < n; ++u)
            q += std::conj(chi(u)) * num::kron(e.embedded_unitary(dual, u).adjoint().eval(),
                                               s.group->left_translation(u));
          q /= static_cast<double>(n);
          q_chi.push_back(std::move(q));
        }
        auto span = num::MatSubspace::from_span(q_chi, 1e-10);
        bool center_ok = static_cast<int>(z.linear_dim()) == dual.size() &&
                         z.subspace().equals(span, 1e-8);
        checks.add("crossed.center_is_twisted_masa", center_ok, 0.0,
                   json{{"center_dim", static_cast<int>(z.linear_dim())}});
      }
    } catch (const PreconditionError& e) {
      checks.not_applicable("crossed.pi_alpha_equals_EW_conjugation", e.what());
    }
  }

  // convolution algebra and operator-valued Fourier transform
  num::Rng rng(s.seed ^ 0x464f5552);
  const Index d = s.algebra->dim();
  auto random_fn = [&]() {
    crossed::MFunction f(static_cast<size_t>(n));
    for (int u = 0; u < n; ++u) f[static_cast<size_t>(u)] = rng.gaussian_matrix(d, d);
    return f;
  };
  double hom_worst = 0, inv_worst = 0, unit_worst = 0;
  for (int t = 0; t < 3; ++t) {
    auto x = random_fn();
    auto y = random_fn();
    Mat lhs = crossed::op_fourier(crossed::convolution_product(x, y, *s.action), *s.action);
    Mat rhs = crossed::op_fourier(x, *s.action) * crossed::op_fourier(y, *s.action);
    hom_worst = std::max(hom_worst, (lhs - rhs).norm());
    Mat li = crossed::op_fourier(crossed::involution(x, *s.action), *s.action);
    inv_worst = std::max(inv_worst, (li - crossed::op_fourier(x, *s.action).adjoint()).norm());
  }
  Mat unit_img = crossed::op_fourier(crossed::delta_unit(*s.action), *s.action);
  unit_worst = (unit_img - Mat::Identity(cp.ambient, cp.ambient)).norm();
  checks.add("crossed.fourier_homomorphism", hom_worst < 1e-9, hom_worst);
  checks.add("crossed.fourier_involution", inv_worst < 1e-10, inv_worst);
  checks.add("crossed.fourier_unit", unit_worst < 1e-12, unit_worst);

  // dual action: fixed points and the coaction cross-validation
  DualGroup dual(*s.group);
  auto hat = crossed::dual_action(cp, dual, s.tolerance);
  double co_res = crossed::dual_coaction_residual(cp, dual);
  checks.add("crossed.dual_coaction_form", co_res < 1e-9, co_res);
  auto fixed = crossed::fixed_point_algebra(hat, s.tolerance);
  std::vector<Mat> pi_m;
  for (const Mat& b : s.algebra->basis()) pi_m.push_back(cp.pi(b));
  auto pim = num::MatSubspace::from_span(pi_m, 1e-10);
  checks.add("crossed.dual_fixed_points_are_pi_M", fixed.subspace().equals(pim, 1e-8),
             0.0);
}

void cmd_duality(const Scenario& s, Checks& checks, json& results) {
  if (!s.action) throw PreconditionError("duality-check: scenario has no action");
  auto report = crossed::takesaki_duality_check(*s.action, s.tolerance, s.seed);
  results["second_crossed_invariant"] = invariant_json(report.second_crossed);
  results["amplified_invariant"] = invariant_json(report.amplified);
  results["note"] = report.note;
  checks.add("duality.block_invariants_match", report.match, 0.0,
             json{{"second_crossed", report.second_crossed.to_string()},
                  {"amplified", report.amplified.to_string()}});

  // Fourier conjugacy of the two K-T operators used in the construction
  DualGroup dual(*s.group);
  auto v = kt::build_V(dual);
  auto w = kt::build_W(*s.group);
  double fr = kt::fourier_conjugacy_residual(w, v, *s.group);
  checks.add("duality.fourier_conjugacy_W_V", fr < 1e-10, fr);
  checks.add("duality.pentagon_W",
             kt::pentagon_residual(w.matrix, s.group->order()) < 1e-10,
             kt::pentagon_residual(w.matrix, s.group->order()));

  if (s.raw.value("export_operators", false)) {
    results["operator_v"] = dump_matrix(v.matrix);
    results["operator_w"] = dump_matrix(w.matrix);
  }
}

void cmd_theorem1(const Scenario& s, Checks& checks, json& results) {
  if (!s.action || !s.masa)
    throw PreconditionError("theorem1: scenario needs action and masa");
  auto report = crossed::theorem1_split_check(*s.action, *s.masa, s.tolerance, s.seed);
  checks.add("theorem1.hypothesis_masa", report.masa_ok, 0.0);
  checks.add("theorem1.hypothesis_fixed_point", report.fixed_point_ok, 0.0);
  checks.add("theorem1.hypothesis_generating", report.generating_ok, 0.0);
  if (!report.hypotheses_ok) {
    results["hypothesis_diagnostic"] = report.hypothesis_diagnostic;
    checks.not_applicable("theorem1.amplification",
                          "hypotheses fail: " + report.hypothesis_diagnostic);
    checks.not_applicable("theorem1.reconstruction",
                          "hypotheses fail: " + report.hypothesis_diagnostic);
  } else {
    checks.add("theorem1.amplification", report.amplification_match, 0.0,
               json{{"crossed", report.crossed_inv.to_string()},
                    {"A_amplified", report.amplification_side.to_string()}});
    checks.add("theorem1.reconstruction", report.reconstruction_match, 0.0,
               json{{"second_crossed", report.second_crossed_inv.to_string()},
                    {"M_amplified", report.reconstruction_side.to_string()}});
  }
  results["crossed_invariant"] = invariant_json(report.crossed_inv);
  results["second_crossed_invariant"] = invariant_json(report.second_crossed_inv);

  // semi-duality witness, when requested
  if (s.semi_duality.is_null()) {
    checks.not_applicable("theorem1.semi_duality", "no witness requested");
    return;
  }
  try {
    Mat witness;
    if (s.semi_duality.is_string() && s.semi_duality.get<std::string>() == "auto") {
      MeasureContext ctx = build_measure_context(s);
      witness = crossed::semi_duality_witness(*s.action, ctx.spectral);
    } else if (s.semi_duality.is_object() && s.semi_duality.contains("matrix")) {
      witness = parse_matrix(s.semi_duality.at("matrix"));
    } else {
      throw ParseError("semi_duality must be \"auto\" or {\"matrix\": ...}");
    }
    auto sd = crossed::semi_duality_check(*s.action, witness, s.tolerance);
    results["semi_duality_residual"] = sd.residual;
    checks.add("theorem1.semi_duality", sd.witness_valid && sd.holds, sd.residual,
               json{{"witness_valid", sd.witness_valid}, {"note", sd.note}});
  } catch (const PreconditionError& e) {
    checks.not_applicable("theorem1.semi_duality", e.what());
  }
}

void cmd_classify(const Scenario& s, Checks& checks, json& results) {
  if (!s.covariant) throw PreconditionError("classify: scenario has no dynsys block");
  auto rep = dynsys::classify_type(*s.covariant, s.tolerance, s.seed);
  results["verdict"] = rep.verdict;
  results["centrally_ergodic"] = rep.centrally_ergodic;
  results["factor"] = rep.factor;
  results["flow_isomorphic"] = rep.flow_isomorphic;
  results["crossed_invariant"] = invariant_json(rep.crossed_invariant);
  results["note"] = rep.note;
  if (!rep.flow_bijection.empty()) results["flow_bijection"] = rep.flow_bijection;
  if (rep.has_invariant_measure) results["invariant_measure"] = rep.invariant_measure;
  checks.add("classify.theorem4_consistency", rep.consistency_ok, 0.0,
             json{{"verdict", rep.verdict}});
  if (rep.factor)
    checks.add("classify.type_I_flow_isomorphism", rep.flow_isomorphic, 0.0);

  auto spec_rep = dynsys::modular_spectrum(s.dyn.value(), s.atom_weights, s.tolerance);
  results["modular_spectrum"] = spec_rep.spectrum;
  results["modular_spectrum_note"] = spec_rep.note;
  bool contains_one = false;
  for (double v : spec_rep.spectrum)
    if (std::abs(v - 1.0) < 1e-8) contains_one = true;
  checks.add("classify.modular_spectrum_contains_one", contains_one, 0.0);
}

void cmd_verify_props(const Scenario& s, Checks& checks, json& results) {
  if (s.enumerate) {
    int systems = 0, prop2_failures = 0, ergodic_faithful = 0, free_failures = 0;
    for (const auto& shape : s.enumerate_groups) {
      FiniteAbelianGroup g(shape);
      auto all = dynsys::enumerate_actions(g, s.enumerate_max_atoms);
      for (const auto& sys : all) {
        ++systems;
        auto rep = dynsys::proposition2_check(sys, s.tolerance, s.seed);
        if (!rep.all_pass()) ++prop2_failures;
        bool faithful = true;
        for (int gg = 0; gg < sys.group.order(); ++gg) {
          if (gg == sys.group.identity()) continue;
          bool trivial = true;
          for (int x = 0; x < sys.atoms; ++x)
            if (sys.apply(gg, x) != x) trivial = false;
          if (trivial) faithful = false;
        }
        if (faithful && dynsys::is_ergodic(sys)) {
          ++ergodic_faithful;
          if (!dynsys::is_free(sys)) ++free_failures;
        }
      }
    }
    results["systems"] = systems;
    results["ergodic_faithful_systems"] = ergodic_faithful;
    checks.add("props.proposition2_enumeration", prop2_failures == 0,
               static_cast<double>(prop2_failures), json{{"systems", systems}});
    checks.add("props.ergodic_implies_free_faithful", free_failures == 0,
               static_cast<double>(free_failures));
    return;
  }
  if (!s.dyn) throw PreconditionError("verify-props: scenario has no dynsys block");
  auto rep = dynsys::proposition2_check(*s.dyn, s.tolerance, s.seed);
  results["free"] = rep.free;
  results["ergodic"] = rep.ergodic;
  results["masa"] = rep.masa;
  results["factor"] = rep.factor;
  results["q_invariant"] = invariant_json(rep.q_invariant);
  checks.add("props.prop2_free_iff_masa", rep.clause_i, 0.0);
  if (rep.applicable_ii) {
    checks.add("props.prop2_factor_iff_ergodic", rep.clause_ii_factor, 0.0);
    checks.add("props.prop2_center_is_fixed_algebra", rep.clause_ii_center, 0.0);
  } else {
    checks.not_applicable("props.prop2_factor_iff_ergodic", "action is not free");
    checks.not_applicable("props.prop2_center_is_fixed_algebra", "action is not free");
  }

  if (s.covariant) {
    auto p3 = dynsys::proposition3_check(*s.covariant, s.tolerance, s.seed);
    results["centrally_free"] = p3.centrally_free;
    if (p3.covered_by_hypothesis) {
      checks.add("props.prop3_center_relation", p3.relation_center, 0.0);
      checks.add("props.prop3_algebra_relation", p3.relation_algebra, 0.0);
      checks.add("props.prop3_fixed_relation", p3.relation_fixed, 0.0);
      checks.add("props.corollary_center_chain", p3.corollary_center_chain, 0.0);
    } else {
      json flags{{"relation_center", p3.relation_center},
                 {"relation_algebra", p3.relation_algebra},
                 {"relation_fixed", p3.relation_fixed}};
      results["prop3_outside_hypothesis"] = flags;
      checks.not_applicable("props.prop3_relations",
                            "action is not centrally free; relations computed and "
                            "recorded in results");
    }
  }
}

void cmd_modular(const Scenario& s, Checks& checks, json& results) {
  if (!s.algebra || (!s.state && s.weights.empty()))
    throw PreconditionError("modular: scenario needs algebra and a state or weights");
  // The reference functional must be faithful; fall back from the state to
  // the first faithful weight in the scenario family.
  Mat phi_density;
  std::string phi_source;
  std::string last_error = "no faithful functional supplied";
  std::vector<std::pair<std::string, Mat>> candidates;
  if (s.state) candidates.emplace_back("state", s.state->density());
  for (size_t i = 0; i < s.weights.size(); ++i)
    candidates.emplace_back("weights[" + std::to_string(i) + "]", s.weights[i]);
  bool found = false;
  for (auto& [src, rho] : candidates) {
    try {
      (void)modular::standard_form(s.algebra, rho, s.tolerance);
      phi_density = rho;
      phi_source = src;
      found = true;
      break;
    } catch (const PreconditionError& e) {
      last_error = e.what();
    }
  }
  if (!found) throw PreconditionError("modular: " + last_error);
  results["phi_source"] = phi_source;
  auto sf = modular::standard_form(s.algebra, phi_density, s.tolerance);
  auto rep = modular::verify_standard_form(sf, s.tolerance, s.seed);
  checks.add("modular.S_involution", rep.s_residual < 1e-10, rep.s_residual);
  checks.add("modular.delta_polar_data", rep.delta_sts_residual < 1e-10,
             rep.delta_sts_residual);
  checks.add("modular.J_squared", rep.j_squared_residual < 1e-10,
             rep.j_squared_residual);
  checks.add("modular.JMJ_is_commutant", rep.jmj_is_commutant, 0.0);
  checks.add("modular.sigma_stability", rep.sigma_stability_residual < 1e-9,
             rep.sigma_stability_residual);
  results["delta_spectrum"] = rep.delta_spectrum;

  num::Rng rng(s.seed ^ 0x6d6f64);
  double kms_worst = 0;
  for (int t = 0; t < 8; ++t) {
    Mat x = s.algebra->project(rng.gaussian_matrix(s.algebra->dim(), s.algebra->dim()));
    Mat y = s.algebra->project(rng.gaussian_matrix(s.algebra->dim(), s.algebra->dim()));
    kms_worst = std::max(kms_worst, modular::kms_residual(sf, x, y));
  }
  checks.add("modular.kms", kms_worst < 1e-9, kms_worst);
  results["kms_residual"] = kms_worst;

  // relative modular + cocycle chain rule over the weight family
  std::vector<Mat> family;
  for (const Mat& w : s.weights) {
    try {
      (void)modular::standard_form(s.algebra, w, s.tolerance);
      family.push_back(w);
    } catch (const PreconditionError&) {
      // non-faithful weights cannot enter the cocycle family
    }
  }
  family.push_back(phi_density);
  family.push_back(Mat::Identity(s.algebra->dim(), s.algebra->dim()) /
                   static_cast<double>(s.algebra->dim()));
  double chain_worst = 0, cocycle_member_worst = 0;
  for (double t : {0.3, 1.0}) {
    for (size_t i = 0; i < family.size(); ++i) {
      const Mat& r1 = family[i];
      const Mat& r2 = family[(i + 1) % family.size()];
      const Mat& r3 = family[(i + 2) % family.size()];
      Mat lhs = modular::connes_cocycle(*s.algebra, r1, r2, t, s.tolerance) *
                modular::connes_cocycle(*s.algebra, r2, r3, t, s.tolerance);
      Mat rhs = modular::connes_cocycle(*s.algebra, r1, r3, t, s.tolerance);
      chain_worst = std::max(chain_worst, (lhs - rhs).norm());
      Mat v = modular::connes_cocycle(*s.algebra, r1, r2, t, s.tolerance);
      cocycle_member_worst =
          std::max(cocycle_member_worst, s.algebra->subspace().residual(v));
    }
  }
  checks.add("modular.cocycle_chain_rule", chain_worst < 1e-10, chain_worst);
  checks.add("modular.cocycle_in_M", cocycle_member_worst < 1e-10,
             cocycle_member_worst);

  if (s.action) {
    const std::vector<double> times{0.3, 1.0, std::sqrt(2.0)};
    auto dw = modular::dual_weight_check(*s.action, phi_density, times,
                                         s.tolerance, s.seed);
    checks.add("modular.dual_weight_on_algebra_generators",
               dw.generator_residual_algebra < 1e-9, dw.generator_residual_algebra);
    checks.add("modular.dual_weight_on_lambda",
               dw.generator_residual_lambda < 1e-9, dw.generator_residual_lambda);
    checks.add("modular.dual_weight_J_tilde",
               dw.j_squared_residual < 1e-9 && dw.j_commutant_residual < 1e-9,
               std::max(dw.j_squared_residual, dw.j_commutant_residual));
    auto lha = modular::left_hilbert_algebra_check(*s.action, phi_density,
                                                   s.tolerance, s.seed);
    checks.add("modular.left_hilbert_homomorphism",
               lha.homomorphism_residual < 1e-10, lha.homomorphism_residual);
    checks.add("modular.left_hilbert_involution",
               lha.involution_residual < 1e-10 &&
                   lha.double_involution_residual < 1e-10,
               std::max(lha.involution_residual, lha.double_involution_residual));
    checks.add("modular.left_hilbert_bimodule", lha.bimodule_residual < 1e-10,
               lha.bimodule_residual);
  } else {
    checks.not_applicable("modular.dual_weight", "no action in scenario");
  }
}

using Handler = void (*)(const Scenario&, Checks&, json&);

struct CommandEntry {
  const char* name;
  Handler handler;
};

constexpr CommandEntry kHandlers[] = {
    {"sectors", cmd_sectors},       {"measure", cmd_measure},
    {"crossed-product", cmd_crossed}, {"duality-check", cmd_duality},
    {"theorem1", cmd_theorem1},     {"classify", cmd_classify},
    {"verify-props", cmd_verify_props}, {"modular", cmd_modular},
};

bool applicable(const std::string& command, const Scenario& s) {
  if (command == "sectors") return static_cast<bool>(s.algebra);
  if (command == "measure")
    return s.group && s.action && s.masa && s.state;
  if (command == "crossed-product" || command == "duality-check")
    return s.group && s.action;
  if (command == "theorem1") return s.group && s.action && s.masa;
  if (command == "classify") return static_cast<bool>(s.covariant);
  if (command == "verify-props") return s.dyn || s.enumerate;
  if (command == "modular") return s.algebra && (s.state || !s.weights.empty());
  return false;
}

void dispatch(const std::string& command, const Scenario& s, Checks& checks,
              json& results) {
  for (const auto& entry : kHandlers) {
    if (command == entry.name) {
      json sub = json::object();
      try {
        entry.handler(s, checks, sub);
      } catch (const AmbiguityError& e) {
        checks.ambiguous(command, e.what());
      } catch (const PreconditionError& e) {
        checks.precondition(command, e.what());
      }
      std::string key = command;
      for (char& c : key)
        if (c == '-') c = '_';
      if (!sub.empty()) results[key] = std::move(sub);
      return;
    }
  }
  throw ParseError("unknown command '" + command + "'");
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> all = {
      "sectors",  "measure",  "crossed-product", "duality-check",
      "theorem1", "classify", "verify-props",    "modular",
      "all"};
  return all;
}

bool is_command(const std::string& name) {
  for (const auto& c : commands())
    if (c == name) return true;
  return false;
}

const char* version() { return TAKDUAL_VERSION; }

RunResult run(const std::string& command, const std::string& scenario_json,
              const Config& config) {
  const auto start = std::chrono::steady_clock::now();
  json report;
  report["schema"] = 1;
  report["tool"] = "takdual";
  report["version"] = version();
  report["command"] = command;

  RunResult out;
  Checks checks;
  json results = json::object();
  try {
    if (!is_command(command)) throw ParseError("unknown command '" + command + "'");
    Scenario s = parse_scenario(scenario_json, config);
    report["tolerance"] = s.tolerance;
    report["seed"] = s.seed;
    report["scenario"] = s.raw;

    if (command == "all") {
      for (const auto& entry : kHandlers) {
        if (applicable(entry.name, s))
          dispatch(entry.name, s, checks, results);
        else
          checks.not_applicable(entry.name, "scenario lacks the required inputs");
      }
    } else {
      dispatch(command, s, checks, results);
    }
  } catch (const ParseError& e) {
    report["error"] = e.what();
    report["checks"] = json::array();
    out.exit_code = 2;
    out.report_json = report.dump(2);
    return out;
  } catch (const AmbiguityError& e) {
    report["error"] = e.what();
    report["checks"] = quantize_tree(checks.list);
    out.exit_code = 4;
    out.report_json = report.dump(2);
    return out;
  } catch (const PreconditionError& e) {
    report["error"] = e.what();
    report["checks"] = quantize_tree(checks.list);
    out.exit_code = 3;
    out.report_json = report.dump(2);
    return out;
  } catch (const std::exception& e) {
    report["error"] = std::string("internal error: ") + e.what();
    report["checks"] = quantize_tree(checks.list);
    out.exit_code = 3;
    out.report_json = report.dump(2);
    return out;
  }

  report["checks"] = quantize_tree(checks.list);
  report["results"] = quantize_tree(results);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  report["elapsed_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();

  if (checks.any_precondition)
    out.exit_code = 3;
  else if (checks.any_ambiguous)
    out.exit_code = 4;
  else if (checks.any_failed)
    out.exit_code = 1;
  else
    out.exit_code = 0;
  out.report_json = report.dump(2);
  return out;
}

}  // namespace takdual::scenario

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsim/erasure.hpp"
#include "tsim/fock_basis.hpp"
#include "tsim/model.hpp"
#include "tsim/observables.hpp"
#include "tsim/propagator.hpp"
#include "tsim/state.hpp"

namespace tsim {

enum class Stage { init, fwd1, fwd2, erase, rev2, rev1 };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::init: return "init";
    case Stage::fwd1: return "fwd1";
    case Stage::fwd2: return "fwd2";
    case Stage::erase: return "erase";
    case Stage::rev2: return "rev2";
    case Stage::rev1: return "rev1";
  }
  return "?";
}

inline std::optional<Stage> parse_stage(const std::string& s) {
  for (auto st : {Stage::init, Stage::fwd1, Stage::fwd2, Stage::erase, Stage::rev2, Stage::rev1}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

struct InitialStateSpec {
  enum class Kind { domain_wall, amplitudes };
  Kind kind = Kind::domain_wall;
  std::vector<std::complex<double>> amplitudes;  // row-major over (m, n) when kind == amplitudes

  friend bool operator==(const InitialStateSpec&, const InitialStateSpec&) = default;
};

struct ProtocolControls {
  bool no_erasure_run = false;        // also produce an erasure-free control trajectory
  bool full_hamiltonian_run = false;  // also produce full-H and Trotterized trajectories
  unsigned trotter_steps = 1;

  friend bool operator==(const ProtocolControls&, const ProtocolControls&) = default;
};

struct ProtocolConfig {
  LatticeSpec lattice = LatticeSpec::chain(6);
  unsigned n_tau = 2;
  unsigned n_upsilon = 2;
  ModelParams params = ModelParams::defaults(6);
  double t1 = 2.0;
  double t2 = 2.0;
  unsigned cycles = 1;
  ErasureOperation erasure;
  std::uint64_t master_seed = 0;
  InitialStateSpec initial;
  ProtocolControls controls;

  void validate() const {
    lattice.validate();
    if (n_tau > lattice.sites || n_upsilon > lattice.sites) {
      throw std::invalid_argument("ProtocolConfig: particle count exceeds site count");
    }
    params.validate(lattice.sites);
    if (!(t1 > 0.0) || !(t2 > 0.0) || !std::isfinite(t1) || !std::isfinite(t2)) {
      throw std::invalid_argument("ProtocolConfig: stage durations must be positive");
    }
    if (cycles < 1) throw std::invalid_argument("ProtocolConfig: cycles must be >= 1");
    if (controls.trotter_steps < 1) {
      throw std::invalid_argument("ProtocolConfig: trotter_steps must be >= 1");
    }
    if (erasure.kind == ErasureKind::site_phase && erasure.site >= lattice.sites) {
      throw std::invalid_argument("ProtocolConfig: erasure site outside the lattice");
    }
  }

  friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

/// Diagnostics after one stage. `energy_before`/`energy_after` hold the stage
/// Hamiltonian's expectation value around evolution stages and NaN otherwise.
struct StageRecord {
  std::uint64_t cycle = 0;
  Stage stage = Stage::init;
  double model_time = 0.0;
  EntropyReport report;
  double norm = 1.0;
  double n_tau = 0.0;
  double n_upsilon = 0.0;
  double energy_before = std::numeric_limits<double>::quiet_NaN();
  double energy_after = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
  std::vector<StageRecord> records;
  ManyBodyState final_state;
  std::vector<std::vector<double>> phases;  // per cycle; empty when erasure is off
  std::vector<ManyBodyState> cycle_states;  // end-of-cycle states, when requested
};

struct CycleResult {
  ManyBodyState state;
  std::vector<StageRecord> records;
  std::vector<double> phases;
};

inline ManyBodyState build_initial_state(const InitialStateSpec& spec, const FockBasis& basis_tau,
                                         const FockBasis& basis_upsilon) {
  const auto d_x = basis_tau.dim();
  const auto d_y = basis_upsilon.dim();
  if (spec.kind == InitialStateSpec::Kind::domain_wall) {
    // All particles packed on the lowest sites: the minimal mask, rank 0.
    return ManyBodyState::basis_state(d_x, d_y, basis_tau.rank(site_mask(basis_tau.particles())),
                                      basis_upsilon.rank(site_mask(basis_upsilon.particles())));
  }
  if (spec.amplitudes.size() != d_x * d_y) {
    throw std::invalid_argument("initial state: expected " + std::to_string(d_x * d_y) +
                                " amplitudes, got " + std::to_string(spec.amplitudes.size()));
  }
  Eigen::VectorXcd amps(static_cast<Eigen::Index>(spec.amplitudes.size()));
  for (std::size_t k = 0; k < spec.amplitudes.size(); ++k) {
    amps[static_cast<Eigen::Index>(k)] = spec.amplitudes[k];
  }
  const double norm = amps.norm();
  if (!std::isfinite(norm) || norm == 0.0) {
    throw std::invalid_argument("initial state: amplitudes cannot be normalized");
  }
  if (norm != 1.0) amps /= norm;
  return ManyBodyState(d_x, d_y, std::move(amps));
}

/// Runs the forward / erase / reverse cycle and the comparison dynamics for
/// one configuration. Operators and bases are built once at construction.
class ProtocolRunner {
 public:
  explicit ProtocolRunner(ProtocolConfig config, PropagatorSettings settings = {})
      : config_((config.validate(), std::move(config))),
        settings_(settings),
        basis_tau_(config_.lattice.sites, config_.n_tau),
        basis_upsilon_(config_.lattice.sites, config_.n_upsilon),
        h1_(build_h1(config_.lattice, config_.params, basis_tau_, basis_upsilon_)),
        h2_(build_h2(config_.lattice, config_.params, basis_tau_, basis_upsilon_)),
        full_(build_full(config_.lattice, config_.params, basis_tau_, basis_upsilon_)),
        stepwise_sum_(add_operators(h1_, h2_)) {
    settings_.validate();
  }

  const ProtocolConfig& config() const noexcept { return config_; }
  const FockBasis& basis_tau() const noexcept { return basis_tau_; }
  const FockBasis& basis_upsilon() const noexcept { return basis_upsilon_; }
  const SparseHermitianOperator& h1() const noexcept { return h1_; }
  const SparseHermitianOperator& h2() const noexcept { return h2_; }

  const SparseHermitianOperator& full() const noexcept { return full_; }
  /// H1 + H2, the generator the alternating scheme converges to. It differs
  /// from full() by one extra copy of the cross term.
  const SparseHermitianOperator& stepwise_sum() const noexcept { return stepwise_sum_; }

  ManyBodyState initial_state() const {
    return build_initial_state(config_.initial, basis_tau_, basis_upsilon_);
  }

  StageRecord record(const ManyBodyState& state, const ManyBodyState& initial,
                     std::uint64_t cycle, Stage stage, double model_time) const {
    StageRecord r;
    r.cycle = cycle;
    r.stage = stage;
    r.model_time = model_time;
    r.report = make_report(state, basis_tau_, basis_upsilon_, initial);
    r.norm = state.norm();
    r.n_tau = std::accumulate(r.report.densities_tau.begin(), r.report.densities_tau.end(), 0.0);
    r.n_upsilon =
        std::accumulate(r.report.densities_upsilon.begin(), r.report.densities_upsilon.end(), 0.0);
    return r;
  }

  /// One cycle fwd1 (H1, t1), fwd2 (H2, t2), erase, rev2 (H2, -t2),
  /// rev1 (H1, -t1). `model_time` is advanced by |duration| per evolution stage.
  CycleResult run_cycle(const ManyBodyState& state, const ManyBodyState& initial,
                        std::uint64_t cycle, double& model_time, bool erase = true) const {
    CycleResult out{state, {}, {}};
    auto evolution_stage = [&](Stage stage, const SparseHermitianOperator& h, double t) {
      const double before = expectation(out.state, h);
      out.state = evolve_blockwise(out.state, h, t, settings_);
      model_time += std::abs(t);
      auto r = record(out.state, initial, cycle, stage, model_time);
      r.energy_before = before;
      r.energy_after = expectation(out.state, h);
      out.records.push_back(std::move(r));
    };

    evolution_stage(Stage::fwd1, h1_, config_.t1);
    evolution_stage(Stage::fwd2, h2_, config_.t2);
    if (erase && config_.erasure.kind != ErasureKind::none) {
      const Species target = config_.erasure.species_for_cycle(cycle);
      const auto& basis = target == Species::tau ? basis_tau_ : basis_upsilon_;
      if (config_.erasure.kind == ErasureKind::random_phase) {
        out.phases = draw_phases(config_.master_seed, cycle, basis.dim());
      } else {
        out.phases = site_phase_sequence(basis, config_.erasure.site, config_.erasure.theta);
      }
      out.state = apply_random_phases(out.state, target, out.phases);
      out.records.push_back(record(out.state, initial, cycle, Stage::erase, model_time));
    }
    evolution_stage(Stage::rev2, h2_, -config_.t2);
    evolution_stage(Stage::rev1, h1_, -config_.t1);
    return out;
  }

  /// Full protocol: an init record (cycle 0) followed by `cycles` cycles
  /// numbered from 1. Random phases for cycle c come from (master_seed, c).
  Trajectory run(bool erase = true, bool keep_cycle_states = false) const {
    const auto initial = initial_state();
    Trajectory traj;
    traj.records.push_back(record(initial, initial, 0, Stage::init, 0.0));
    ManyBodyState state = initial;
    double model_time = 0.0;
    for (std::uint64_t c = 1; c <= config_.cycles; ++c) {
      auto cycle = run_cycle(state, initial, c, model_time, erase);
      state = std::move(cycle.state);
      if (keep_cycle_states) traj.cycle_states.push_back(state);
      for (auto& r : cycle.records) traj.records.push_back(std::move(r));
      if (!cycle.phases.empty()) traj.phases.push_back(std::move(cycle.phases));
    }
    traj.final_state = std::move(state);
    return traj;
  }

  /// Evolution under the full Hamiltonian for cycles * (t1 + t2), recorded
  /// after each t1 chunk (as fwd1) and t2 chunk (as fwd2).
  Trajectory run_full_hamiltonian() const {
    const auto& h = full();
    const auto initial = initial_state();
    Trajectory traj;
    traj.records.push_back(record(initial, initial, 0, Stage::init, 0.0));
    ManyBodyState state = initial;
    double model_time = 0.0;
    for (std::uint64_t c = 1; c <= config_.cycles; ++c) {
      for (auto [stage, t] : {std::pair{Stage::fwd1, config_.t1}, std::pair{Stage::fwd2, config_.t2}}) {
        const double before = expectation(state, h);
        state = evolve(state, h, t, settings_);
        model_time += t;
        auto r = record(state, initial, c, stage, model_time);
        r.energy_before = before;
        r.energy_after = expectation(state, h);
        traj.records.push_back(std::move(r));
      }
    }
    traj.final_state = std::move(state);
    return traj;
  }

  /// `steps` alternations of (H1, t1 / steps)(H2, t2 / steps). One step is
  /// exactly the forward half of a cycle.
  ManyBodyState trotter_evolve(const ManyBodyState& state, double t1, double t2,
                               unsigned steps) const {
    if (steps == 0) throw std::invalid_argument("trotter_evolve: steps must be >= 1");
    ManyBodyState out = state;
    const double dt1 = t1 / steps;
    const double dt2 = t2 / steps;
    for (unsigned s = 0; s < steps; ++s) {
      out = evolve_blockwise(out, h1_, dt1, settings_);
      out = evolve_blockwise(out, h2_, dt2, settings_);
    }
    return out;
  }

  /// Trotterized counterpart of run_full_hamiltonian: each cycle applies
  /// controls.trotter_steps alternations and records once (as fwd2).
  Trajectory run_trotter() const {
    const auto initial = initial_state();
    Trajectory traj;
    traj.records.push_back(record(initial, initial, 0, Stage::init, 0.0));
    ManyBodyState state = initial;
    double model_time = 0.0;
    for (std::uint64_t c = 1; c <= config_.cycles; ++c) {
      state = trotter_evolve(state, config_.t1, config_.t2, config_.controls.trotter_steps);
      model_time += config_.t1 + config_.t2;
      traj.records.push_back(record(state, initial, c, Stage::fwd2, model_time));
    }
    traj.final_state = std::move(state);
    return traj;
  }

 private:
  ProtocolConfig config_;
  PropagatorSettings settings_;
  FockBasis basis_tau_;
  FockBasis basis_upsilon_;
  SparseHermitianOperator h1_;
  SparseHermitianOperator h2_;
  SparseHermitianOperator full_;
  SparseHermitianOperator stepwise_sum_;
};

inline Trajectory run_protocol(const ProtocolConfig& config,
                               const PropagatorSettings& settings = {}) {
  return ProtocolRunner(config, settings).run();
}

inline Trajectory run_full_hamiltonian(const ProtocolConfig& config,
                                       const PropagatorSettings& settings = {}) {
  return ProtocolRunner(config, settings).run_full_hamiltonian();
}

}  // namespace tsim

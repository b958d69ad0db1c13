#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tsim/config.hpp"
#include "tsim/fock_basis.hpp"
#include "tsim/io.hpp"
#include "tsim/protocol.hpp"

namespace tsim {

namespace detail::cli {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path, "cannot open for reading");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline std::string numbered(const char* prefix, std::uint64_t i, const char* suffix) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%s%04llu%s", prefix, static_cast<unsigned long long>(i),
                suffix);
  return buf.data();
}

inline int simulate(RunConfig cfg, std::ostream& out) {
  namespace fs = std::filesystem;
  const fs::path out_dir = cfg.output.out_dir;
  const ProtocolRunner runner(cfg.protocol);

  const auto traj = runner.run(true, cfg.output.dump_states);
  const auto csv = write_trajectory(traj.records, out_dir);
  out << "wrote " << csv.string() << " (" << traj.records.size() << " rows)\n";

  if (cfg.protocol.controls.no_erasure_run) {
    const auto control = runner.run(false);
    out << "wrote "
        << write_trajectory(control.records, out_dir, "trajectory_no_erasure.csv").string()
        << '\n';
  }
  if (cfg.protocol.controls.full_hamiltonian_run) {
    out << "wrote "
        << write_trajectory(runner.run_full_hamiltonian().records, out_dir,
                            "trajectory_full_hamiltonian.csv")
               .string()
        << '\n';
    out << "wrote "
        << write_trajectory(runner.run_trotter().records, out_dir, "trajectory_trotter.csv")
               .string()
        << '\n';
  }
  if (cfg.output.dump_phases && !traj.phases.empty()) {
    fs::create_directories(out_dir / "phases");
    for (std::size_t c = 0; c < traj.phases.size(); ++c) {
      write_phases(out_dir / "phases" / numbered("cycle_", c + 1, ".txt"), traj.phases[c]);
    }
  }
  if (cfg.output.dump_states) {
    fs::create_directories(out_dir / "states");
    write_state(out_dir / "states" / "initial.bin", runner.initial_state());
    for (std::size_t c = 0; c < traj.cycle_states.size(); ++c) {
      write_state(out_dir / "states" / numbered("cycle_", c + 1, ".bin"), traj.cycle_states[c]);
    }
  }

  const auto& last = traj.records.back().report;
  out << "final S_tau=" << format_double(last.s_tau) << " S_upsilon="
      << format_double(last.s_upsilon) << " S_total=" << format_double(last.s_total)
      << " S_ent=" << format_double(last.s_ent) << " fidelity="
      << format_double(last.fidelity_to_initial) << '\n';
  return 0;
}

}  // namespace detail::cli

/// Entry point behind the `tsim` executable. Returns 0 on success, 1 on a
/// runtime or configuration failure and 2 on a usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Two-species fermion lattice simulator: forward / erase / reverse protocol"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  auto* simulate = app.add_subcommand("simulate", "run the protocol and write trajectory CSVs");
  simulate->add_option("--config", config_path, "configuration file (JSON)")->required();
  simulate->add_option("--seed", seed, "master seed; overrides protocol.seed");
  simulate->add_option("--out", out_dir, "output directory; overrides output.out_dir");

  unsigned sites = 0;
  unsigned particles = 0;
  auto* basis = app.add_subcommand("basis", "print the Fock basis for L sites and N particles");
  basis->add_option("--sites", sites, "site count L")->required();
  basis->add_option("--particles", particles, "particle count N")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "parse a configuration and echo it resolved");
  validate->add_option("--config", validate_path, "configuration file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*basis) {
      const FockBasis b(sites, particles);
      for (const Mask m : b.configs()) out << mask_to_string(m, sites) << '\n';
      return 0;
    }
    if (*validate) {
      out << serialize_config(parse_config(detail::cli::read_file(validate_path))) << '\n';
      return 0;
    }
    auto cfg = parse_config(detail::cli::read_file(config_path));
    if (seed) cfg.protocol.master_seed = *seed;
    if (out_dir) cfg.output.out_dir = *out_dir;
    return detail::cli::simulate(std::move(cfg), out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tsim

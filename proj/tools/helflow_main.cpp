// helflow: batch front-end for the constrained bending-flow laboratory.
//   verify     identity/oracle self-checks on the configured surface
//   energy     bending energy, area, volume of the configured state
//   flow       run the constrained gradient flow, write ledger/checkpoint
//   spectrum   assemble the constrained Hessian and analyze its spectrum
//   fit-decay  fit decay laws to a flow (or to an existing ledger CSV)
// Exit codes: 0 success, 1 domain/runtime error, 2 configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "helflow/config.hpp"
#include "helflow/io.hpp"
#include "helflow/verify.hpp"

namespace {

using namespace helflow;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "configuration file (key = value)");
  sub->add_option("--set", o.sets, "override, key=value (repeatable)")
      ->take_all();
}

Config make_config(const CommonOpts& o) {
  Config c = o.config_path.empty() ? Config{} : load_config(o.config_path);
  for (const std::string& kv : o.sets) apply_override(c, kv);
  return c;
}

std::string prepare_output_dir(const Config& cfg) {
  const std::string dir = config_output_dir(cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw DomainError("cannot create output directory '" + dir +
                      "': " + ec.message());
  return dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_energy(const Config& cfg) {
  GridPtr g = config_grid(cfg);
  GeometryState s = pullback_geometry(g, config_perturbation(cfg, *g));
  const Physics p = config_physics(cfg);
  std::printf("F = %.6f\n", energy(s, p));
  std::printf("A_0 = %.6f\n", s.area());
  std::printf("V_0 = %.6f\n", s.volume());
  return 0;
}

int cmd_verify(const Config& cfg) {
  std::vector<CheckResult> results =
      run_verification(config_grid(cfg), config_physics(cfg));
  const bool ok = print_verification(std::cout, results);
  std::printf("%s (%zu checks)\n", ok ? "all checks passed" : "CHECKS FAILED",
              results.size());
  return ok ? 0 : 1;
}

Trajectory run_configured_flow(const Config& cfg, const std::string& outdir) {
  GridPtr g = config_grid(cfg);
  Field h0 = config_perturbation(cfg, *g);
  Trajectory traj = run_flow(g, h0, config_flow_params(cfg));

  write_ledger_file(join(outdir, "ledger.csv"), traj.records);
  Checkpoint ck;
  ck.surface = g->ref;
  ck.nu = g->nu;
  ck.nv = g->nv;
  ck.t = traj.t;
  ck.physics = config_physics(cfg);
  ck.targets = traj.targets;
  ck.h = traj.h;
  write_checkpoint_file(join(outdir, "state.ckpt"), ck);
  write_obj_file(join(outdir, "surface.obj"), pullback_geometry(g, traj.h));
  for (size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "snapshot_%04zu.obj", i);
    write_obj_file(join(outdir, name),
                   pullback_geometry(g, traj.snapshots[i].second));
  }
  return traj;
}

int cmd_flow(const Config& cfg) {
  const std::string outdir = prepare_output_dir(cfg);
  Trajectory traj = run_configured_flow(cfg, outdir);
  const FlowRecord& last = traj.records.back();
  std::printf("status = %s\n", to_string(traj.status));
  std::printf("records = %zu, snapshots = %zu\n", traj.records.size(),
              traj.snapshots.size());
  std::printf("t = %s\n", detail::g15(traj.t).c_str());
  std::printf("F = %s\n", detail::g15(last.F).c_str());
  std::printf("grad = %s\n", detail::g15(last.grad_proxy).c_str());
  std::printf("ledger = %s\n", join(outdir, "ledger.csv").c_str());
  if (traj.status == FlowStatus::StepFailure) {
    std::fprintf(stderr, "error: %s\n", traj.message.c_str());
    return 1;
  }
  return 0;
}

int cmd_spectrum(const Config& cfg) {
  const std::string outdir = prepare_output_dir(cfg);
  GridPtr g = config_grid(cfg);
  GeometryState s = pullback_geometry(g, config_perturbation(cfg, *g));
  const Physics p = config_physics(cfg);
  ComponentTargets tgt = targets_of(s);
  HessianAssembly asmb =
      assemble_hessian(s, p, cfg.spectrum_max_degree, tgt);
  SpectrumAnalysis an = analyze_spectrum(s, asmb, tgt, cfg.spectrum_tol);

  const std::string path = join(outdir, "spectrum.json");
  write_text_file(path, spectrum_json(asmb, an).dump(2) + "\n");

  std::printf("basis = %zu fields (%zu dropped)\n", asmb.labels.size(),
              asmb.dropped.size());
  if (asmb.stationary_warning)
    std::printf("warning: geometry is not stationary (residual %s)\n",
                detail::g15(asmb.stationarity_residual).c_str());
  std::printf("near-kernel dim = %d\n", an.report.near_kernel_dim);
  if (an.report.has_transverse)
    std::printf("smallest transverse = %s\n",
                detail::g15(an.report.smallest_transverse).c_str());
  else
    std::printf("smallest transverse = n/a\n");
  std::printf("spectrum = %s\n", path.c_str());
  return 0;
}

int cmd_fit_decay(const Config& cfg, const std::string& ledger_path) {
  const std::string outdir = prepare_output_dir(cfg);
  Trajectory traj;
  if (!ledger_path.empty()) {
    traj.records = read_ledger_file(ledger_path);
  } else {
    traj = run_configured_flow(cfg, outdir);
  }
  DecayFit fit = fit_decay(traj);

  const std::string path = join(outdir, "decay.json");
  write_text_file(path, decay_json(fit).dump(2) + "\n");

  std::printf("type = %s\n", fit.exponential ? "exponential" : "algebraic");
  std::printf("theta = %.4f (%s)\n", fit.theta,
              fit.consistent ? "consistent" : "inconsistent");
  if (fit.exponential)
    std::printf("rate c0 = %s\n", detail::g15(fit.rate).c_str());
  else
    std::printf("algebraic exponent = %s\n",
                detail::g15(fit.alg_exponent).c_str());
  std::printf("f_inf = %s\n", detail::g15(fit.f_inf).c_str());
  if (!std::isnan(fit.beta)) std::printf("beta = %.4f\n", fit.beta);
  std::printf("decay = %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained bending-flow laboratory"};
  app.require_subcommand(1);

  CommonOpts o_verify, o_energy, o_flow, o_spectrum, o_decay;
  std::string ledger_path;

  CLI::App* c_verify =
      app.add_subcommand("verify", "run the identity/oracle self-checks");
  add_common(c_verify, o_verify);
  CLI::App* c_energy =
      app.add_subcommand("energy", "print F and per-component A, V");
  add_common(c_energy, o_energy);
  CLI::App* c_flow =
      app.add_subcommand("flow", "run the constrained gradient flow");
  add_common(c_flow, o_flow);
  CLI::App* c_spectrum =
      app.add_subcommand("spectrum", "constrained Hessian spectrum report");
  add_common(c_spectrum, o_spectrum);
  CLI::App* c_decay =
      app.add_subcommand("fit-decay", "fit decay laws to a flow or ledger");
  add_common(c_decay, o_decay);
  c_decay->add_option("--ledger", ledger_path,
                      "fit an existing ledger CSV instead of running a flow");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version vs usage error
  }

  try {
    if (c_verify->parsed()) return cmd_verify(make_config(o_verify));
    if (c_energy->parsed()) return cmd_energy(make_config(o_energy));
    if (c_flow->parsed()) return cmd_flow(make_config(o_flow));
    if (c_spectrum->parsed()) return cmd_spectrum(make_config(o_spectrum));
    if (c_decay->parsed()) return cmd_fit_decay(make_config(o_decay), ledger_path);
  } catch (const helflow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const helflow::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

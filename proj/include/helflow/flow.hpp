#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "helflow/constraints.hpp"
#include "helflow/solver.hpp"

// Constrained gradient flow dh/dt = -(mobility o projection)(grad F), stepped
// semi-implicitly: only the stiff bilaplacian of the linearized gradient is
// treated implicitly (coefficients frozen per step), the lower-order terms
// ride explicitly inside the right-hand side.  Steps that raise the energy
// beyond solver tolerance or leave the admissible graph neighborhood are
// rejected and retried with half the step size, so the energy is a discrete
// Lyapunov functional by construction and area/volume are pinned to their
// targets by a Newton restoration after every update.

namespace helflow {

struct FlowTolerances {
  double accept_rel = 1e-12;  // allowed relative F increase on acceptance
  int max_halvings = 40;
  double dt_growth = 1.2;     // step growth after an accepted step
  // Step-size cap (0 = uncapped).  Energy acceptance only guards stability;
  // decay-law fits additionally need the records to resolve the physical
  // rate, i.e. dt * rate below order one, which this enforces.
  double dt_max = 0.0;
};

struct StepOutcome {
  GeometryState state;  // accepted geometry (graph over the reference)
  double F = 0.0;       // energy of the accepted state
  double dt_used = 0.0;
  double dt_next = 0.0;
  double dissipation = 0.0;  // <w, Minv w> dA at the entry geometry
  int rejections = 0;
};

// One adaptive step from geometry s with entry energy F0 and projected
// gradient pg.  Solver failures propagate; inadmissible or energy-increasing
// trials are rejected with tau halved.
inline StepOutcome step_from(const GeometryState& s, double F0, const Field& pg,
                             double tau, const Physics& phys,
                             const MobilitySpec& mob,
                             const ComponentTargets& tgt,
                             ImplicitSolver& solver,
                             const FlowTolerances& ft = {}) {
  if (!(tau >= 0.0)) throw DomainError("flow step needs tau >= 0");
  if (s.h.size() == 0)
    throw DomainError("flow step needs a graph state (height field present)");
  const GridPtr& grid = s.grid;
  const Field rhs = -pg;
  double tau_try = tau;
  for (int rej = 0; rej <= ft.max_halvings; ++rej) {
    Field w =
        project_tangent(s, solver.solve(s, mob, tau_try, phys.kappa, rhs), tgt);
    Field hnew = s.h + tau_try * w / s.tilt;
    try {
      Field hres = restore_constraints(grid, hnew, tgt);
      GeometryState snew = pullback_geometry(grid, hres);
      const double F1 = energy(snew, phys);
      if (F1 <= F0 + ft.accept_rel * std::max(1.0, std::abs(F0))) {
        StepOutcome out;
        out.state = std::move(snew);
        out.F = F1;
        out.dt_used = tau_try;
        out.dt_next = tau == 0.0 ? 0.0 : tau_try * ft.dt_growth;
        if (ft.dt_max > 0.0) out.dt_next = std::min(out.dt_next, ft.dt_max);
        out.dissipation = integrate(s, w * apply_minv(s, mob, w));
        out.rejections = rej;
        return out;
      }
    } catch (const DomainError&) {
      // left the admissible graph neighborhood or restoration stalled
    }
    if (tau_try == 0.0) break;
    tau_try *= 0.5;
  }
  throw DomainError("flow step rejected after " +
                    std::to_string(ft.max_halvings) +
                    " halvings (last dt = " + std::to_string(tau_try) + ")");
}

inline StepOutcome step(const GeometryState& s, double tau, const Physics& phys,
                        const MobilitySpec& mob, const ComponentTargets& tgt,
                        ImplicitSolver& solver, const FlowTolerances& ft = {}) {
  const Field pg = project_tangent(s, l2_gradient(s, phys), tgt);
  return step_from(s, energy(s, phys), pg, tau, phys, mob, tgt, solver, ft);
}

struct FlowRecord {
  double t = 0.0;
  double F = 0.0;
  double grad_l2 = 0.0;     // ||grad F||_{L2(dA)}
  double grad_proxy = 0.0;  // ||projected grad||_{L2(dA)}, the stop criterion
  double area = 0.0;
  double volume = 0.0;
  double dissipation = 0.0;  // of the step that produced this record
  double dt = 0.0;           // accepted step size of that step
};

enum class FlowStatus { Stationary, MaxTime, MaxSteps, StepFailure };

inline const char* to_string(FlowStatus st) {
  switch (st) {
    case FlowStatus::Stationary: return "stationary";
    case FlowStatus::MaxTime: return "max_time";
    case FlowStatus::MaxSteps: return "max_steps";
    case FlowStatus::StepFailure: return "step_failure";
  }
  return "unknown";
}

struct Trajectory {
  std::vector<FlowRecord> records;
  std::vector<std::pair<double, Field>> snapshots;  // (t, h) when enabled
  FlowStatus status = FlowStatus::MaxTime;
  std::string message;  // failure detail for StepFailure
  Field h;              // final height
  double t = 0.0;       // final time
  ComponentTargets targets;
};

struct FlowParams {
  Physics phys;
  MobilitySpec mob;
  double dt0 = 1e-3;
  double t_end = 1.0;
  double grad_tol = 0.0;  // 0 disables the stationarity stop
  long max_steps = 100000;
  int record_every = 1;
  int snapshot_every = 0;  // 0 disables height snapshots
  FlowTolerances tol;
};

// Run the constrained flow from height h0.  Targets default to the reference
// surface's own area/volume (round references constrain area only), and the
// initial state is restored onto that constraint set before the first record.
inline Trajectory run_flow(const GridPtr& grid, const Field& h0,
                           const FlowParams& p,
                           std::optional<ComponentTargets> targets_opt = {}) {
  if (!(p.dt0 > 0.0)) throw DomainError("flow needs dt0 > 0");
  if (!(p.t_end >= 0.0)) throw DomainError("flow needs t_end >= 0");
  Trajectory traj;
  traj.targets = targets_opt ? *targets_opt
                             : targets_of(pullback_geometry(
                                   grid, Field::Zero(grid->nu, grid->nv)));

  Field h = restore_constraints(grid, h0, traj.targets);
  GeometryState s = pullback_geometry(grid, h);
  double F = energy(s, p.phys);
  Field grad = l2_gradient(s, p.phys);
  Field pg = project_tangent(s, grad, traj.targets);
  double gl2 = l2_norm(s, grad);
  double gpx = l2_norm(s, pg);

  double t = 0.0;
  ImplicitSolver solver(grid);
  double dt = p.dt0;
  if (p.tol.dt_max > 0.0) dt = std::min(dt, p.tol.dt_max);

  auto push_record = [&](double diss, double dt_used) {
    FlowRecord r;
    r.t = t;
    r.F = F;
    r.grad_l2 = gl2;
    r.grad_proxy = gpx;
    r.area = s.area();
    r.volume = s.volume();
    r.dissipation = diss;
    r.dt = dt_used;
    traj.records.push_back(r);
  };
  push_record(0.0, 0.0);
  if (p.snapshot_every > 0) traj.snapshots.emplace_back(t, s.h);

  long steps = 0;
  traj.status = FlowStatus::MaxTime;
  while (true) {
    if (p.grad_tol > 0.0 && gpx <= p.grad_tol) {
      traj.status = FlowStatus::Stationary;
      break;
    }
    if (t >= p.t_end * (1.0 - 1e-14)) {
      traj.status = FlowStatus::MaxTime;
      break;
    }
    if (steps >= p.max_steps) {
      traj.status = FlowStatus::MaxSteps;
      break;
    }
    const double tau = std::min(dt, p.t_end - t);
    StepOutcome out;
    try {
      out = step_from(s, F, pg, tau, p.phys, p.mob, traj.targets, solver, p.tol);
    } catch (const DomainError& e) {
      traj.status = FlowStatus::StepFailure;
      traj.message = e.what();
      break;
    }
    ++steps;
    t += out.dt_used;
    dt = out.dt_next;
    s = std::move(out.state);
    F = out.F;
    grad = l2_gradient(s, p.phys);
    pg = project_tangent(s, grad, traj.targets);
    gl2 = l2_norm(s, grad);
    gpx = l2_norm(s, pg);

    const bool stopping = (p.grad_tol > 0.0 && gpx <= p.grad_tol) ||
                          t >= p.t_end * (1.0 - 1e-14) || steps >= p.max_steps;
    if (steps % std::max(1, p.record_every) == 0 || stopping)
      push_record(out.dissipation, out.dt_used);
    if (p.snapshot_every > 0 &&
        (steps % p.snapshot_every == 0 || stopping))
      traj.snapshots.emplace_back(t, s.h);
  }
  traj.h = s.h;
  traj.t = t;
  return traj;
}

}  // namespace helflow

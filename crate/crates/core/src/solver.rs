//! Multistart projected gradient descent over piecewise-affine fields.
//!
//! The minimized functionals are sums of per-element densities of the total
//! gradient `offset + grad(phi)`. Feasibility (per-element gauge below the
//! margin `tau_max`, optional Lipschitz cap on `grad(phi)`) is restored by
//! radially scaling the free part of the field toward the offset, which keeps
//! iterates inside the convex feasible set at all times; every reported value
//! is therefore an honest upper bound for the discrete infimum. Steps use a
//! spectral (Barzilai-Borwein) trial length with a backtracking line search
//! on the projected arc.

use crate::convex::ConstraintSet;
use crate::error::{HomError, Result};
use crate::math::Rng;
use crate::matrix::Matrix;
use crate::mesh::{ElementGeom, Mesh, TestField};
use alloc::vec;
use alloc::vec::Vec;

/// Per-element density of the total gradient.
pub trait ElementObjective {
    fn eval(&self, e: usize, g: &Matrix) -> f64;
    fn grad(&self, e: usize, g: &Matrix) -> Matrix;
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub grad_tolerance: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Feasibility margin: all iterates keep per-element gauge at or below
    /// this value (must stay below 1).
    pub tau_max: f64,
    pub perturbation: f64,
    /// Secondary stop: exit once the energy decrease accumulated over the
    /// last `plateau_window` iterations falls below `value_plateau`
    /// (relative).
    pub value_plateau: f64,
    pub plateau_window: usize,
    /// Run the zero field as restart 0. Compositions that inject warm starts
    /// whose energy already dominates the zero field may disable it.
    pub zero_start: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 8,
            max_iterations: 5000,
            grad_tolerance: 1e-8,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            tau_max: 1.0 - 1e-3,
            perturbation: 0.05,
            value_plateau: 1e-12,
            plateau_window: 25,
            zero_start: true,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(HomError::InvalidParameter("restarts must be >= 1"));
        }
        if !(self.tau_max > 0.0 && self.tau_max < 1.0) {
            return Err(HomError::InvalidParameter("tau_max must lie in (0, 1)"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(HomError::InvalidParameter("backtrack factor must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Copy with a different seed; used to decorrelate restarts across calls.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.seed = seed;
        c
    }
}

/// One constrained minimization instance.
pub struct FieldProblem<'a, O: ElementObjective> {
    pub mesh: &'a Mesh,
    pub m: usize,
    pub objective: &'a O,
    /// Constant macroscopic gradient added to the field gradient.
    pub offset: Option<Matrix>,
    /// Gauge feasibility set; `None` disables the gauge cap.
    pub constraint: Option<&'a ConstraintSet>,
    /// Cap on `|grad(phi)|` per element (`INFINITY` to disable).
    pub lip_cap: f64,
    /// Per-node degree-of-freedom mask; pinned nodes stay at zero.
    pub free_nodes: Vec<bool>,
    /// Multiplier applied to the integral (e.g. `1 / n^d`).
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub value: f64,
    pub field: TestField,
    pub iterations: usize,
    pub best_restart: usize,
    pub restarts_run: usize,
    /// False only on the zero-field fallback when no feasible iterate exists.
    pub feasible: bool,
    pub fallback_zero: bool,
    /// Worst per-element gauge of `offset + grad(phi)` at the reported field.
    pub max_gauge: f64,
}

struct Workspace {
    elems: Vec<ElementGeom>,
    d: usize,
}

impl<'a, O: ElementObjective> FieldProblem<'a, O> {
    fn workspace(&self) -> Workspace {
        Workspace {
            elems: self.mesh.elements(),
            d: self.mesh.dimension(),
        }
    }

    fn total_gradient(&self, ws: &Workspace, field: &TestField, e: usize) -> Matrix {
        let mut g = field.gradient(ws.d, &ws.elems[e]);
        if let Some(off) = &self.offset {
            g.add_assign_scaled(off, 1.0);
        }
        g
    }

    /// Objective value; `+inf` propagates from the density.
    pub fn energy(&self, field: &TestField) -> f64 {
        let ws = self.workspace();
        self.energy_ws(&ws, field)
    }

    fn energy_ws(&self, ws: &Workspace, field: &TestField) -> f64 {
        let mut total = 0.0;
        for e in 0..ws.elems.len() {
            let g = self.total_gradient(ws, field, e);
            let v = self.objective.eval(e, &g);
            if !v.is_finite() {
                return f64::INFINITY;
            }
            total += ws.elems[e].volume * v;
        }
        self.scale * total
    }

    fn gradient_ws(&self, ws: &Workspace, field: &TestField, out: &mut [f64]) {
        out.fill(0.0);
        let m = self.m;
        for (e, elem) in ws.elems.iter().enumerate() {
            let g = self.total_gradient(ws, field, e);
            let df = self.objective.grad(e, &g).scale(self.scale * elem.volume);
            for (slot, &node) in elem.nodes[..elem.nnodes].iter().enumerate() {
                if !self.free_nodes[node] {
                    continue;
                }
                for comp in 0..m {
                    let mut acc = 0.0;
                    for k in 0..ws.d {
                        acc += df.get(comp, k) * elem.grads[slot][k];
                    }
                    out[node * m + comp] += acc;
                }
            }
        }
    }

    /// Worst-case per-element gauge and field-gradient norm.
    pub fn feasibility(&self, field: &TestField) -> (f64, f64) {
        let ws = self.workspace();
        self.feasibility_ws(&ws, field)
    }

    fn feasibility_ws(&self, ws: &Workspace, field: &TestField) -> (f64, f64) {
        let mut max_gauge: f64 = 0.0;
        let mut max_lip: f64 = 0.0;
        for e in 0..ws.elems.len() {
            let raw = field.gradient(ws.d, &ws.elems[e]);
            max_lip = max_lip.max(raw.norm());
            if let Some(c) = self.constraint {
                let mut g = raw;
                if let Some(off) = &self.offset {
                    g.add_assign_scaled(off, 1.0);
                }
                max_gauge = max_gauge.max(c.gauge_unchecked(&g));
            }
        }
        (max_gauge, max_lip)
    }

    /// Scales the free part of `field` so that every element satisfies the
    /// gauge margin and the Lipschitz cap; returns `false` when even the zero
    /// field is infeasible (offset outside the margin).
    fn project_ws(&self, ws: &Workspace, field: &mut TestField, tau: f64) -> bool {
        let offset_gauge = match (&self.offset, self.constraint) {
            (Some(off), Some(c)) => c.gauge_unchecked(off),
            _ => 0.0,
        };
        if offset_gauge > tau {
            return false;
        }
        let mut s = 1.0f64;
        for e in 0..ws.elems.len() {
            let raw = field.gradient(ws.d, &ws.elems[e]);
            let lip = raw.norm();
            if lip > self.lip_cap {
                s = s.min(self.lip_cap / lip);
            }
            if let Some(c) = self.constraint {
                let mut g = raw;
                if let Some(off) = &self.offset {
                    g.add_assign_scaled(off, 1.0);
                }
                let ge = c.gauge_unchecked(&g);
                if ge > tau {
                    // Convexity of the gauge bounds gauge(off + s grad) by
                    // (1-s) gauge(off) + s gauge(off + grad); pick s to push
                    // the bound to tau.
                    let se = (tau - offset_gauge) / (ge - offset_gauge);
                    s = s.min(se.max(0.0));
                }
            }
        }
        if s < 1.0 {
            for (a, free) in self.free_nodes.iter().enumerate() {
                if *free {
                    for comp in 0..self.m {
                        let v = field.get(a, comp);
                        field.set(a, comp, v * s);
                    }
                }
            }
        }
        true
    }

    fn zero_pinned(&self, field: &mut TestField) {
        for (a, free) in self.free_nodes.iter().enumerate() {
            if !free {
                for comp in 0..self.m {
                    field.set(a, comp, 0.0);
                }
            }
        }
    }
}

/// Minimizes the problem over its free nodes with multistart: the zero field,
/// caller-provided warm starts, then seeded random perturbations.
pub fn minimize<O: ElementObjective>(
    problem: &FieldProblem<'_, O>,
    cfg: &SolverConfig,
    warm_starts: &[TestField],
) -> Result<SolveOutcome> {
    cfg.validate()?;
    if problem.free_nodes.len() != problem.mesh.node_count() {
        return Err(HomError::IncompatibleMesh(
            "free-node mask length must match the mesh",
        ));
    }
    let ws = problem.workspace();
    let ndof = problem.mesh.node_count() * problem.m;

    let zero = TestField::zeros(problem.mesh, problem.m);
    {
        // Zero-field fallback when the offset itself violates the margin.
        let mut probe = zero.clone();
        if !problem.project_ws(&ws, &mut probe, cfg.tau_max) {
            let value = problem.energy_ws(&ws, &zero);
            let (max_gauge, _) = problem.feasibility_ws(&ws, &zero);
            return Ok(SolveOutcome {
                value,
                field: zero,
                iterations: 0,
                best_restart: 0,
                restarts_run: 0,
                feasible: false,
                fallback_zero: true,
                max_gauge,
            });
        }
    }

    let use_zero = cfg.zero_start || warm_starts.is_empty();
    let zero_count = use_zero as usize;
    let total_starts = zero_count + warm_starts.len() + cfg.restarts.saturating_sub(1);
    let mut best: Option<(f64, TestField, usize)> = None;
    let mut iterations = 0usize;
    let h = problem.mesh.spacing();
    let amp = cfg.perturbation
        * h
        * problem
            .constraint
            .map(|c| c.inradius())
            .unwrap_or(1.0);

    for restart in 0..total_starts {
        let mut field = if restart < zero_count {
            zero.clone()
        } else if restart < zero_count + warm_starts.len() {
            let mut f = warm_starts[restart - zero_count].clone();
            problem.zero_pinned(&mut f);
            f
        } else {
            let ordinal = restart - zero_count - warm_starts.len();
            let mut rng = Rng::seed_from(cfg.seed ^ (0x9e37_79b9 + 1 + ordinal as u64));
            let mut f = zero.clone();
            for a in 0..problem.mesh.node_count() {
                if problem.free_nodes[a] {
                    for comp in 0..problem.m {
                        f.set(a, comp, amp * rng.symmetric());
                    }
                }
            }
            f
        };
        if !problem.project_ws(&ws, &mut field, cfg.tau_max) {
            continue;
        }
        let (value, iters) = descend(problem, &ws, cfg, &mut field, ndof);
        iterations += iters;
        let better = match &best {
            None => true,
            Some((bv, _, _)) => value < *bv,
        };
        if better {
            best = Some((value, field, restart));
        }
    }

    let (value, field, best_restart) = best.expect("at least the zero start runs");
    let (max_gauge, _) = problem.feasibility_ws(&ws, &field);
    Ok(SolveOutcome {
        value,
        field,
        iterations,
        best_restart,
        restarts_run: total_starts,
        feasible: true,
        fallback_zero: false,
        max_gauge,
    })
}

/// Spectral projected descent from `field`; returns the reached value.
fn descend<O: ElementObjective>(
    problem: &FieldProblem<'_, O>,
    ws: &Workspace,
    cfg: &SolverConfig,
    field: &mut TestField,
    ndof: usize,
) -> (f64, usize) {
    let mut f_cur = problem.energy_ws(ws, field);
    let mut grad = vec![0.0; ndof];
    let mut grad_new = vec![0.0; ndof];
    problem.gradient_ws(ws, field, &mut grad);

    let mut lambda = {
        let gmax = grad.iter().fold(0.0f64, |m, &g| m.max(crate::math::abs(g)));
        if gmax > 0.0 {
            (1.0 / gmax).clamp(1e-8, 1e4)
        } else {
            1.0
        }
    };

    let mut iters = 0usize;
    let window = cfg.plateau_window.max(1);
    let mut history: Vec<f64> = Vec::with_capacity(window);
    for _ in 0..cfg.max_iterations {
        iters += 1;

        // Stationarity residual: unit-step projected gradient displacement.
        let mut residual_field = field.clone();
        step_free(problem, &mut residual_field, &grad, 1.0);
        let feasible = problem.project_ws(ws, &mut residual_field, cfg.tau_max);
        debug_assert!(feasible);
        let res = max_abs_diff(residual_field.values(), field.values());
        if res <= cfg.grad_tolerance {
            break;
        }

        // Backtracking on the projected arc.
        let mut t = 1.0f64;
        let mut accepted = false;
        for _ in 0..=cfg.max_backtracks {
            let mut trial = field.clone();
            step_free(problem, &mut trial, &grad, t * lambda);
            if !problem.project_ws(ws, &mut trial, cfg.tau_max) {
                t *= cfg.backtrack;
                continue;
            }
            let f_trial = problem.energy_ws(ws, &trial);
            let move_sq = sum_sq_diff(trial.values(), field.values());
            if move_sq == 0.0 {
                break;
            }
            if f_trial <= f_cur - cfg.armijo * move_sq / (t * lambda) {
                problem.gradient_ws(ws, &trial, &mut grad_new);
                // Barzilai-Borwein step from the accepted displacement.
                let mut ss = 0.0;
                let mut sy = 0.0;
                for i in 0..ndof {
                    let s = trial.values()[i] - field.values()[i];
                    let y = grad_new[i] - grad[i];
                    ss += s * s;
                    sy += s * y;
                }
                lambda = if sy > 1e-30 {
                    (ss / sy).clamp(1e-12, 1e8)
                } else {
                    (lambda * 10.0).min(1e8)
                };
                *field = trial;
                f_cur = f_trial;
                core::mem::swap(&mut grad, &mut grad_new);
                accepted = true;
                break;
            }
            t *= cfg.backtrack;
        }
        if !accepted {
            break;
        }
        // Windowed plateau: compare against the value `window` accepted
        // steps ago.
        if history.len() == window {
            let reference = history.remove(0);
            if reference - f_cur <= cfg.value_plateau * (1.0 + crate::math::abs(f_cur)) {
                break;
            }
        }
        history.push(f_cur);
    }
    (f_cur, iters)
}

#[inline]
fn step_free<O: ElementObjective>(
    problem: &FieldProblem<'_, O>,
    field: &mut TestField,
    grad: &[f64],
    step: f64,
) {
    let m = problem.m;
    for a in 0..problem.free_nodes.len() {
        if problem.free_nodes[a] {
            for comp in 0..m {
                let i = a * m + comp;
                let v = field.get(a, comp) - step * grad[i];
                field.set(a, comp, v);
            }
        }
    }
}

#[inline]
fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max(crate::math::abs(x - y)))
}

#[inline]
fn sum_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Free-node mask pinning the mesh boundary to zero.
pub fn zero_boundary_mask(mesh: &Mesh) -> Vec<bool> {
    (0..mesh.node_count()).map(|a| !mesh.is_boundary(a)).collect()
}

/// Mask with all nodes free except one anchor fixing the translation gauge.
pub fn anchored_mask(mesh: &Mesh) -> Vec<bool> {
    let mut mask = vec![true; mesh.node_count()];
    mask[0] = false;
    mask
}

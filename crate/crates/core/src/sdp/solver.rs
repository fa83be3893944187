//! Dense primal-dual interior-point method (HKM direction, Mehrotra
//! predictor-corrector) for the block SDP
//!
//! ```text
//! max λ  s.t.  Σ_b ⟨M_i^b, X_b⟩ + s_i + λ = obj_i,   X_b ⪰ 0,  s ≥ 0.
//! ```
//!
//! Internally this is the standard form `min cᵀ(X, s, λ)` with `c = −e_λ`; the
//! free variable `λ` is eliminated through a bordered Schur-complement solve.

use super::{SdpError, SdpProblem, Solution};
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Target for relative gap and scaled infeasibilities.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
            step_fraction: 0.95,
        }
    }
}

/// Floating-point problem data: `coeffs[b][i]` is `M_i^b` (`None` when zero).
#[derive(Clone, Debug)]
pub struct NumericSdp {
    pub objective: Vec<f64>,
    pub block_dims: Vec<usize>,
    pub coeffs: Vec<Vec<Option<DMatrix<f64>>>>,
}

impl NumericSdp {
    pub fn constraint_count(&self) -> usize {
        self.objective.len()
    }

    /// `Σ_b ⟨M_i^b, X_b⟩` for every constraint.
    pub fn apply(&self, blocks: &[DMatrix<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.constraint_count()];
        for (coeffs, x) in self.coeffs.iter().zip(blocks) {
            for (o, a) in out.iter_mut().zip(coeffs) {
                if let Some(a) = a {
                    *o += a.dot(x);
                }
            }
        }
        out
    }

    /// `min_i (obj_i − Σ_b ⟨M_i^b, X_b⟩)`.
    pub fn supported_lambda(&self, blocks: &[DMatrix<f64>]) -> f64 {
        self.objective
            .iter()
            .zip(self.apply(blocks))
            .map(|(o, q)| o - q)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn solve(problem: &SdpProblem, tol: f64) -> Result<Solution, SdpError> {
    solve_numeric(
        &problem.numeric(),
        &SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    xs: DVector<f64>,
    zs: DVector<f64>,
    y: DVector<f64>,
    u: f64,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rd_s: DVector<f64>,
    rf: f64,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dxs: DVector<f64>,
    dzs: DVector<f64>,
    dy: DVector<f64>,
    du: f64,
}

pub fn solve_numeric(p: &NumericSdp, opts: &SolverOptions) -> Result<Solution, SdpError> {
    let m = p.constraint_count();
    if m == 0 {
        return Err(SdpError::Spec("problem has no constraints".into()));
    }
    let b = DVector::from_column_slice(&p.objective);
    let n_total = (p.block_dims.iter().sum::<usize>() + m) as f64;
    let mut it = initial_point(p);
    let b_norm = b.norm();
    let mut last = (f64::NAN, f64::NAN, f64::NAN);

    for iter in 0..=opts.max_iter {
        let r = residuals(p, &b, &it);
        let pobj = -it.u;
        let dobj = b.dot(&it.y);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = r.rp.norm() / (1.0 + b_norm);
        let dinf = (r.rd.iter().map(|d| d.norm_squared()).sum::<f64>() + r.rd_s.norm_squared())
            .sqrt()
            + r.rf.abs();
        last = (gap, pinf, dinf);
        if std::env::var_os("FLAGCERT_TRACE").is_some() {
            eprintln!(
                "{iter:3} λ={:.12} gap={gap:.2e} pinf={pinf:.2e} dinf={dinf:.2e}",
                it.u
            );
        }
        if gap < opts.tol && pinf < opts.tol && dinf < opts.tol {
            return Ok(Solution {
                lambda: it.u,
                blocks: it.x,
                dual: it.y.iter().map(|v| -v).collect(),
                iterations: iter,
                primal_infeasibility: pinf,
                dual_infeasibility: dinf,
                gap,
            });
        }
        if iter == opts.max_iter {
            break;
        }

        let mu = (it.x.iter().zip(&it.z).map(|(x, z)| x.dot(z)).sum::<f64>() + it.xs.dot(&it.zs))
            / n_total;
        let zinv: Vec<DMatrix<f64>> =
            it.z.iter()
                .map(|z| {
                    spd_inverse(z)
                        .ok_or_else(|| SdpError::Numerical("dual block lost definiteness".into()))
                })
                .collect::<Result<_, _>>()?;
        let schur = schur_complement(p, &it, &zinv);
        let chol = factor(schur)?;

        // Predictor.
        let rc: Vec<DMatrix<f64>> = it.x.iter().map(|x| -x).collect();
        let rc_s = -&it.xs;
        let aff = direction(p, &it, &r, &zinv, &chol, &rc, &rc_s);
        let ap = step_length(&it.x, &aff.dx, &it.xs, &aff.dxs, 1.0);
        let ad = step_length(&it.z, &aff.dz, &it.zs, &aff.dzs, 1.0);
        let mu_aff = (it
            .x
            .iter()
            .zip(&aff.dx)
            .zip(it.z.iter().zip(&aff.dz))
            .map(|((x, dx), (z, dz))| (x + dx * ap).dot(&(z + dz * ad)))
            .sum::<f64>()
            + (&it.xs + &aff.dxs * ap).dot(&(&it.zs + &aff.dzs * ad)))
            / n_total;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector: Rc = σμZ⁻¹ − X − ΔX_a ΔZ_a Z⁻¹.
        let rc: Vec<DMatrix<f64>> = (0..it.x.len())
            .map(|k| &zinv[k] * (sigma * mu) - &it.x[k] - &aff.dx[k] * &aff.dz[k] * &zinv[k])
            .collect();
        let rc_s = DVector::from_fn(m, |i, _| {
            (sigma * mu - aff.dxs[i] * aff.dzs[i]) / it.zs[i] - it.xs[i]
        });
        let d = direction(p, &it, &r, &zinv, &chol, &rc, &rc_s);
        let ap = step_length(&it.x, &d.dx, &it.xs, &d.dxs, opts.step_fraction);
        let ad = step_length(&it.z, &d.dz, &it.zs, &d.dzs, opts.step_fraction);
        for k in 0..it.x.len() {
            it.x[k] += &d.dx[k] * ap;
            it.z[k] += &d.dz[k] * ad;
        }
        it.xs += &d.dxs * ap;
        it.u += d.du * ap;
        it.zs += &d.dzs * ad;
        it.y += &d.dy * ad;
    }
    Err(SdpError::NotConverged {
        iterations: opts.max_iter,
        gap: last.0,
        primal: last.1,
        dual: last.2,
    })
}

fn initial_point(p: &NumericSdp) -> Iterate {
    let m = p.constraint_count();
    let b_max = p.objective.iter().fold(0.0f64, |a, v| a.max(1.0 + v.abs()));
    let mut x = Vec::new();
    let mut z = Vec::new();
    for (dim, coeffs) in p.block_dims.iter().zip(&p.coeffs) {
        let d = *dim as f64;
        let norms = coeffs.iter().map(|a| a.as_ref().map_or(0.0, |a| a.norm()));
        let xi = coeffs
            .iter()
            .zip(&p.objective)
            .map(|(a, bi)| d * (1.0 + bi.abs()) / (1.0 + a.as_ref().map_or(0.0, |a| a.norm())))
            .fold(10f64.max(d.sqrt()), f64::max);
        let eta = norms.fold(10f64.max(d.sqrt()), f64::max);
        x.push(DMatrix::identity(*dim, *dim) * xi);
        z.push(DMatrix::identity(*dim, *dim) * eta);
    }
    Iterate {
        x,
        z,
        xs: DVector::from_element(m, 10f64.max(b_max)),
        zs: DVector::from_element(m, 10.0),
        y: DVector::zeros(m),
        u: 0.0,
    }
}

fn residuals(p: &NumericSdp, b: &DVector<f64>, it: &Iterate) -> Residuals {
    let ax = p.apply(&it.x);
    let rp = DVector::from_fn(b.len(), |i, _| b[i] - ax[i] - it.xs[i] - it.u);
    let rd = p
        .coeffs
        .iter()
        .zip(&it.z)
        .map(|(coeffs, z)| -adjoint(coeffs, &it.y, z.nrows()) - z)
        .collect();
    let rd_s = -&it.y - &it.zs;
    let rf = -1.0 - it.y.sum();
    Residuals { rp, rd, rd_s, rf }
}

/// `Σ_i y_i M_i` for one block.
fn adjoint(coeffs: &[Option<DMatrix<f64>>], y: &DVector<f64>, dim: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(dim, dim);
    for (a, yi) in coeffs.iter().zip(y.iter()) {
        if let Some(a) = a {
            out += a * *yi;
        }
    }
    out
}

/// `M_ij = Σ_b tr(M_i X M_j Z⁻¹) + δ_ij s_i / z_i`.
fn schur_complement(p: &NumericSdp, it: &Iterate, zinv: &[DMatrix<f64>]) -> DMatrix<f64> {
    let m = p.constraint_count();
    let mut schur = DMatrix::from_diagonal(&it.xs.component_div(&it.zs));
    for (k, coeffs) in p.coeffs.iter().enumerate() {
        let active: Vec<usize> = (0..m).filter(|&i| coeffs[i].is_some()).collect();
        let products: Vec<DMatrix<f64>> = active
            .iter()
            .map(|&j| &it.x[k] * coeffs[j].as_ref().unwrap() * &zinv[k])
            .collect();
        for (jj, &j) in active.iter().enumerate() {
            for &i in &active[..=jj] {
                let v = coeffs[i].as_ref().unwrap().dot(&products[jj]);
                schur[(i, j)] += v;
                if i != j {
                    schur[(j, i)] += v;
                }
            }
        }
    }
    schur
}

fn factor(mut schur: DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>, SdpError> {
    let scale = schur.diagonal().amax().max(1e-300);
    for attempt in 0..6 {
        if let Some(c) = schur.clone().cholesky() {
            return Ok(c);
        }
        let shift = scale * 1e-14 * 10f64.powi(2 * attempt);
        for i in 0..schur.nrows() {
            schur[(i, i)] += shift;
        }
    }
    Err(SdpError::Numerical(
        "Schur complement is not positive definite".into(),
    ))
}

#[allow(clippy::too_many_arguments)]
fn direction(
    p: &NumericSdp,
    it: &Iterate,
    r: &Residuals,
    zinv: &[DMatrix<f64>],
    chol: &Cholesky<f64, nalgebra::Dyn>,
    rc: &[DMatrix<f64>],
    rc_s: &DVector<f64>,
) -> Direction {
    let mut d = newton_step(p, it, &r.rp, Some(r), zinv, chol, Some((rc, rc_s)), r.rf);
    // Iterative refinement: push the primal residual left by round-off back
    // through the same factorisation, keeping the dual equations exact.
    for _ in 0..2 {
        let ax = p.apply(&d.dx);
        let e = DVector::from_fn(p.constraint_count(), |i, _| {
            r.rp[i] - ax[i] - d.du - d.dxs[i]
        });
        let ef = r.rf - d.dy.sum();
        if e.amax() <= 1e-15 * (1.0 + r.rp.amax()) && ef.abs() <= 1e-15 {
            break;
        }
        let c = newton_step(p, it, &e, None, zinv, chol, None, ef);
        for k in 0..d.dx.len() {
            d.dx[k] += &c.dx[k];
            d.dz[k] += &c.dz[k];
        }
        d.dxs += &c.dxs;
        d.dzs += &c.dzs;
        d.dy += &c.dy;
        d.du += c.du;
    }
    d
}

/// Solves the HKM Newton system for primal residual `rp`, dual residuals
/// from `r` (zero when `None`), complementarity targets `rc` (zero when
/// `None`) and free-variable residual `rf`.
#[allow(clippy::too_many_arguments)]
fn newton_step(
    p: &NumericSdp,
    it: &Iterate,
    rp: &DVector<f64>,
    r: Option<&Residuals>,
    zinv: &[DMatrix<f64>],
    chol: &Cholesky<f64, nalgebra::Dyn>,
    rc: Option<(&[DMatrix<f64>], &DVector<f64>)>,
    rf: f64,
) -> Direction {
    let m = p.constraint_count();
    let nb = it.x.len();
    let zero_block = |k: usize| DMatrix::zeros(it.x[k].nrows(), it.x[k].nrows());
    let rd: Vec<DMatrix<f64>> = (0..nb)
        .map(|k| r.map_or_else(|| zero_block(k), |r| r.rd[k].clone()))
        .collect();
    let rd_s = r.map_or_else(|| DVector::zeros(m), |r| r.rd_s.clone());
    let rc_blocks: Vec<DMatrix<f64>> = (0..nb)
        .map(|k| rc.map_or_else(|| zero_block(k), |(b, _)| b[k].clone()))
        .collect();
    let rc_s = rc.map_or_else(|| DVector::zeros(m), |(_, s)| s.clone());
    // h = Rp − A(Rc − X Rd Z⁻¹) − (rc_s − s ∘ rd_s / z).
    let shifted: Vec<DMatrix<f64>> = (0..nb)
        .map(|k| &rc_blocks[k] - &it.x[k] * &rd[k] * &zinv[k])
        .collect();
    let a_shift = p.apply(&shifted);
    let h = DVector::from_fn(m, |i, _| {
        rp[i] - a_shift[i] - (rc_s[i] - it.xs[i] * rd_s[i] / it.zs[i])
    });
    let v1 = chol.solve(&h);
    let v2 = chol.solve(&DVector::from_element(m, 1.0));
    let du = (v1.sum() - rf) / v2.sum();
    let dy = v1 - v2 * du;
    let dz: Vec<DMatrix<f64>> = (0..nb)
        .map(|k| &rd[k] - adjoint(&p.coeffs[k], &dy, it.x[k].nrows()))
        .collect();
    let dzs = &rd_s - &dy;
    let dx: Vec<DMatrix<f64>> = (0..nb)
        .map(|k| {
            let d = &rc_blocks[k] - &it.x[k] * &dz[k] * &zinv[k];
            (&d + d.transpose()) * 0.5
        })
        .collect();
    let dxs = DVector::from_fn(m, |i, _| rc_s[i] - it.xs[i] * dzs[i] / it.zs[i]);
    Direction {
        dx,
        dz,
        dxs,
        dzs,
        dy,
        du,
    }
}

/// Largest `α ≤ 1` keeping every block PD, scaled by `fraction` when the
/// boundary is closer than 1.
fn step_length(
    x: &[DMatrix<f64>],
    dx: &[DMatrix<f64>],
    xs: &DVector<f64>,
    dxs: &DVector<f64>,
    fraction: f64,
) -> f64 {
    let mut alpha_max = f64::INFINITY;
    for (xk, dk) in x.iter().zip(dx) {
        alpha_max = alpha_max.min(max_step(xk, dk));
    }
    for (v, d) in xs.iter().zip(dxs.iter()) {
        if *d < 0.0 {
            alpha_max = alpha_max.min(-v / d);
        }
    }
    (fraction * alpha_max).min(1.0)
}

/// `sup {α : X + αΔX ⪰ 0}` via the eigenvalues of `L⁻¹ ΔX L⁻ᵀ`.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(chol) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let Some(l_inv) = l.try_inverse() else {
        return 0.0;
    };
    let w = &l_inv * dx * l_inv.transpose();
    let w = (&w + w.transpose()) * 0.5;
    let min_eig = SymmetricEigen::new(w).eigenvalues.min();
    if min_eig >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min_eig
    }
}

fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let inv = m.clone().cholesky()?.inverse();
    Some((&inv + inv.transpose()) * 0.5)
}

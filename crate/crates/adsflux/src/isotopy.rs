//! One-parameter families of equivariant maps into H²×H² and their flux: the
//! integral of the symplectic form over the cylinder swept by a lifted loop.
//! Two generators of families are provided: smooth Hamiltonian flows of
//! invariant functions (flux zero), and closed-form flows of discrete
//! one-forms on the octagon mesh (flux = duration · period).

use crate::error::{GeomError, Result};
use crate::frame::BiPoint;
use crate::lie::{mobius, GroupElt, HPoint};
use crate::mesh::{FieldOnSurface, OneForm, SurfaceMesh};
use crate::rep::{LoopWord, RepClass, RepPair};
use crate::surface::EquivMap;
use std::rc::Rc;

/// A family t ∈ [0,1] of equivariant maps H² → H²×H². Evaluation is
/// column-oriented — all requested times for one base point at once — so that
/// flow-based families integrate each trajectory a single time. Endpoints
/// are expected to be Lagrangian; intermediate maps need not be.
pub struct IsotopyPath {
    column: Rc<dyn Fn(HPoint, &[f64]) -> Result<Vec<BiPoint>>>,
}

impl IsotopyPath {
    pub fn new(column: impl Fn(HPoint, &[f64]) -> Result<Vec<BiPoint>> + 'static) -> Self {
        IsotopyPath { column: Rc::new(column) }
    }

    pub fn eval(&self, t: f64, x: HPoint) -> Result<BiPoint> {
        Ok((self.column)(x, &[t])?[0])
    }

    pub fn column(&self, x: HPoint, ts: &[f64]) -> Result<Vec<BiPoint>> {
        (self.column)(x, ts)
    }

    /// The map at a fixed time as a standalone object.
    pub fn at(&self, t: f64) -> EquivMap {
        let col = self.column.clone();
        EquivMap::from_fn(move |x| Ok(col(x, &[t])?[0]))
    }

    pub fn start(&self) -> EquivMap {
        self.at(0.0)
    }

    pub fn end(&self) -> EquivMap {
        self.at(1.0)
    }

    /// The same family traversed backwards.
    pub fn reversed(self) -> IsotopyPath {
        let col = self.column;
        IsotopyPath {
            column: Rc::new(move |x, ts: &[f64]| {
                let flipped: Vec<f64> = ts.iter().map(|t| 1.0 - t).collect();
                col(x, &flipped)
            }),
        }
    }
}

/// Line integral of the primitive α = dx_left/y_left − dx_right/y_right
/// along a sampled curve, as a Riemann–Stieltjes trapezoid sum. Second-order
/// accurate even across kinks of the curve, since no tangents are formed.
fn primitive_line_integral(pts: &[BiPoint]) -> f64 {
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let dxl = w[1].left.x - w[0].left.x;
        let dxr = w[1].right.x - w[0].right.x;
        acc += dxl * 0.5 * (1.0 / w[0].left.y + 1.0 / w[1].left.y)
            - dxr * 0.5 * (1.0 / w[0].right.y + 1.0 / w[1].right.y);
    }
    acc
}

/// Flux of a family against a loop class: ∫∫ F*Ω over the cylinder swept by
/// the lifted loop, F(s,t) = Λ_t(ℓ̃(s)), with Ω = (dx∧dy/y²)_left −
/// (dx∧dy/y²)_right. Since Ω = dα with α = dx/y per factor, the integral is
/// evaluated by Stokes as the circulation of F*α around the cylinder
/// boundary, which is robust against the kinks of piecewise-smooth families.
pub fn flux(path: &IsotopyPath, rep: &RepPair, word: &LoopWord) -> Result<f64> {
    let lift = rep.loop_lift(word);
    let ns = 1024 * lift.segments();
    let nt = 256;
    let both = [0.0, 1.0];
    let mut bottom = Vec::with_capacity(ns + 1);
    let mut top = Vec::with_capacity(ns + 1);
    for k in 0..=ns {
        let col = path.column(lift.at(k as f64 / ns as f64), &both)?;
        bottom.push(col[0]);
        top.push(col[1]);
    }
    let ts: Vec<f64> = (0..=nt).map(|k| k as f64 / nt as f64).collect();
    let side0 = path.column(lift.at(0.0), &ts)?;
    let side1 = path.column(lift.at(1.0), &ts)?;
    // counterclockwise boundary of [0,1]² in (s,t)
    Ok(primitive_line_integral(&bottom) + primitive_line_integral(&side1)
        - primitive_line_integral(&top)
        - primitive_line_integral(&side0))
}

/// Invariant Hamiltonian on H²×H² measuring displacement from the totally
/// geodesic anchor graph x ↦ (x, βx).
#[derive(Debug, Clone, Copy)]
pub enum Hamiltonian {
    Constant(f64),
    /// H(x, y) = amplitude · exp(−d(x, β⁻¹y)² / width²).
    Bump { amplitude: f64, width: f64 },
}

/// One (dx, dy) vector per factor.
type BiVelocity = ((f64, f64), (f64, f64));

fn rep_beta(rep: &RepPair) -> Result<GroupElt> {
    match rep.class {
        RepClass::Diagonal => Ok(GroupElt::identity()),
        RepClass::Conjugate(beta) => Ok(beta),
        RepClass::General => Err(GeomError::UnsupportedRepClass),
    }
}

/// The flow of the Hamiltonian vector field of an invariant function,
/// starting from an arbitrary equivariant map. Integrated with RK4 at the
/// given step in flow time; the function's partials are finite differences.
pub fn hamiltonian_isotopy(
    rep: &RepPair,
    ham: Hamiltonian,
    duration: f64,
    start: EquivMap,
    step: f64,
) -> Result<IsotopyPath> {
    let beta_inv = rep_beta(rep)?.inverse();
    let h_fn = move |b: &BiPoint| -> f64 {
        match ham {
            Hamiltonian::Constant(c) => c,
            Hamiltonian::Bump { amplitude, width } => {
                let d = b.left.dist(&mobius(&beta_inv, b.right));
                amplitude * (-d * d / (width * width)).exp()
            }
        }
    };
    // ξ = (y²H_y, −y²H_x) on the left factor and the sign flip on the right,
    // matching Ω = Ω_left − Ω_right
    let field = move |b: &BiPoint| -> BiVelocity {
        let fd = 1e-6;
        let hl = b.left.y;
        let hr = b.right.y;
        let part = |dxl: f64, dyl: f64, dxr: f64, dyr: f64| {
            h_fn(&BiPoint::new(
                HPoint::new(b.left.x + dxl, b.left.y + dyl),
                HPoint::new(b.right.x + dxr, b.right.y + dyr),
            ))
        };
        let hx_l = (part(fd, 0.0, 0.0, 0.0) - part(-fd, 0.0, 0.0, 0.0)) / (2.0 * fd);
        let hy_l = (part(0.0, fd, 0.0, 0.0) - part(0.0, -fd, 0.0, 0.0)) / (2.0 * fd);
        let hx_r = (part(0.0, 0.0, fd, 0.0) - part(0.0, 0.0, -fd, 0.0)) / (2.0 * fd);
        let hy_r = (part(0.0, 0.0, 0.0, fd) - part(0.0, 0.0, 0.0, -fd)) / (2.0 * fd);
        ((hl * hl * hy_l, -hl * hl * hx_l), (-hr * hr * hy_r, hr * hr * hx_r))
    };
    let start = Rc::new(start);
    let col_field = field;
    Ok(IsotopyPath::new(move |x: HPoint, ts: &[f64]| -> Result<Vec<BiPoint>> {
        let mut b = start.at(x)?;
        let mut out = Vec::with_capacity(ts.len());
        let mut tau = 0.0;
        for t in ts {
            let target = t * duration;
            let span = target - tau;
            let n = (span.abs() / step).ceil().max(1.0) as usize;
            if span.abs() > 1e-15 {
                let h = span / n as f64;
                for _ in 0..n {
                    let shift = |b: &BiPoint, v: &BiVelocity, f: f64| {
                        BiPoint::new(
                            HPoint::new(b.left.x + f * h * v.0 .0, b.left.y + f * h * v.0 .1),
                            HPoint::new(b.right.x + f * h * v.1 .0, b.right.y + f * h * v.1 .1),
                        )
                    };
                    let k1 = col_field(&b);
                    let k2 = col_field(&shift(&b, &k1, 0.5));
                    let k3 = col_field(&shift(&b, &k2, 0.5));
                    let k4 = col_field(&shift(&b, &k3, 1.0));
                    let comb = |a: f64, c2: f64, c3: f64, c4: f64| a + 2.0 * c2 + 2.0 * c3 + c4;
                    b = BiPoint::new(
                        HPoint::new(
                            b.left.x + h / 6.0 * comb(k1.0 .0, k2.0 .0, k3.0 .0, k4.0 .0),
                            b.left.y + h / 6.0 * comb(k1.0 .1, k2.0 .1, k3.0 .1, k4.0 .1),
                        ),
                        HPoint::new(
                            b.right.x + h / 6.0 * comb(k1.1 .0, k2.1 .0, k3.1 .0, k4.1 .0),
                            b.right.y + h / 6.0 * comb(k1.1 .1, k2.1 .1, k3.1 .1, k4.1 .1),
                        ),
                    );
                }
            }
            tau = target;
            out.push(b);
        }
        Ok(out)
    }))
}

/// The family of graphs of the exact flow of a discrete one-form on the
/// right factor: Λ_t(x) = (x, β·ψ_{t·duration}(x)). Flux against a loop is
/// duration times the form's period on it.
pub fn closed_form_isotopy(
    rep: &RepPair,
    mesh: Rc<SurfaceMesh>,
    form: Rc<OneForm>,
    duration: f64,
) -> Result<IsotopyPath> {
    let beta = rep_beta(rep)?;
    let field = Rc::new(FieldOnSurface::new(mesh, form));
    Ok(IsotopyPath::new(move |x: HPoint, ts: &[f64]| -> Result<Vec<BiPoint>> {
        let times: Vec<f64> = ts.iter().map(|t| t * duration).collect();
        let moved = field.flow_samples(x, &times)?;
        Ok(moved
            .into_iter()
            .map(|y| BiPoint::new(x, mobius(&beta, y)))
            .collect())
    }))
}

/// Straight-line interpolation (per half-plane factor) between two
/// equivariant maps; only the endpoints are Lagrangian in general.
pub fn linear_isotopy(from: EquivMap, to: EquivMap) -> IsotopyPath {
    IsotopyPath::new(move |x: HPoint, ts: &[f64]| -> Result<Vec<BiPoint>> {
        let a = from.at(x)?;
        let b = to.at(x)?;
        Ok(ts
            .iter()
            .map(|t| {
                BiPoint::new(
                    HPoint::new(
                        a.left.x + t * (b.left.x - a.left.x),
                        a.left.y + t * (b.left.y - a.left.y),
                    ),
                    HPoint::new(
                        a.right.x + t * (b.right.x - a.right.x),
                        a.right.y + t * (b.right.y - a.right.y),
                    ),
                )
            })
            .collect())
    })
}

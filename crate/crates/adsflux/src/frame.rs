//! The future unit timelike tangent bundle of AdS³ in body-frame
//! coordinates (g, u₀), where the world velocity at g is g·u₀.
//!
//! In this chart the geodesic flow is exact — right multiplication by a
//! one-parameter group — and the projection to H²×H² is a two-line formula.

use crate::error::{GeomError, Result};
use crate::lie::{
    cross, exp_alg, f_embed, f_invert, pairing, translation_along, AlgVec, GroupElt, HPoint,
    IsomPair, Mat2,
};

/// Point of the frame bundle: base point g of AdS³ and body-frame velocity
/// u₀ (unit future timelike).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub g: GroupElt,
    pub u0: AlgVec,
}

impl FramePoint {
    pub fn new(g: GroupElt, u0: AlgVec) -> Self {
        debug_assert!((pairing(u0, u0) + 1.0).abs() < 1e-9);
        debug_assert!(u0.is_future());
        FramePoint { g, u0 }
    }

    /// World-frame velocity matrix g·u₀ (a tangent vector at g).
    pub fn world_velocity(&self) -> Mat2 {
        self.g.m * self.u0.m
    }
}

/// Point of H²×H², the space of timelike geodesics of AdS³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiPoint {
    pub left: HPoint,
    pub right: HPoint,
}

impl BiPoint {
    pub fn new(left: HPoint, right: HPoint) -> Self {
        BiPoint { left, right }
    }

    pub fn diagonal(p: HPoint) -> Self {
        BiPoint { left: p, right: p }
    }

    /// Product distance (l² combination of the factor distances).
    pub fn dist(&self, other: &BiPoint) -> f64 {
        let dl = self.left.dist(&other.left);
        let dr = self.right.dist(&other.right);
        (dl * dl + dr * dr).sqrt()
    }

    pub fn apply(&self, a: &IsomPair) -> BiPoint {
        BiPoint::new(
            crate::lie::mobius(&a.left, self.left),
            crate::lie::mobius(&a.right, self.right),
        )
    }
}

/// Tangent vector to the frame bundle in body-frame horizontal/vertical
/// coordinates: w is the horizontal part (body velocity of the base curve),
/// v the vertical part (covariant derivative of the velocity field).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTangent {
    pub w: AlgVec,
    pub v: AlgVec,
}

/// Geodesic flow: (g, u₀) ↦ (g·exp(t u₀), u₀). Periodic with period π in
/// PSL(2,R).
pub fn geodesic_flow(f: &FramePoint, t: f64) -> FramePoint {
    FramePoint { g: f.g * exp_alg(f.u0, t), u0: f.u0 }
}

/// The flow generator χ at a frame point: horizontal part u₀, no vertical
/// part.
pub fn flow_tangent(f: &FramePoint) -> FrameTangent {
    FrameTangent { w: f.u0, v: AlgVec::zero() }
}

/// Projection to H²×H²: the left factor reads the world velocity, the right
/// factor the body velocity.
pub fn project(f: &FramePoint) -> Result<BiPoint> {
    let left = f_invert(f.g.conj(f.u0))?;
    let right = f_invert(f.u0)?;
    Ok(BiPoint::new(left, right))
}

/// Induced isometry action on the frame bundle: (g,u₀) ↦ (α g β⁻¹, β u₀ β⁻¹).
pub fn act(a: &IsomPair, f: &FramePoint) -> FramePoint {
    FramePoint {
        g: a.left * f.g * a.right.inverse(),
        u0: a.right.conj(f.u0),
    }
}

/// Sasaki pairing of two frame tangents: horizontal parts pair with the
/// Lorentzian metric, vertical parts likewise, mixed terms vanish.
pub fn sasaki_pairing(t1: &FrameTangent, t2: &FrameTangent) -> f64 {
    pairing(t1.w, t2.w) + pairing(t1.v, t2.v)
}

/// Extract the body-frame tangent of a frame path at parameter s by central
/// differences (step h), resolving the PSL sign ambiguity towards the center
/// sample. The vertical part is the covariant derivative u₀' + cross(w, u₀).
pub fn path_tangent(path: &dyn Fn(f64) -> FramePoint, s: f64, h: f64) -> FrameTangent {
    let f0 = path(s);
    let fp = path(s + h);
    let fm = path(s - h);
    let align = |m: Mat2, to: &Mat2| if (m - to).norm() <= (m + to).norm() { m } else { -m };
    let gp = align(fp.g.m, &f0.g.m);
    let gm = align(fm.g.m, &f0.g.m);
    let gprime = (gp - gm) / (2.0 * h);
    let mut um = (fp.u0.m - fm.u0.m) / (2.0 * h);
    let ut = um.trace() / 2.0;
    um[(0, 0)] -= ut;
    um[(1, 1)] -= ut;
    let uprime = AlgVec::new(um);
    // g⁻¹ g' is trace-free only up to the finite-difference error; project
    let mut wm = f0.g.inv_mat() * gprime;
    let half_trace = wm.trace() / 2.0;
    wm[(0, 0)] -= half_trace;
    wm[(1, 1)] -= half_trace;
    let w = AlgVec::new(wm);
    FrameTangent { w, v: uprime + cross(w, f0.u0) }
}

/// How `connection_along` differentiates the path.
#[derive(Debug, Clone, Copy)]
pub enum DerivMode {
    /// Central differences at the given step.
    Step(f64),
    /// Central differences at two step sizes with a Richardson consistency
    /// gate; errors out when the extrapolated values disagree beyond the
    /// tolerance.
    CrossCheck { step: f64, gate: f64 },
}

impl Default for DerivMode {
    fn default() -> Self {
        DerivMode::Step(1e-5)
    }
}

/// The connection form ω = −g_S(χ, ·) evaluated on the velocity of a frame
/// path: ω(d/ds) = −⟨u₀(s), g(s)⁻¹ g'(s)⟩.
pub fn connection_along(
    path: &dyn Fn(f64) -> FramePoint,
    s: f64,
    mode: DerivMode,
) -> Result<f64> {
    let eval = |h: f64| {
        let t = path_tangent(path, s, h);
        -pairing(path(s).u0, t.w)
    };
    match mode {
        DerivMode::Step(h) => Ok(eval(h)),
        DerivMode::CrossCheck { step, gate } => {
            let a = eval(step);
            let b = eval(step * 2.0);
            // central differences are O(h²): Richardson-extrapolate and gate
            // on the correction size
            let extrapolated = (4.0 * a - b) / 3.0;
            let residual = (extrapolated - a).abs();
            if residual > gate {
                return Err(GeomError::NonDifferentiable { residual });
            }
            Ok(extrapolated)
        }
    }
}

/// A global smooth section of the projection: g₀ translates the right point
/// to the left one along their geodesic, and the velocity is the embedded
/// right point. Over the diagonal this is the parallel section (id, f(x)).
pub fn canonical_section(b: &BiPoint) -> FramePoint {
    FramePoint {
        g: translation_along(b.right, b.left),
        u0: f_embed(b.right),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Section of the frame bundle over AdS³ spreading a fixed world vector u by
/// left (resp. right) translations; the two sections share exactly the flow
/// orbit through (id, u).
pub fn foliation_section(side: Side, u: AlgVec, g: GroupElt) -> FramePoint {
    let u0 = match side {
        Side::Left => u,
        Side::Right => g.inverse().conj(u),
    };
    FramePoint::new(g, u0)
}

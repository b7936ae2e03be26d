//! Equivariant spacelike surfaces in AdS³, their unit-normal lifts, Gauss
//! maps into H²×H², and the pointwise Lagrangian defect of maps into the
//! product.

use crate::error::{GeomError, Result};
use crate::frame::{project, BiPoint, FramePoint};
use crate::lie::{cross, f_embed, mobius, pairing, AlgVec, GroupElt, HPoint, Mat2};
use crate::rep::RepPair;

/// Spacelike surface given by an evaluator into SL(2,R) matrices (continuous
/// representatives, not PSL-normalized) with optional analytic coordinate
/// derivatives.
pub struct SurfaceAdS {
    eval: Box<dyn Fn(HPoint) -> Mat2>,
    jac: Option<Box<dyn Fn(HPoint) -> (Mat2, Mat2)>>,
}

impl SurfaceAdS {
    pub fn new(eval: impl Fn(HPoint) -> Mat2 + 'static) -> Self {
        SurfaceAdS { eval: Box::new(eval), jac: None }
    }

    pub fn with_jacobian(
        eval: impl Fn(HPoint) -> Mat2 + 'static,
        jac: impl Fn(HPoint) -> (Mat2, Mat2) + 'static,
    ) -> Self {
        SurfaceAdS { eval: Box::new(eval), jac: Some(Box::new(jac)) }
    }

    pub fn at(&self, p: HPoint) -> Mat2 {
        (self.eval)(p)
    }

    /// Coordinate derivatives (∂σ/∂x, ∂σ/∂y), analytic when available.
    pub fn derivs(&self, p: HPoint) -> (Mat2, Mat2) {
        match &self.jac {
            Some(j) => j(p),
            None => {
                let h = 1e-5;
                let dx = ((self.eval)(HPoint::new(p.x + h, p.y))
                    - (self.eval)(HPoint::new(p.x - h, p.y)))
                    / (2.0 * h);
                let dy = ((self.eval)(HPoint::new(p.x, p.y + h))
                    - (self.eval)(HPoint::new(p.x, p.y - h)))
                    / (2.0 * h);
                (dx, dy)
            }
        }
    }

    /// Body-frame coordinate tangents σ⁻¹ ∂σ, projected onto sl(2,R).
    pub fn body_tangents(&self, p: HPoint) -> (AlgVec, AlgVec) {
        let g = self.at(p);
        let det = g.determinant();
        let inv = Mat2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det;
        let (dx, dy) = self.derivs(p);
        let tf = |m: Mat2| {
            let mut m = m;
            let t = m.trace() / 2.0;
            m[(0, 0)] -= t;
            m[(1, 1)] -= t;
            AlgVec::new(m)
        };
        (tf(inv * dx), tf(inv * dy))
    }

    /// Induced metric in the coordinate directions: the Gram matrix
    /// [⟨t_x,t_x⟩, ⟨t_x,t_y⟩; ·, ⟨t_y,t_y⟩].
    pub fn induced_metric(&self, p: HPoint) -> [[f64; 2]; 2] {
        let (tx, ty) = self.body_tangents(p);
        [
            [pairing(tx, tx), pairing(tx, ty)],
            [pairing(tx, ty), pairing(ty, ty)],
        ]
    }
}

/// The totally geodesic spacelike plane anchored to a conjugate-class
/// representation: σ(x) = exp((π/2)·f(x))·β⁻¹, which collapses to the matrix
/// f(x)·β⁻¹ since f(x) has determinant one. Its Gauss map is the graph
/// x ↦ (x, β·x).
pub fn geodesic_plane_surface(rep: &RepPair) -> Result<SurfaceAdS> {
    let beta = rep.beta().ok_or(GeomError::UnsupportedRepClass)?;
    let binv = beta.inv_mat();
    let eval = move |p: HPoint| f_embed(p).m * binv;
    let jac = move |p: HPoint| {
        let (a, b) = (p.x, p.y);
        let dfa = Mat2::new(-1.0, 2.0 * a, 0.0, 1.0) / b;
        let dfb = -f_embed(p).m / b + Mat2::new(0.0, 2.0, 0.0, 0.0);
        (dfa * binv, dfb * binv)
    };
    Ok(SurfaceAdS::with_jacobian(eval, jac))
}

/// Residual of ρ-equivariance of a surface over the generator images,
/// sampled at the given points: σ(ρ_l·x) = ρ_l · σ(x) · ρ_r⁻¹ in PSL(2,R).
pub fn surface_equivariance_residual(rep: &RepPair, sigma: &SurfaceAdS, samples: &[HPoint]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in &rep.gens {
        for p in samples {
            let lhs = GroupElt::new(sigma.at(mobius(&g.left, *p)));
            let rhs = GroupElt::new(g.left.m * sigma.at(*p) * g.right.inv_mat());
            worst = worst.max(lhs.dist(&rhs));
        }
    }
    worst
}

/// Unit-normal lift of a spacelike surface: the frame point (σ(p), N₀) with
/// N₀ the future unit normal in the body frame.
pub fn normal_lift(sigma: &SurfaceAdS, p: HPoint) -> Result<FramePoint> {
    let (tx, ty) = sigma.body_tangents(p);
    let metric = [
        [pairing(tx, tx), pairing(tx, ty)],
        [pairing(tx, ty), pairing(ty, ty)],
    ];
    let det = metric[0][0] * metric[1][1] - metric[0][1] * metric[0][1];
    let tr = metric[0][0] + metric[1][1];
    // positive definite check via trace/determinant, with the spec's floor on
    // the smallest eigenvalue
    let min_eig = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
    if !(det > 0.0 && tr > 0.0 && min_eig > 1e-8) {
        return Err(GeomError::Degenerate);
    }
    let mut n = cross(tx, ty);
    let norm2 = -pairing(n, n);
    if norm2 <= 0.0 {
        return Err(GeomError::Degenerate);
    }
    n = n * (1.0 / norm2.sqrt());
    if !n.is_future() {
        n = -n;
    }
    Ok(FramePoint::new(GroupElt::new(sigma.at(p)), n))
}

/// Equivariant map of H² into H²×H² (e.g. a Gauss map or a Lagrangian
/// embedding), with a total evaluator.
#[derive(Clone)]
pub struct EquivMap {
    eval: std::rc::Rc<dyn Fn(HPoint) -> Result<BiPoint>>,
}

impl EquivMap {
    pub fn from_fn(eval: impl Fn(HPoint) -> Result<BiPoint> + 'static) -> Self {
        EquivMap { eval: std::rc::Rc::new(eval) }
    }

    pub fn diagonal() -> Self {
        EquivMap::from_fn(|p| Ok(BiPoint::diagonal(p)))
    }

    /// The graph x ↦ (x, g·x) of an isometry.
    pub fn graph_of_isometry(g: GroupElt) -> Self {
        EquivMap::from_fn(move |p| Ok(BiPoint::new(p, mobius(&g, p))))
    }

    pub fn at(&self, p: HPoint) -> Result<BiPoint> {
        (self.eval)(p)
    }
}

/// Gauss map of a spacelike surface: project the unit-normal lift.
pub fn gauss_map(sigma: SurfaceAdS) -> EquivMap {
    EquivMap::from_fn(move |p| project(&normal_lift(&sigma, p)?))
}

/// Residual of ρ-equivariance of a map into the product, over generators and
/// sample points.
pub fn map_equivariance_residual(rep: &RepPair, map: &EquivMap, samples: &[HPoint]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in &rep.gens {
        for p in samples {
            let lhs = map.at(mobius(&g.left, *p)).expect("map total on samples");
            let rhs = map.at(*p).expect("map total on samples").apply(g);
            worst = worst.max(lhs.dist(&rhs));
        }
    }
    worst
}

/// Pointwise Lagrangian defect of a map into H²×H²: |Λ*Ω| on the coordinate
/// directions, normalized by the Riemannian area element of the pulled-back
/// product metric. Zero exactly for Lagrangian maps.
pub fn lagrangian_defect(map: &EquivMap, p: HPoint, h: f64) -> Result<f64> {
    let vx = (map.at(HPoint::new(p.x + h, p.y))?, map.at(HPoint::new(p.x - h, p.y))?);
    let vy = (map.at(HPoint::new(p.x, p.y + h))?, map.at(HPoint::new(p.x, p.y - h))?);
    let b0 = map.at(p)?;
    let d = |a: &BiPoint, b: &BiPoint| {
        [
            (a.left.x - b.left.x) / (2.0 * h),
            (a.left.y - b.left.y) / (2.0 * h),
            (a.right.x - b.right.x) / (2.0 * h),
            (a.right.y - b.right.y) / (2.0 * h),
        ]
    };
    let v1 = d(&vx.0, &vx.1);
    let v2 = d(&vy.0, &vy.1);
    let (yl2, yr2) = (b0.left.y * b0.left.y, b0.right.y * b0.right.y);
    let omega = (v1[0] * v2[1] - v1[1] * v2[0]) / yl2 - (v1[2] * v2[3] - v1[3] * v2[2]) / yr2;
    let dot = |a: &[f64; 4], b: &[f64; 4]| (a[0] * b[0] + a[1] * b[1]) / yl2 + (a[2] * b[2] + a[3] * b[3]) / yr2;
    let gram = dot(&v1, &v1) * dot(&v2, &v2) - dot(&v1, &v2) * dot(&v1, &v2);
    if gram <= 0.0 {
        return Err(GeomError::Degenerate);
    }
    Ok(omega.abs() / gram.sqrt())
}

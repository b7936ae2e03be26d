//! Parallel transport in the principal R-bundle over H²×H² whose total space
//! is the frame bundle of AdS³: transport offsets along base paths, loop
//! defects, symplectic areas, and fiber-time comparisons.
//!
//! The curvature identity dω = ½·π*Ω ties loop defects to symplectic areas:
//! for a counterclockwise loop, defect = −½ · (signed area), with the area
//! form Ω = (left-factor dx∧dy/y²) − (right-factor dx∧dy/y²).

use crate::error::{GeomError, Result};
use crate::frame::{
    act, canonical_section, connection_along, geodesic_flow, project, BiPoint, DerivMode,
    FramePoint,
};
use crate::lie::IsomPair;
use crate::quad::{simpson2d_adaptive, simpson_adaptive};
use std::f64::consts::{FRAC_PI_2, PI};

/// Default bound on the per-factor hyperbolic distance between consecutive
/// quadrature samples.
pub const STEP_BOUND: f64 = 0.05;

/// Finite-difference step used when differentiating section lifts. Large
/// enough that the roundoff noise (∝ 1/step) stays below the quadrature
/// tolerances, small enough that the O(step²) truncation does too.
const FD_STEP: f64 = 1e-5;

/// Piecewise-smooth path in H²×H², parametrized over [0,1]. The evaluator
/// must be defined slightly beyond the endpoints (finite differences probe
/// there); `breaks` lists interior parameters where smoothness may fail, so
/// that quadrature is applied per smooth piece.
pub struct BasePath {
    eval: Box<dyn Fn(f64) -> BiPoint>,
    breaks: Vec<f64>,
}

impl BasePath {
    pub fn new(eval: impl Fn(f64) -> BiPoint + 'static, mut breaks: Vec<f64>) -> Self {
        breaks.retain(|b| *b > 0.0 && *b < 1.0);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        BasePath { eval: Box::new(eval), breaks }
    }

    pub fn constant(b: BiPoint) -> Self {
        BasePath::new(move |_| b, vec![])
    }

    /// Straight product-geodesic segment between two points.
    pub fn segment(from: BiPoint, to: BiPoint) -> Self {
        let geo = |a: crate::lie::HPoint, b: crate::lie::HPoint| {
            let d = a.dist(&b);
            // constant-speed geodesic: fractional powers of the translation
            // taking a to b, via its generator
            let c = crate::lie::cross(crate::lie::f_embed(a), crate::lie::f_embed(b));
            let n = crate::lie::pairing(c, c).sqrt();
            move |s: f64| {
                if d < 1e-15 {
                    a
                } else {
                    crate::lie::mobius(&crate::lie::exp_alg(c, s * d / (2.0 * n)), a)
                }
            }
        };
        let l = geo(from.left, to.left);
        let r = geo(from.right, to.right);
        BasePath::new(move |s| BiPoint::new(l(s), r(s)), vec![])
    }

    pub fn at(&self, s: f64) -> BiPoint {
        (self.eval)(s)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn reversed(self) -> BasePath {
        let eval = self.eval;
        let breaks = self.breaks.iter().map(|b| 1.0 - b).collect();
        BasePath::new(move |s| eval(1.0 - s), breaks)
    }

    /// Concatenation, first path on [0,1/2].
    pub fn then(self, other: BasePath) -> BasePath {
        let (e1, e2) = (self.eval, other.eval);
        let mut breaks: Vec<f64> = self.breaks.iter().map(|b| b / 2.0).collect();
        breaks.push(0.5);
        breaks.extend(other.breaks.iter().map(|b| 0.5 + b / 2.0));
        BasePath::new(
            move |s| if s < 0.5 { e1(2.0 * s) } else { e2(2.0 * s - 1.0) },
            breaks,
        )
    }

    fn piece_bounds(&self) -> Vec<(f64, f64)> {
        let mut cuts = vec![0.0];
        cuts.extend_from_slice(&self.breaks);
        cuts.push(1.0);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Verify the sampling bound: consecutive samples at the given resolution
    /// must stay within STEP_BOUND per factor.
    fn check_step_bound(&self, n_per_piece: usize) -> Result<()> {
        for (a, b) in self.piece_bounds() {
            let h = (b - a) / n_per_piece as f64;
            let mut prev = self.at(a);
            for k in 1..=n_per_piece {
                let cur = self.at(a + h * k as f64);
                let dl = prev.left.dist(&cur.left);
                let dr = prev.right.dist(&cur.right);
                let step = dl.max(dr);
                if step > STEP_BOUND {
                    return Err(GeomError::StepTooCoarse { step, bound: STEP_BOUND });
                }
                prev = cur;
            }
        }
        Ok(())
    }
}

/// Transport offset of the parallel lift along a base path, relative to the
/// given section: the lift satisfies t'(s) = −(Σ*ω)(d/ds), so the offset is
/// −∫ Σ*ω.
pub fn transport_offset_with(
    path: &BasePath,
    section: &dyn Fn(&BiPoint) -> FramePoint,
) -> Result<f64> {
    transport_offset_with_tol(path, section, 1e-10, 1e-12)
}

/// As `transport_offset_with`, with caller-chosen quadrature tolerances.
/// Paths through numerically evaluated maps (mesh flows, Gauss maps) carry a
/// finite-difference noise floor around 1e−8 that the default tolerances
/// cannot meet.
pub fn transport_offset_with_tol(
    path: &BasePath,
    section: &dyn Fn(&BiPoint) -> FramePoint,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    path.check_step_bound(128)?;
    let mut total = 0.0;
    for (a, b) in path.piece_bounds() {
        let framepath = |s: f64| section(&path.at(s));
        let integrand = |s: f64| {
            // shrink the stencil near piece boundaries so that it never
            // crosses a corner of the path
            let h = FD_STEP
                .min(0.9 * (s - a))
                .min(0.9 * (b - s))
                .max(1e-9);
            -connection_along(&framepath, s, DerivMode::Step(h))
                .expect("plain finite differences are total")
        };
        total += simpson_adaptive(&integrand, a + 1e-9, b - 1e-9, 32, rel_tol, abs_tol)?;
    }
    Ok(total)
}

/// Transport offset relative to the canonical section.
pub fn transport_offset(path: &BasePath) -> Result<f64> {
    transport_offset_with(path, &|b| canonical_section(b))
}

/// Loop transport defect: the fiber offset picked up by the parallel lift
/// around a closed base path. Section-independent.
pub fn loop_defect(path: &BasePath) -> Result<f64> {
    let residual = path.at(0.0).dist(&path.at(1.0));
    if residual > 1e-12 {
        return Err(GeomError::EndpointMismatch { residual });
    }
    transport_offset(path)
}

/// Signed symplectic area of a parametrized disk [0,1]² → H²×H², for the
/// form Ω = (dx∧dy/y²)_left − (dx∧dy/y²)_right.
pub fn symplectic_area(disk: &dyn Fn(f64, f64) -> BiPoint) -> Result<f64> {
    let h = 1e-5;
    let integrand = |s: f64, t: f64| {
        let ps = (disk(s + h, t), disk(s - h, t));
        let pt = (disk(s, t + h), disk(s, t - h));
        let p0 = disk(s, t);
        let dsx_l = (ps.0.left.x - ps.1.left.x) / (2.0 * h);
        let dsy_l = (ps.0.left.y - ps.1.left.y) / (2.0 * h);
        let dtx_l = (pt.0.left.x - pt.1.left.x) / (2.0 * h);
        let dty_l = (pt.0.left.y - pt.1.left.y) / (2.0 * h);
        let dsx_r = (ps.0.right.x - ps.1.right.x) / (2.0 * h);
        let dsy_r = (ps.0.right.y - ps.1.right.y) / (2.0 * h);
        let dtx_r = (pt.0.right.x - pt.1.right.x) / (2.0 * h);
        let dty_r = (pt.0.right.y - pt.1.right.y) / (2.0 * h);
        (dsx_l * dty_l - dsy_l * dtx_l) / (p0.left.y * p0.left.y)
            - (dsx_r * dty_r - dsy_r * dtx_r) / (p0.right.y * p0.right.y)
    };
    simpson2d_adaptive(&integrand, 8, 1e-9, 1e-11)
}

/// Fiber coordinate relative to the canonical section: realizes the frame
/// point φ_t(Σ_can(base)).
#[derive(Debug, Clone, Copy)]
pub struct FiberCoord {
    pub base: BiPoint,
    pub t: f64,
}

impl FiberCoord {
    pub fn realize(&self) -> FramePoint {
        geodesic_flow(&canonical_section(&self.base), self.t)
    }
}

/// Principal fiber gap mod π between two frame points on a common fiber:
/// the flow time t with F2 = φ_t(F1) downstairs, reduced to (−π/2, π/2].
pub fn fiber_gap(f1: &FramePoint, f2: &FramePoint) -> Result<f64> {
    let b1 = project(f1)?;
    let b2 = project(f2)?;
    let residual = b1.dist(&b2);
    if residual > 1e-9 {
        return Err(GeomError::FiberMismatch { residual });
    }
    Ok(fiber_gap_unchecked(f1, f2))
}

/// As `fiber_gap` but without the common-fiber test; callers that construct
/// both points on one orbit may skip it.
pub fn fiber_gap_unchecked(f1: &FramePoint, f2: &FramePoint) -> f64 {
    // h = g1⁻¹ g2 = exp(t u0) up to sign: cos t = ±tr(h)/2, sin t = ∓tr(h·u0)/2
    let h = f1.g.inv_mat() * f2.g.m;
    let c = 0.5 * h.trace();
    let s = -0.5 * (h * f1.u0.m).trace();
    wrap_half_pi(s.atan2(c))
}

fn wrap_half_pi(mut t: f64) -> f64 {
    while t <= -FRAC_PI_2 {
        t += PI;
    }
    while t > FRAC_PI_2 {
        t -= PI;
    }
    t
}

/// Fiber gap unwrapped continuously along a one-parameter family of frame
/// pairs (each pair on a common fiber): returns the gap at parameter 1,
/// anchored at the principal value at parameter 0. Refines the sampling once
/// and errors out if the unwrapped results disagree (a winding ambiguity).
pub fn fiber_gap_tracked(
    family: &dyn Fn(f64) -> (FramePoint, FramePoint),
    samples: usize,
) -> Result<f64> {
    let run = |n: usize| -> f64 {
        let mut value = {
            let (a, b) = family(0.0);
            fiber_gap_unchecked(&a, &b)
        };
        let mut prev = value;
        for k in 1..=n {
            let (a, b) = family(k as f64 / n as f64);
            let raw = fiber_gap_unchecked(&a, &b);
            let delta = wrap_half_pi(raw - prev);
            value += delta;
            prev = raw;
        }
        value
    };
    let n = samples.max(8);
    let coarse = run(n);
    let fine = run(2 * n);
    let jump = (coarse - fine).abs();
    if jump > 1e-6 {
        return Err(GeomError::WindingAmbiguity { jump });
    }
    Ok(fine)
}

/// The deck cocycle of a section over an equivariant family: the fiber gap at
/// b between the section evaluated at A·b and the A-image of the section at
/// b. Both frame points project to A·b, so the gap is well defined.
pub fn section_cocycle(a: &IsomPair, b: &BiPoint) -> f64 {
    let moved = canonical_section(&b.apply(a));
    let acted = act(a, &canonical_section(b));
    fiber_gap_unchecked(&moved, &acted)
}

/// Counterclockwise boundary of the coordinate square [x0,x0+eps]×[y0,y0+eps]
/// in one factor, the other factor held fixed.
pub fn coordinate_square_loop(
    moving: crate::frame::Side,
    x0: f64,
    y0: f64,
    eps: f64,
    fixed: crate::lie::HPoint,
) -> BasePath {
    let corner = move |k: usize| -> (f64, f64) {
        match k % 4 {
            0 => (x0, y0),
            1 => (x0 + eps, y0),
            2 => (x0 + eps, y0 + eps),
            _ => (x0, y0 + eps),
        }
    };
    let eval = move |s: f64| {
        let s = s.rem_euclid(1.0);
        let seg = ((s * 4.0).floor() as usize).min(3);
        let t = s * 4.0 - seg as f64;
        let (ax, ay) = corner(seg);
        let (bx, by) = corner(seg + 1);
        let p = crate::lie::HPoint::new(ax + t * (bx - ax), ay + t * (by - ay));
        match moving {
            crate::frame::Side::Left => BiPoint::new(p, fixed),
            crate::frame::Side::Right => BiPoint::new(fixed, p),
        }
    };
    BasePath::new(eval, vec![0.25, 0.5, 0.75])
}

/// The disk bounded by `coordinate_square_loop`, with matching orientation.
pub fn coordinate_square_disk(
    moving: crate::frame::Side,
    x0: f64,
    y0: f64,
    eps: f64,
    fixed: crate::lie::HPoint,
) -> impl Fn(f64, f64) -> BiPoint {
    move |s: f64, t: f64| {
        let p = crate::lie::HPoint::new(x0 + s * eps, y0 + t * eps);
        match moving {
            crate::frame::Side::Left => BiPoint::new(p, fixed),
            crate::frame::Side::Right => BiPoint::new(fixed, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Side;
    use crate::lie::{exp_alg, AlgVec, GroupElt, HPoint};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn left_square(eps: f64) -> BasePath {
        coordinate_square_loop(Side::Left, 0.0, 1.0, eps, HPoint::i())
    }

    /// Closed-form area of the left-factor square [0,eps]×[1,1+eps]:
    /// ∫∫ dx dy / y² = eps·(1 − 1/(1+eps)).
    fn square_area(eps: f64) -> f64 {
        eps * (1.0 - 1.0 / (1.0 + eps))
    }

    #[test]
    fn constant_and_diagonal_paths_transport_trivially() {
        let c = BasePath::constant(BiPoint::diagonal(HPoint::new(0.3, 1.2)));
        assert!(transport_offset(&c).unwrap().abs() < 1e-12);

        // along the diagonal the canonical section is parallel
        let diag = BasePath::new(
            |s: f64| BiPoint::diagonal(HPoint::new(0.4 * s, 1.0 + 0.5 * s * s)),
            vec![],
        );
        assert!(transport_offset(&diag).unwrap().abs() < 1e-10);
    }

    #[test]
    fn transport_reverses_and_concatenates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let mut p = || {
                HPoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.8..1.4))
            };
            let (a, b, c) = (
                BiPoint::new(p(), p()),
                BiPoint::new(p(), p()),
                BiPoint::new(p(), p()),
            );
            let fwd = BasePath::segment(a, b);
            let bwd = BasePath::segment(a, b).reversed();
            let vf = transport_offset(&fwd).unwrap();
            let vb = transport_offset(&bwd).unwrap();
            assert!((vf + vb).abs() < 1e-10, "{vf} vs {vb}");

            let whole = BasePath::segment(a, b).then(BasePath::segment(b, c));
            let split = transport_offset(&BasePath::segment(a, b)).unwrap()
                + transport_offset(&BasePath::segment(b, c)).unwrap();
            assert!((transport_offset(&whole).unwrap() - split).abs() < 1e-9);
        }
    }

    #[test]
    fn left_square_defect_matches_half_area() {
        let eps = 0.01;
        let defect = loop_defect(&left_square(eps)).unwrap();
        assert!(
            (defect + 0.5 * square_area(eps)).abs() < 1e-7,
            "defect {defect} vs {}",
            -0.5 * square_area(eps)
        );

        let right = coordinate_square_loop(Side::Right, 0.0, 1.0, eps, HPoint::i());
        let d2 = loop_defect(&right).unwrap();
        assert!((d2 - 0.5 * square_area(eps)).abs() < 1e-7);

        assert!(loop_defect(&BasePath::constant(BiPoint::diagonal(HPoint::i())))
            .unwrap()
            .abs()
            < 1e-10);
    }

    #[test]
    fn open_loop_is_rejected() {
        let open = BasePath::segment(
            BiPoint::diagonal(HPoint::i()),
            BiPoint::diagonal(HPoint::new(0.1, 1.0)),
        );
        assert!(matches!(loop_defect(&open), Err(GeomError::EndpointMismatch { .. })));
    }

    #[test]
    fn coarse_path_is_rejected() {
        // a path sweeping a huge distance violates the per-sample step bound
        let wild = BasePath::new(
            |s: f64| BiPoint::diagonal(HPoint::new(0.0, (40.0 * s).exp())),
            vec![],
        );
        assert!(matches!(
            transport_offset(&wild),
            Err(GeomError::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn symplectic_area_examples() {
        let eps = 0.01;
        let disk = coordinate_square_disk(Side::Left, 0.0, 1.0, eps, HPoint::i());
        let a = symplectic_area(&disk).unwrap();
        assert!((a - square_area(eps)).abs() < 1e-8, "{a}");

        // diagonal disks have zero signed area
        let diag = |s: f64, t: f64| BiPoint::diagonal(HPoint::new(s * 0.3, 1.0 + 0.2 * t));
        assert!(symplectic_area(&diag).unwrap().abs() < 1e-10);

        // additivity under domain subdivision
        let whole = symplectic_area(&disk).unwrap();
        let lower = |s: f64, t: f64| disk(s, t / 2.0);
        let upper = |s: f64, t: f64| disk(s, 0.5 + t / 2.0);
        let split = symplectic_area(&lower).unwrap() + symplectic_area(&upper).unwrap();
        assert!((whole - split).abs() < 1e-10);
    }

    #[test]
    fn curvature_identity_on_random_mixed_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let base = BiPoint::new(
                HPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.6..1.8)),
                HPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.6..1.8)),
            );
            // two random directions in the 4-dimensional base
            let mut dir = || {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            };
            let (d1, d2) = (dir(), dir());
            let eps = 0.02;
            let disk = move |s: f64, t: f64| {
                BiPoint::new(
                    HPoint::new(
                        base.left.x + eps * (s * d1[0] + t * d2[0]),
                        base.left.y + eps * (s * d1[1] + t * d2[1]),
                    ),
                    HPoint::new(
                        base.right.x + eps * (s * d1[2] + t * d2[2]),
                        base.right.y + eps * (s * d1[3] + t * d2[3]),
                    ),
                )
            };
            let boundary = move |s: f64| {
                let s = s.rem_euclid(1.0);
                let seg = ((s * 4.0).floor() as usize).min(3);
                let t = s * 4.0 - seg as f64;
                match seg {
                    0 => disk(t, 0.0),
                    1 => disk(1.0, t),
                    2 => disk(1.0 - t, 1.0),
                    _ => disk(0.0, 1.0 - t),
                }
            };
            let path = BasePath::new(boundary, vec![0.25, 0.5, 0.75]);
            let defect = loop_defect(&path).unwrap();
            let area = symplectic_area(&disk).unwrap();
            // Riemannian size of the square in the product metric
            let riemannian = {
                let g = |d: [f64; 4]| {
                    (d[0] * d[0] + d[1] * d[1]) / (base.left.y * base.left.y)
                        + (d[2] * d[2] + d[3] * d[3]) / (base.right.y * base.right.y)
                };
                eps * eps * (g(d1) * g(d2)).sqrt()
            };
            assert!(
                (defect + 0.5 * area).abs() <= 1e-3 * riemannian,
                "defect {defect} area {area} size {riemannian}"
            );
        }
    }

    #[test]
    fn defect_converges_to_minus_half_at_first_order() {
        for (eps, rel) in [(0.04, 0.05), (0.02, 0.025), (0.01, 0.0125)] {
            let defect = loop_defect(&left_square(eps)).unwrap();
            let ratio = defect / (eps * eps);
            assert!(
                (ratio + 0.5).abs() <= rel * 0.5,
                "eps {eps}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn loop_defect_is_section_independent() {
        let path = left_square(0.02);
        let canonical = loop_defect(&path).unwrap();
        // perturb the section by a smooth fiber shift
        let shifted = |b: &BiPoint| {
            let t = 0.2 * (b.left.x + b.right.y).sin() * (b.left.y).cos();
            geodesic_flow(&canonical_section(b), t)
        };
        let perturbed = transport_offset_with(&path, &shifted).unwrap();
        assert!((canonical - perturbed).abs() < 1e-9, "{canonical} vs {perturbed}");
    }

    #[test]
    fn fiber_gap_examples() {
        let f = canonical_section(&BiPoint::new(
            HPoint::new(0.3, 1.1),
            HPoint::new(-0.2, 0.9),
        ));
        let g = geodesic_flow(&f, 0.3);
        assert!((fiber_gap(&f, &g).unwrap() - 0.3).abs() < 1e-12);

        // a full downstairs period is invisible to the principal value but
        // recovered by tracking
        let full = fiber_gap_tracked(&|t: f64| (f, geodesic_flow(&f, t * PI)), 16).unwrap();
        assert!((full - PI).abs() < 1e-9);
        assert!(fiber_gap(&f, &geodesic_flow(&f, PI)).unwrap().abs() < 1e-9);

        let other = canonical_section(&BiPoint::diagonal(HPoint::i()));
        assert!(matches!(
            fiber_gap(&f, &other),
            Err(GeomError::FiberMismatch { .. })
        ));
    }

    #[test]
    fn fiber_coord_realizes_flowed_section() {
        let base = BiPoint::new(HPoint::new(0.1, 1.4), HPoint::new(0.0, 0.7));
        let fc = FiberCoord { base, t: 0.7 };
        let f = fc.realize();
        assert!(project(&f).unwrap().dist(&base) < 1e-9);
        assert!((fiber_gap(&canonical_section(&base), &f).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn section_cocycle_vanishes_for_commuting_data() {
        // over the diagonal, the canonical section is equivariant under
        // diagonal pairs on the nose
        let g = exp_alg(AlgVec::from_coords([0.2, 0.5, -0.3]), 1.0);
        let a = IsomPair::new(g, g);
        let b = BiPoint::diagonal(HPoint::new(0.4, 1.7));
        assert!(section_cocycle(&a, &b).abs() < 1e-12);
        // and is generally nonzero otherwise
        let c = IsomPair::new(g, GroupElt::identity());
        let off = section_cocycle(&c, &BiPoint::diagonal(HPoint::i()));
        assert!(off.abs() > 1e-3);
    }
}

//! Fuchsian surface-group representations from the regular hyperbolic
//! octagon, loop words with lifted base paths, and fundamental-domain
//! bookkeeping.
//!
//! The octagon has vertex angle π/4 (circumradius cosh R = cot²(π/8)), so the
//! eight side-pairing translations generate a discrete group with a single
//! relator; all eight vertices fall into one orbit.

use crate::error::Result;
use crate::frame::BiPoint;
use crate::lie::{
    cross, exp_alg, f_embed, mobius, pairing, translation_along, AlgVec, GroupElt, HPoint,
    IsomPair,
};
use nalgebra::Complex;

type C = Complex<f64>;

/// Cayley transform from the Poincaré disk to the upper half-plane, 0 ↦ i.
pub fn cayley(w: C) -> HPoint {
    let z = C::i() * (C::new(1.0, 0.0) - w) / (C::new(1.0, 0.0) + w);
    HPoint::new(z.re, z.im)
}

fn to_c(p: HPoint) -> C {
    C::new(p.x, p.y)
}

/// Unit tangent direction (as a complex number in the half-plane chart) at p
/// toward q, read off the Möbius vector field of the translation generator.
fn direction(p: HPoint, q: HPoint) -> C {
    let c = cross(f_embed(p), f_embed(q));
    let n = pairing(c, c).max(1e-30).sqrt();
    let a = c.m / n;
    let z = to_c(p);
    // vector field of s ↦ exp(sA): z' = b + 2az - cz²  for A = [[a,b],[c,-a]]
    C::new(a[(0, 1)], 0.0) + C::new(2.0 * a[(0, 0)], 0.0) * z - C::new(a[(1, 0)], 0.0) * z * z
}

/// Elliptic rotation by angle θ about the point p.
pub fn rotation_about(p: HPoint, theta: f64) -> GroupElt {
    exp_alg(f_embed(p), theta / 2.0)
}

/// The unique orientation-preserving isometry sending P → P2 and Q → Q2
/// (requires d(P,Q) = d(P2,Q2)): translate P to P2, then rotate about P2.
pub fn two_point_isometry(p: HPoint, q: HPoint, p2: HPoint, q2: HPoint) -> GroupElt {
    let t = translation_along(p, p2);
    let tq = mobius(&t, q);
    let w1 = direction(p2, tq);
    let w2 = direction(p2, q2);
    let theta = (w2 / w1).arg();
    rotation_about(p2, theta) * t
}

/// The regular octagon fundamental domain: vertices, side pairings, and the
/// wrap operation into the domain.
pub struct Octagon {
    /// Half-plane images of the eight vertices, at disk angles (2k+1)π/8.
    pub vertices: [HPoint; 8],
    /// Side-pairing translations γ_a, γ_b, γ_c, γ_d: γ_a maps side 2 onto
    /// side 0 reversed (V2→V1, V3→V0), γ_b side 3 onto side 1 reversed,
    /// γ_c side 6 onto side 4 reversed, γ_d side 7 onto side 5 reversed,
    /// where side k joins V_k and V_{k+1}.
    pub pairings: [GroupElt; 4],
    /// Euclidean disk radius of the circumscribed circle.
    pub disk_radius: f64,
}

impl Octagon {
    pub fn new() -> Self {
        let cosh_r = {
            let t = (std::f64::consts::PI / 8.0).tan();
            1.0 / (t * t)
        };
        let r = cosh_r.acosh();
        let re = (r / 2.0).tanh();
        let mut vertices = [HPoint::i(); 8];
        for (k, v) in vertices.iter_mut().enumerate() {
            let ang = (2 * k + 1) as f64 * std::f64::consts::PI / 8.0;
            *v = cayley(C::from_polar(re, ang));
        }
        let v = &vertices;
        let pairings = [
            two_point_isometry(v[2], v[3], v[1], v[0]),
            two_point_isometry(v[3], v[4], v[2], v[1]),
            two_point_isometry(v[6], v[7], v[5], v[4]),
            two_point_isometry(v[7], v[0], v[6], v[5]),
        ];
        Octagon { vertices, pairings, disk_radius: re }
    }

    /// All eight side pairings: γ_a..γ_d and their inverses.
    pub fn all_pairings(&self) -> [GroupElt; 8] {
        [
            self.pairings[0],
            self.pairings[1],
            self.pairings[2],
            self.pairings[3],
            self.pairings[0].inverse(),
            self.pairings[1].inverse(),
            self.pairings[2].inverse(),
            self.pairings[3].inverse(),
        ]
    }

    /// Greedily move p into the Dirichlet domain about i: returns (q, g) with
    /// q = g·p and d(q, i) minimal along the greedy descent.
    pub fn wrap(&self, p: HPoint) -> (HPoint, GroupElt) {
        let mut q = p;
        let mut g = GroupElt::identity();
        let center = HPoint::i();
        loop {
            let mut best = q.dist(&center);
            let mut best_elt = None;
            for e in self.all_pairings() {
                let cand = mobius(&e, q);
                let d = cand.dist(&center);
                if d < best - 1e-13 {
                    best = d;
                    best_elt = Some((cand, e));
                }
            }
            match best_elt {
                Some((cand, e)) => {
                    q = cand;
                    g = e * g;
                }
                None => return (q, g),
            }
        }
    }
}

impl Default for Octagon {
    fn default() -> Self {
        Octagon::new()
    }
}

/// Representation class of a pair (ρ_l, ρ_r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RepClass {
    /// ρ_r = ρ_l.
    Diagonal,
    /// ρ_r = β ρ_l β⁻¹.
    Conjugate(GroupElt),
    General,
}

/// A pair of Fuchsian representations given by the images of the standard
/// generators a₁, b₁, a₂, b₂ (satisfying [a₁,b₁][a₂,b₂] = id), together with
/// the lifted base point.
pub struct RepPair {
    pub gens: [IsomPair; 4],
    pub class: RepClass,
    pub base: HPoint,
    octagon: Octagon,
}

/// A letter of a loop word: generator index 0..4 (a₁, b₁, a₂, b₂) and an
/// inversion flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

/// Element of the surface group as a word in the standard generators,
/// together with its lifted base path (geodesic segments per letter).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopWord {
    pub letters: Vec<Letter>,
}

impl LoopWord {
    pub fn generator(gen: usize) -> Self {
        assert!(gen < 4);
        LoopWord { letters: vec![Letter { gen, inverse: false }] }
    }

    /// Parse whitespace-separated tokens "a1", "b1", "a2", "b2", each with an
    /// optional trailing apostrophe for the inverse.
    pub fn parse(s: &str) -> Option<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (name, inverse) = match tok.strip_suffix('\'') {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let gen = match name {
                "a1" => 0,
                "b1" => 1,
                "a2" => 2,
                "b2" => 3,
                _ => return None,
            };
            letters.push(Letter { gen, inverse });
        }
        Some(LoopWord { letters })
    }

    pub fn concat(&self, other: &LoopWord) -> LoopWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        LoopWord { letters }
    }

    pub fn name(&self) -> String {
        self.letters
            .iter()
            .map(|l| {
                let base = ["a1", "b1", "a2", "b2"][l.gen];
                if l.inverse {
                    format!("{base}'")
                } else {
                    base.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl RepPair {
    /// The diagonal representation carried by the regular-octagon side
    /// pairings: a₁ = γ_a, b₁ = γ_b⁻¹, a₂ = γ_c, b₂ = γ_d⁻¹ satisfy the
    /// surface-group relator.
    pub fn octagon() -> Self {
        let oct = Octagon::new();
        let g = &oct.pairings;
        let lefts = [g[0], g[1].inverse(), g[2], g[3].inverse()];
        RepPair {
            gens: lefts.map(|m| IsomPair::new(m, m)),
            class: RepClass::Diagonal,
            base: HPoint::i(),
            octagon: oct,
        }
    }

    /// Explicit generator images over the standard octagon domain. The class
    /// is marked general; operations needing a conjugator reject it.
    pub fn explicit(gens: [IsomPair; 4]) -> Self {
        RepPair { gens, class: RepClass::General, base: HPoint::i(), octagon: Octagon::new() }
    }

    /// Conjugate class: keep the left factor, conjugate the right by β.
    pub fn conjugate(self, beta: GroupElt) -> Self {
        assert!(matches!(self.class, RepClass::Diagonal));
        let gens = self
            .gens
            .map(|p| IsomPair::new(p.left, beta * p.right * beta.inverse()));
        RepPair { gens, class: RepClass::Conjugate(beta), base: self.base, octagon: self.octagon }
    }

    pub fn octagon_domain(&self) -> &Octagon {
        &self.octagon
    }

    /// β such that ρ_r = β ρ_l β⁻¹, when the class provides one.
    pub fn beta(&self) -> Option<GroupElt> {
        match self.class {
            RepClass::Diagonal => Some(GroupElt::identity()),
            RepClass::Conjugate(b) => Some(b),
            RepClass::General => None,
        }
    }

    pub fn image(&self, word: &LoopWord) -> IsomPair {
        let mut acc = IsomPair::identity();
        for l in &word.letters {
            let g = if l.inverse { self.gens[l.gen].inverse() } else { self.gens[l.gen] };
            acc = acc * g;
        }
        acc
    }

    /// Frobenius residual of the surface-group relator [a₁,b₁][a₂,b₂].
    pub fn relator_residual(&self) -> f64 {
        let [a1, b1, a2, b2] = self.gens;
        let comm = |x: IsomPair, y: IsomPair| x * y * x.inverse() * y.inverse();
        let r = comm(a1, b1) * comm(a2, b2);
        let id = IsomPair::identity();
        r.left.dist(&id.left) + r.right.dist(&id.right)
    }

    /// Check that generator images and short products are hyperbolic.
    pub fn fuchsian_margin(&self) -> f64 {
        let mut margin = f64::INFINITY;
        let mut elements: Vec<IsomPair> = Vec::new();
        let singles: Vec<IsomPair> = (0..4)
            .flat_map(|i| {
                [self.gens[i], self.gens[i].inverse()]
            })
            .collect();
        elements.extend(singles.iter().copied());
        for x in &singles {
            for y in &singles {
                let p = *x * *y;
                let id = IsomPair::identity();
                if p.left.dist(&id.left) > 1e-9 {
                    elements.push(p);
                }
            }
        }
        for e in elements {
            for m in [e.left, e.right] {
                margin = margin.min(m.trace().abs() - 2.0);
            }
        }
        margin
    }

    /// The lifted base path of a loop word: geodesic segments from x₀ through
    /// the successive partial-word images of x₀, parametrized over [0,1] with
    /// one smooth piece per letter. The endpoint is ρ_l(τ)·x₀.
    pub fn loop_lift(&self, word: &LoopWord) -> LiftedLoop {
        let mut waypoints = vec![self.base];
        let mut acc = IsomPair::identity();
        for l in &word.letters {
            let g = if l.inverse { self.gens[l.gen].inverse() } else { self.gens[l.gen] };
            acc = acc * g;
            waypoints.push(mobius(&acc.left, self.base));
        }
        LiftedLoop::through(waypoints)
    }
}

/// Piecewise-geodesic path in H² through a list of waypoints, constant-speed
/// on each segment, parametrized over [0,1].
#[derive(Clone)]
pub struct LiftedLoop {
    pub waypoints: Vec<HPoint>,
    generators: Vec<(AlgVec, f64)>, // unit translation generator and length
}

impl LiftedLoop {
    pub fn through(waypoints: Vec<HPoint>) -> Self {
        assert!(waypoints.len() >= 2);
        let generators = waypoints
            .windows(2)
            .map(|w| {
                let c = cross(f_embed(w[0]), f_embed(w[1]));
                let n = pairing(c, c).max(1e-30).sqrt();
                (AlgVec::new(c.m / n), w[0].dist(&w[1]))
            })
            .collect();
        LiftedLoop { waypoints, generators }
    }

    pub fn segments(&self) -> usize {
        self.generators.len()
    }

    pub fn at(&self, s: f64) -> HPoint {
        let n = self.segments() as f64;
        let scaled = (s * n).clamp(0.0, n - 1e-12);
        let k = scaled.floor() as usize;
        let t = scaled - k as f64;
        let (gen, len) = self.generators[k];
        mobius(&exp_alg(gen, t * len / 2.0), self.waypoints[k])
    }

    /// Interior break parameters (one per waypoint junction).
    pub fn breaks(&self) -> Vec<f64> {
        let n = self.segments();
        (1..n).map(|k| k as f64 / n as f64).collect()
    }
}

/// Base path in H²×H² obtained by composing a lifted loop with an evaluator
/// into the product.
pub fn mapped_path(
    lift: &LiftedLoop,
    map: impl Fn(HPoint) -> Result<BiPoint> + 'static,
) -> crate::transport::BasePath {
    let lift = lift.clone();
    let breaks = lift.breaks();
    crate::transport::BasePath::new(
        move |s| map(lift.at(s)).expect("map must be total on the lifted path"),
        breaks,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn octagon_relator_and_traces() {
        let rep = RepPair::octagon();
        assert!(rep.relator_residual() < 1e-9, "{}", rep.relator_residual());
        let expected = 2.0 + 2.0f64.sqrt();
        for g in rep.gens {
            assert!((g.left.trace().abs() - expected).abs() < 1e-9);
            assert!(g.left.dist(&g.right) < 1e-15, "diagonal class");
        }
    }

    #[test]
    fn octagon_group_is_fuchsian_on_short_products() {
        let rep = RepPair::octagon();
        assert!(rep.fuchsian_margin() > 1e-6);
    }

    #[test]
    fn pairings_map_sides_correctly() {
        let oct = Octagon::new();
        let v = &oct.vertices;
        let checks = [
            (0, v[2], v[1]),
            (0, v[3], v[0]),
            (1, v[3], v[2]),
            (1, v[4], v[1]),
            (2, v[6], v[5]),
            (2, v[7], v[4]),
            (3, v[7], v[6]),
            (3, v[0], v[5]),
        ];
        for (k, from, to) in checks {
            let img = mobius(&oct.pairings[k], from);
            assert!(img.dist(&to) < 1e-10);
        }
    }

    #[test]
    fn conjugate_class_preserves_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let beta = exp_alg(
                AlgVec::from_coords([
                    rng.gen_range(-0.7..0.7),
                    rng.gen_range(-0.7..0.7),
                    rng.gen_range(-0.7..0.7),
                ]),
                1.0,
            );
            let rep = RepPair::octagon().conjugate(beta);
            assert!(rep.relator_residual() < 1e-9);
            assert!(rep.fuchsian_margin() > 1e-6);
            assert_eq!(rep.beta(), Some(beta));
        }
        let trivial = RepPair::octagon().conjugate(GroupElt::identity());
        for g in trivial.gens {
            assert!(g.left.dist(&g.right) < 1e-12);
        }
    }

    #[test]
    fn wrap_lands_in_the_domain() {
        let oct = Octagon::new();
        let radius = {
            let t = (std::f64::consts::PI / 8.0).tan();
            (1.0 / (t * t) as f64).acosh()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let p = HPoint::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.05..6.0));
            let (q, g) = oct.wrap(p);
            assert!(mobius(&g, p).dist(&q) < 1e-9);
            assert!(q.dist(&HPoint::i()) <= radius + 1e-9);
        }
    }

    #[test]
    fn loop_words_parse_and_lift() {
        let rep = RepPair::octagon();
        let w = LoopWord::parse("a1 b1' a2").unwrap();
        assert_eq!(w.name(), "a1 b1' a2");
        let lift = rep.loop_lift(&w);
        assert_eq!(lift.segments(), 3);
        let endpoint = lift.at(1.0);
        let expected = mobius(&rep.image(&w).left, rep.base);
        assert!(endpoint.dist(&expected) < 1e-9);
        assert!(lift.at(0.0).dist(&rep.base) < 1e-12);
        // waypoints sit at the junction parameters
        assert!(lift.at(1.0 / 3.0).dist(&lift.waypoints[1]) < 1e-9);
        assert!(LoopWord::parse("q7").is_none());
    }

    #[test]
    fn relator_word_lifts_to_a_loop() {
        let rep = RepPair::octagon();
        let relator = LoopWord::parse("a1 b1 a1' b1' a2 b2 a2' b2'").unwrap();
        let lift = rep.loop_lift(&relator);
        assert!(lift.at(1.0).dist(&rep.base) < 1e-9, "relator word closes up");
    }
}

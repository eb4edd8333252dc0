//! Seeded generators for test families. Every random object is reproducible from a `u64` seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::clifford::{average_intertwiner, CliffordRep};
use crate::linalg::{orthonormalize, skew_part, Mat};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut Rng, p: usize, q: usize) -> Mat {
    Mat::from_fn(p, q, |_, _| StandardNormal.sample(rng))
}

/// Orthonormalized Gaussian matrix.
pub fn orthogonal(rng: &mut Rng, n: usize) -> Mat {
    loop {
        let q = orthonormalize(&gaussian(rng, n, n), 1e-8);
        if q.ncols() == n {
            return q;
        }
    }
}

/// Orthogonal with determinant `+1`.
pub fn rotation(rng: &mut Rng, n: usize) -> Mat {
    let mut q = orthogonal(rng, n);
    if n > 0 && q.determinant() < 0.0 {
        let c = -q.column(0).into_owned();
        q.set_column(0, &c);
    }
    q
}

/// Random symmetric projection of rank `k`.
pub fn projection(rng: &mut Rng, n: usize, k: usize) -> Mat {
    let q = orthogonal(rng, n);
    let b = q.columns(0, k).into_owned();
    &b * b.transpose()
}

/// Gaussian skew matrix projected onto the operators anticommuting with every generator.
pub fn anticommuting_skew(rng: &mut Rng, ctx: &CliffordRep) -> Mat {
    let g = skew_part(&gaussian(rng, ctx.n(), ctx.n()));
    let avg = average_intertwiner(ctx, ctx, &g, true).expect("context matches itself");
    skew_part(&avg)
}

/// Gaussian skew matrix projected onto the commutant of the generators.
pub fn commuting_skew(rng: &mut Rng, ctx: &CliffordRep) -> Mat {
    let g = skew_part(&gaussian(rng, ctx.n(), ctx.n()));
    let avg = average_intertwiner(ctx, ctx, &g, false).expect("context matches itself");
    skew_part(&avg)
}

/// Cayley rotation `(I + θS/2)(I − θS/2)⁻¹` for a normalized random skew `S` commuting
/// with the generators. Exactly orthogonal, with `‖R − I‖ ≤ θ`; the identity when the
/// commutant has no skew part, since `S` is then rounding noise.
pub fn commuting_rotation(rng: &mut Rng, ctx: &CliffordRep, theta: f64) -> Mat {
    let s = commuting_skew(rng, ctx);
    let norm = crate::linalg::op_norm(&s);
    let id = crate::linalg::eye(ctx.n());
    if norm <= 1e-10 * (ctx.n() as f64).sqrt() {
        return id;
    }
    let h = s * (0.5 * theta / norm);
    let inv = (&id - &h).try_inverse().expect("I - S is invertible for skew S");
    (&id + h) * inv
}

//! Seeded random data: complex Gaussian coefficients on a dyadic shell,
//! shaped by a Gaussian physical envelope and localized again.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{Grid, Space, VectorField};
use crate::mat::{norm, Vec3, CVEC_ZERO, CZERO};
use crate::profile::flat_bump;
use crate::propagator::FrequencyLocalizer;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Unit complex vector with Gaussian entries.
pub fn random_polarization(n: usize, rng: &mut ChaCha8Rng) -> [Complex64; 3] {
    let mut v = [CZERO; 3];
    for c in v.iter_mut().take(n) {
        *c = complex_normal(rng);
    }
    let len = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= len);
    v
}

/// Shell-`j` random field times `exp(−|x − c|²/(2σ²))`, re-localized to
/// shell `j` so the result has `f̂(0) = 0`.
pub fn envelope_localized_field(grid: &Grid, shell: i32, width: f64, center: &Vec3, rng: &mut ChaCha8Rng) -> VectorField {
    let n = grid.dim();
    let loc = FrequencyLocalizer::new(shell);
    let mut hat = VectorField::zeros(*grid, Space::Frequency);
    for site in 0..grid.sites() {
        let m = loc.multiplier(norm(n, &grid.frequency_of_site(site)));
        if m == 0.0 {
            continue;
        }
        let mut v = CVEC_ZERO;
        for c in v.iter_mut().take(n) {
            *c = complex_normal(rng) * m;
        }
        hat.set_site_vector(site, &v);
    }
    let mut phys = hat.to_physical();
    let g = *grid;
    let c = *center;
    let vals = phys.values_mut();
    for site in 0..g.sites() {
        let d = g.periodic_displacement(&g.position_of_site(site), &c);
        let r2: f64 = d[..n].iter().map(|v| v * v).sum();
        let w = (-r2 / (2.0 * width * width)).exp();
        vals[site * n..site * n + n].iter_mut().for_each(|v| *v *= w);
    }
    loc.apply(&phys)
}

/// `C^∞` bump on `[0, duration]`, equal to 1 at the midpoint.
pub fn time_bump(t: f64, duration: f64) -> f64 {
    let x = t / duration;
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    flat_bump(x) * flat_bump(1.0 - x) * 4f64.exp()
}

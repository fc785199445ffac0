use lame_spectral::angular::{rotation_field_at, AngularPartition, SignBranch};
use lame_spectral::harness::{Experiment, ExperimentConfig};
use lame_spectral::mat::{RMat, MAX_DIM};
use lame_spectral::norms::{classify_pair, is_acceptable, is_admissible, is_sharp_admissible, lr_norm};
use lame_spectral::propagator::Propagator;
use lame_spectral::resolvent::{resolvent_multiplier_at, ResolventParams};
use lame_spectral::symbol::{diagonalize_at, lame_symbol_real, sqrt_symbol_at};
use lame_spectral::{Grid, LameParams, Space, VectorField};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: Grid, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.sites() * grid.dim())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    VectorField::from_values(grid, Space::Physical, values).unwrap()
}

fn params() -> impl Strategy<Value = LameParams> {
    (-0.3f64..4.0, 0.2f64..3.0).prop_map(|(l, m)| LameParams::new(l, m).unwrap())
}

/// Nonzero frequency of dimension 2 or 3 with components in `[-5, 5]`.
fn frequency() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-5.0f64..5.0, 2),
        prop::collection::vec(-5.0f64..5.0, 3)
    ]
    .prop_filter("nonzero", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-4)
}

fn unit_s(xi: &[f64]) -> f64 {
    xi[0] / xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn max_entry_diff(a: &RMat, b: &RMat) -> f64 {
    (*a - *b).frobenius()
}

/// Random rotation of ℝⁿ from Gram–Schmidt on a seeded Gaussian-ish matrix.
fn random_rotation(n: usize, seed: u64) -> RMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<[f64; MAX_DIM]> = Vec::new();
    while cols.len() < n {
        let mut v = [0.0; MAX_DIM];
        for x in v.iter_mut().take(n) {
            *x = rng.random_range(-1.0..1.0);
        }
        for c in &cols {
            let d: f64 = (0..n).map(|i| v[i] * c[i]).sum();
            for i in 0..n {
                v[i] -= d * c[i];
            }
        }
        let len = (0..n).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if len > 1e-3 {
            v.iter_mut().for_each(|x| *x /= len);
            cols.push(v);
        }
    }
    let mut q = RMat::from_fn(n, |i, j| cols[j][i]);
    if q.det() < 0.0 {
        for i in 0..n {
            q.set(i, 0, -q.get(i, 0));
        }
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval(seed in any::<u64>(), n in 2usize..=3, points in prop::sample::select(vec![8usize, 16])) {
        let grid = Grid::new(n, points, 3.0).unwrap();
        let f = random_field(grid, seed);
        let hat = f.to_frequency();
        let phys: f64 = f.values().iter().map(|z| z.norm_sqr()).sum();
        let freq: f64 = hat.values().iter().map(|z| z.norm_sqr()).sum::<f64>() / grid.sites() as f64;
        prop_assert!((phys - freq).abs() <= 1e-10 * phys);
        let back = hat.to_physical();
        prop_assert!(back.relative_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn transform_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let grid = Grid::new(2, 8, 1.0).unwrap();
        let (f, g) = (random_field(grid, s1), random_field(grid, s2));
        let (a, b) = (Complex64::new(a, 0.5), Complex64::new(b, -0.25));
        let lhs = f.scaled(a).add(&g.scaled(b)).unwrap().to_frequency();
        let rhs = f.to_frequency().scaled(a).add(&g.to_frequency().scaled(b)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().l2_norm() <= 1e-12 * (1.0 + rhs.l2_norm()));
    }

    #[test]
    fn partition_sums_to_one(s in -1.0f64..=1.0, a in 0.05f64..0.7) {
        let p = AngularPartition::new(a).unwrap();
        let (plus, minus) = p.weights(s);
        prop_assert!((plus + minus - 1.0).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&plus) && (0.0..=1.0).contains(&minus));
        for sign in SignBranch::BOTH {
            if p.weight(s, sign) > 0.0 {
                prop_assert!(p.in_support(s, sign));
            }
        }
    }

    #[test]
    fn rotations_are_orthogonal(xi in frequency(), plus in any::<bool>()) {
        let sign = if plus { SignBranch::Plus } else { SignBranch::Minus };
        prop_assume!(sign.sign() * unit_s(&xi) >= -0.5);
        let n = xi.len();
        let r = rotation_field_at(&xi, sign).unwrap().rotation;
        prop_assert!(max_entry_diff(&(r.transpose() * r), &RMat::identity(n)) <= 1e-12);
        prop_assert!((r.det() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn diagonalization_reproduces_symbol(xi in frequency(), p in params(), plus in any::<bool>()) {
        let sign = if plus { SignBranch::Plus } else { SignBranch::Minus };
        prop_assume!(sign.sign() * unit_s(&xi) >= -0.5);
        let d = diagonalize_at(&xi, sign, &p).unwrap();
        prop_assert!(d.residual <= 1e-12, "residual {}", d.residual);
        let l = lame_symbol_real(&xi, &p);
        let expected: f64 = d.eigenvalues.iter().product();
        prop_assert!((l.det() - expected).abs() <= 1e-11 * expected.abs().max(1.0));
    }

    #[test]
    fn branches_agree_in_overlap(xi in frequency(), p in params()) {
        prop_assume!(unit_s(&xi).abs() <= 0.5);
        let a = sqrt_symbol_at(&xi, SignBranch::Plus, &p).unwrap().matrix();
        let b = sqrt_symbol_at(&xi, SignBranch::Minus, &p).unwrap().matrix();
        prop_assert!(max_entry_diff(&a, &b) <= 1e-12 * (1.0 + a.frobenius()));
        let sq = a * a;
        prop_assert!(max_entry_diff(&sq, &lame_symbol_real(&xi, &p)) <= 1e-11 * (1.0 + sq.frobenius()));
    }

    #[test]
    fn lr_norm_is_homogeneous_and_subadditive(
        s1 in any::<u64>(), s2 in any::<u64>(), c in -4.0f64..4.0,
        r in prop::sample::select(vec![2.0, 3.0, 4.0, 6.0, f64::INFINITY]),
    ) {
        let grid = Grid::new(2, 8, 2.0).unwrap();
        let (f, g) = (random_field(grid, s1), random_field(grid, s2));
        let nf = lr_norm(&f, r).unwrap();
        let ng = lr_norm(&g, r).unwrap();
        let scaled = lr_norm(&f.scaled(Complex64::new(c, 0.0)), r).unwrap();
        prop_assert!((scaled - c.abs() * nf).abs() <= 1e-12 * (1.0 + scaled));
        let sum = lr_norm(&f.add(&g).unwrap(), r).unwrap();
        prop_assert!(sum <= (nf + ng) * (1.0 + 1e-12));
    }

    #[test]
    fn exponent_classes_nest(n in 2usize..=3, iq in 0.0f64..=1.0, ir in 0.0f64..=0.5) {
        let q = if iq == 0.0 { f64::INFINITY } else { 1.0 / iq };
        let r = if ir == 0.0 { f64::INFINITY } else { 1.0 / ir };
        if is_sharp_admissible(q, r, n) {
            prop_assert!(is_admissible(q, r, n));
        }
        // (∞, r > 2) is admissible but outside the acceptable range by definition
        if is_admissible(q, r, n) && (q.is_finite() || r == 2.0) {
            prop_assert!(is_acceptable(q, r, n));
        }
        if q >= 1.0 {
            let class = classify_pair(q, r, n).unwrap();
            prop_assert_eq!(class.is_admissible(), is_admissible(q, r, n));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn halfwave_is_unitary_and_a_group(seed in any::<u64>(), s in -3.0f64..3.0, t in -3.0f64..3.0, p in params()) {
        let grid = Grid::new(2, 16, 6.0).unwrap();
        let prop = Propagator::new(grid, p);
        let f = random_field(grid, seed);
        let us = prop.halfwave(&f, s).unwrap();
        prop_assert!((us.l2_norm() / f.l2_norm() - 1.0).abs() <= 1e-12);
        let composed = prop.halfwave(&us, t).unwrap();
        let direct = prop.halfwave(&f, s + t).unwrap();
        prop_assert!(composed.relative_diff(&direct).unwrap() <= 1e-11);
    }

    #[test]
    fn resolvent_is_rotation_covariant(
        tau in -4.0f64..4.0, xi in frequency(), p in params(), seed in any::<u64>(),
        zr in -3.0f64..3.0, zi in 0.2f64..2.0,
    ) {
        let n = xi.len();
        let rp = ResolventParams::new(Complex64::new(0.0, 0.0), Complex64::new(zr, zi));
        let q = random_rotation(n, seed);
        let mut x = [0.0; MAX_DIM];
        x[..n].copy_from_slice(&xi);
        let qx = q.mul_vec(&x);
        let m = resolvent_multiplier_at(tau, &xi, &p, &rp, 0.0).unwrap();
        let mq = resolvent_multiplier_at(tau, &qx[..n], &p, &rp, 0.0).unwrap();
        let qc = q.to_complex();
        let conj = qc.transpose() * mq * qc;
        prop_assert!((conj - m).frobenius() <= 1e-11 * (1.0 + m.frobenius()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn config_round_trip_preserves_hash(seed in any::<u64>(), idx in 0usize..7) {
        let kinds = ["diag-check", "propagate", "decay-fit", "strichartz", "inhomo", "perturbed", "resolvent-sweep"];
        let mut cfg = ExperimentConfig::new(Experiment::default_for(kinds[idx]).unwrap());
        if let Some(s) = cfg.experiment.seed_mut() {
            *s = seed;
        }
        let text = cfg.canonical_json().unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        prop_assert_eq!(back.canonical_json().unwrap(), text);
        prop_assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
        prop_assert_eq!(back.experiment.kind(), kinds[idx]);
    }
}

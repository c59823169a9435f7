use elliott_core::rng::{stream, trial_stream};
use elliott_core::transport::*;
use itertools::Itertools;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;

fn brute_force_bottleneck(a: &[Complex64], b: &[Complex64]) -> f64 {
    (0..b.len())
        .permutations(b.len())
        .map(|p| a.iter().zip(&p).map(|(x, &j)| (x - b[j]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

fn real(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Hall-condition value: the least pairwise distance `r` such that every set
/// of atoms of `mu` carries no more mass than its closed `r`-neighbourhood
/// under `nu`.
fn hall_oracle(mu: &DiscreteMeasure<f64>, nu: &DiscreteMeasure<f64>) -> f64 {
    let mut radii: Vec<f64> = mu
        .atoms()
        .iter()
        .flat_map(|x| nu.atoms().iter().map(move |y| (x - y).abs()))
        .collect();
    radii.sort_by(f64::total_cmp);
    let m = mu.len();
    for r in radii {
        let ok = (1u32..(1 << m)).all(|set| {
            let chosen: Vec<usize> = (0..m).filter(|i| set & (1 << i) != 0).collect();
            let mass: BigRational = chosen.iter().map(|&i| mu.weights()[i].clone()).sum();
            let reach: BigRational = nu
                .atoms()
                .iter()
                .zip(nu.weights())
                .filter(|(y, _)| chosen.iter().any(|&i| (mu.atoms()[i] - **y).abs() <= r))
                .map(|(_, w)| w.clone())
                .sum();
            mass <= reach
        });
        if ok {
            return r;
        }
    }
    unreachable!("the largest distance always satisfies the condition")
}

fn random_rational_measure<R: Rng>(rng: &mut R, m: usize) -> DiscreteMeasure<f64> {
    let atoms: Vec<f64> = (0..m).map(|_| rng.random_range(-5..=5) as f64 / 2.0).collect();
    let raw: Vec<i64> = (0..m).map(|_| rng.random_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    let weights = raw.iter().map(|&w| BigRational::new(BigInt::from(w), BigInt::from(total))).collect();
    DiscreteMeasure::new(atoms, weights).unwrap()
}

#[test]
fn threshold_search_equals_brute_force() {
    let mut rng = stream(11);
    for case in 0..300 {
        let n = 1 + case % 8;
        let a: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let b: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let fast = matching_distance(&EigenMultiset::new(a.clone()).unwrap(), &EigenMultiset::new(b.clone()).unwrap()).unwrap();
        assert_eq!(fast, brute_force_bottleneck(&a, &b));
    }
}

#[test]
fn sorted_matching_attains_bottleneck_on_hermitian_spectra() {
    let mut rng = stream(12);
    for case in 0..200 {
        let n = 1 + case % 8;
        let a = random_hermitian(n, &mut rng).sorted_real_spectrum().unwrap();
        let b = random_hermitian(n, &mut rng).sorted_real_spectrum().unwrap();
        assert_eq!(sorted_matching_distance(&a, &b).unwrap(), brute_force_bottleneck(&real(&a), &real(&b)));
    }
}

#[test]
fn equal_weight_winf_is_bottleneck_matching() {
    let mut rng = stream(13);
    for case in 0..200 {
        let n = 1 + case % 8;
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let w = wasserstein_inf(
            &DiscreteMeasure::uniform(a.clone()).unwrap(),
            &DiscreteMeasure::uniform(b.clone()).unwrap(),
            &RealLine,
        )
        .unwrap();
        assert_eq!(w, brute_force_bottleneck(&real(&a), &real(&b)));
    }
}

#[test]
fn winf_matches_hall_condition_for_rational_weights() {
    let mut rng = stream(14);
    for case in 0..200 {
        let mu = random_rational_measure(&mut rng, 1 + case % 6);
        let nu = random_rational_measure(&mut rng, 1 + (case / 6) % 6);
        assert_eq!(wasserstein_inf(&mu, &nu, &RealLine).unwrap(), hall_oracle(&mu, &nu));
    }
}

#[test]
fn winf_agrees_with_literal_expansion() {
    let mut rng = stream(15);
    for _ in 0..100 {
        let mu = random_rational_measure(&mut rng, 3);
        let nu = random_rational_measure(&mut rng, 3);
        let denom = {
            use num_integer::Integer;
            mu.common_denominator().lcm(&nu.common_denominator())
        };
        let (x, y) = (expand_atoms(&mu, &denom), expand_atoms(&nu, &denom));
        if x.len() > 8 {
            let w = wasserstein_inf(&mu, &nu, &RealLine).unwrap();
            let sorted = sorted_matching_distance(&x, &y).unwrap();
            assert_eq!(w, sorted);
        } else {
            assert_eq!(wasserstein_inf(&mu, &nu, &RealLine).unwrap(), brute_force_bottleneck(&real(&x), &real(&y)));
        }
    }
}

#[test]
fn splitting_atoms_leaves_winf_unchanged() {
    let mut rng = stream(16);
    for _ in 0..100 {
        let mu = random_rational_measure(&mut rng, 4);
        let nu = random_rational_measure(&mut rng, 4);
        let half = BigRational::new(1.into(), 2.into());
        let atoms: Vec<f64> = mu.atoms().iter().flat_map(|&x| [x, x]).collect();
        let weights: Vec<BigRational> = mu.weights().iter().flat_map(|w| [w * &half, w * &half]).collect();
        let split = DiscreteMeasure::new(atoms, weights).unwrap();
        assert_eq!(
            wasserstein_inf(&mu, &nu, &RealLine).unwrap(),
            wasserstein_inf(&split, &nu, &RealLine).unwrap()
        );
    }
}

#[test]
fn winf_on_euclidean_points() {
    let mu = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
    let nu = DiscreteMeasure::uniform(vec![vec![3.0, 0.0], vec![3.0, 4.0]]).unwrap();
    assert_eq!(wasserstein_inf(&mu, &nu, &Euclidean { dim: 2 }).unwrap(), 3.0);
}

#[test]
fn spectral_measure_moments_match_traces() {
    let mut rng = stream(17);
    for case in 0..100 {
        let a = random_normal(2 + case % 5, &mut rng);
        let mu = spectral_measure(&a);
        let n = a.n() as f64;
        let mut power = CMatrix::identity(a.n(), a.n());
        for k in 1..=4 {
            power = &power * a.entries();
            let trace = power.trace() / n;
            let moment: Complex64 = mu
                .atoms()
                .iter()
                .zip(mu.weights())
                .map(|(z, w)| z.powu(k) * num_traits::ToPrimitive::to_f64(w).unwrap())
                .sum();
            assert!((trace - moment).norm() < 1e-8, "k={k}: {trace} vs {moment}");
        }
    }
}

#[test]
fn hermitian_winf_pair_is_matching_distance() {
    let mut rng = stream(18);
    for n in 1..=6 {
        let a = random_hermitian(n, &mut rng);
        let b = random_hermitian(n, &mut rng);
        let delta = sorted_matching_distance(&a.sorted_real_spectrum().unwrap(), &b.sorted_real_spectrum().unwrap()).unwrap();
        assert!((winf_pair(&a, &b).unwrap() - delta).abs() < 1e-12);
        assert_eq!(winf_pair(&a, &a).unwrap(), 0.0);
    }
}

#[test]
fn unitary_distance_never_undercuts_weyl_bound() {
    for trial in 0..30 {
        let mut rng = trial_stream(19, trial);
        let n = 2 + (trial as usize) % 4;
        let a = random_hermitian(n, &mut rng);
        let b = random_hermitian(n, &mut rng);
        let r = unitary_distance(&a, &b, &UnitaryDistanceOptions::default()).unwrap();
        assert!(r.lower_bound_valid);
        assert!(r.value >= r.matching - 1e-9);
        assert!(r.gap() <= 1e-6);
        let c = r.certificate;
        let residual = operator_norm(&(c.adjoint() * &c - CMatrix::identity(n, n)));
        assert!(residual < 1e-10);
        let achieved = operator_norm(&(a.entries() - &c * b.entries() * c.adjoint()));
        assert!((achieved - r.value).abs() < 1e-10);
    }
}

#[test]
fn normal_pairs_respect_matching_upper_bound() {
    for trial in 0..5 {
        let mut rng = trial_stream(20, trial);
        let a = random_normal(3, &mut rng);
        let b = random_normal(3, &mut rng);
        let r = unitary_distance(&a, &b, &UnitaryDistanceOptions::default()).unwrap();
        assert!(!r.lower_bound_valid);
        assert!(r.value <= r.matching + 1e-9);
    }
}

#[test]
fn weyl_table_is_deterministic_and_ordered() {
    let t1 = weyl::weyl_table(weyl::PairKind::Hermitian, 3, 12, 5, 1e-8).unwrap();
    let t2 = weyl::weyl_table(weyl::PairKind::Hermitian, 3, 12, 5, 1e-8).unwrap();
    assert_eq!(t1, t2);
    assert!(t1.iter().enumerate().all(|(i, r)| r.trial == i as u64));
}

fn multiset(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, y)| Complex64::new(x, y)), n)
}

proptest! {
    #[test]
    fn matching_distance_is_a_metric(
        (a, b, c) in (1usize..=6).prop_flat_map(|n| (multiset(n), multiset(n), multiset(n)))
    ) {
        let (ma, mb, mc) = (
            EigenMultiset::new(a.clone()).unwrap(),
            EigenMultiset::new(b).unwrap(),
            EigenMultiset::new(c).unwrap(),
        );
        let ab = matching_distance(&ma, &mb).unwrap();
        let ba = matching_distance(&mb, &ma).unwrap();
        let bc = matching_distance(&mb, &mc).unwrap();
        let ac = matching_distance(&ma, &mc).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(matching_distance(&ma, &ma).unwrap(), 0.0);
        let mut shuffled = a;
        shuffled.reverse();
        prop_assert_eq!(matching_distance(&ma, &EigenMultiset::new(shuffled).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn sorted_matching_equals_brute_force(
        (a, b) in (1usize..=8).prop_flat_map(|n| (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        ))
    ) {
        prop_assert_eq!(sorted_matching_distance(&a, &b).unwrap(), brute_force_bottleneck(&real(&a), &real(&b)));
    }

    #[test]
    fn dirac_distance(x in -100.0f64..100.0, y in -100.0f64..100.0) {
        let w = wasserstein_inf(&DiscreteMeasure::dirac(x), &DiscreteMeasure::dirac(y), &RealLine).unwrap();
        prop_assert_eq!(w, (x - y).abs());
    }
}

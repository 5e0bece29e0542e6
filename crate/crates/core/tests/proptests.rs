use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vilwav::group::{pair, DigitVector};
use vilwav::mask::{random_phases, MaskTable};
use vilwav::transform::{parseval_deviations, CoeffGrid, FilterBank};
use vilwav::tree::sample_tree;
use vilwav::wavelet::character_matrix;
use vilwav::{EdgePhases, Limits, Modulus, WaveletSystem};

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn prime() -> impl Strategy<Value = Modulus> {
    prop::sample::select(PRIMES.to_vec()).prop_map(|p| Modulus::new(p).unwrap())
}

/// Digits on the window [-4, 4), reduced mod p by the caller.
fn raw_digits() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..7, 8)
}

fn point(p: Modulus, raw: &[u32]) -> DigitVector {
    let pairs: Vec<_> = raw.iter().enumerate().map(|(k, &d)| (k as i32 - 4, d % p.get())).collect();
    DigitVector::point(p, &pairs).unwrap()
}

fn character(p: Modulus, raw: &[u32]) -> DigitVector {
    let pairs: Vec<_> = raw.iter().enumerate().map(|(k, &d)| (k as i32 - 4, d % p.get())).collect();
    DigitVector::character(p, &pairs).unwrap()
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-12
}

proptest! {
    #[test]
    fn addition_is_a_group_law(p in prime(), a in raw_digits(), b in raw_digits(), c in raw_digits()) {
        let (x, y, z) = (point(p, &a), point(p, &b), point(p, &c));
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().add(&z).unwrap(), x.add(&y.add(&z).unwrap()).unwrap());
        prop_assert!(x.add(&x.neg()).unwrap().is_zero());
        prop_assert_eq!(x.add(&y).unwrap().sub(&y).unwrap(), x.clone());
        prop_assert!(x.scale(p.get()).is_zero());
    }

    #[test]
    fn pairing_is_a_bicharacter(p in prime(), a in raw_digits(), b in raw_digits(), c in raw_digits(), d in raw_digits()) {
        let (x, y) = (point(p, &a), point(p, &b));
        let (chi, eta) = (character(p, &c), character(p, &d));
        let lhs = pair(&chi, &x.add(&y).unwrap()).unwrap();
        prop_assert!(close(lhs, pair(&chi, &x).unwrap() * pair(&chi, &y).unwrap()));
        let lhs = pair(&chi.add(&eta).unwrap(), &x).unwrap();
        prop_assert!(close(lhs, pair(&chi, &x).unwrap() * pair(&eta, &x).unwrap()));
        prop_assert!(close(pair(&chi, &x.neg()).unwrap(), pair(&chi, &x).unwrap().conj()));
    }

    #[test]
    fn dilation_is_adjoint_in_the_pairing(p in prime(), a in raw_digits(), c in raw_digits(), k in -2i32..3) {
        let (x, chi) = (point(p, &a), character(p, &c));
        prop_assert!(close(pair(&chi.dilate(k), &x).unwrap(), pair(&chi, &x.dilate(k)).unwrap()));
    }

    #[test]
    fn character_matrix_is_unitary(p in prime()) {
        let u = character_matrix(p);
        let n = u.nrows();
        let dev = (u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-12, "deviation {}", dev);
    }

    #[test]
    fn mask_round_trips_through_tree(p in prop::sample::select(vec![2usize, 3, 5, 7]), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = sample_tree(p, &mut rng).unwrap();
        let phases = random_phases(&tree, &mut rng);
        let (back, back_phases) = MaskTable::from_tree(&tree, &phases).unwrap().to_tree().unwrap();
        prop_assert_eq!(&back, &tree);
        for e in tree.edges() {
            let d = (phases.get(&e).copied().unwrap_or(0.0) - back_phases.get(&e).copied().unwrap_or(0.0)).rem_euclid(1.0);
            prop_assert!(d.min(1.0 - d) < 1e-12);
        }
    }

    #[test]
    fn mask_depends_only_on_two_digits(p in prime(), seed in any::<u64>(), c in raw_digits(), extra in 0u32..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = sample_tree(p.as_usize(), &mut rng).unwrap();
        let mask = MaskTable::from_tree(&tree, &random_phases(&tree, &mut rng)).unwrap();
        let chi = character(p, &c).truncate_below(-1);
        // Digits above α₀ do not affect m₀.
        let bump = DigitVector::character(p, &[(1, 1), (2, extra % p.get())]).unwrap();
        prop_assert!(close(mask.eval(&chi).unwrap(), mask.eval(&chi.add(&bump).unwrap()).unwrap()));
    }

    #[test]
    fn transform_reconstructs_and_conserves_energy(
        p in prop::sample::select(vec![2usize, 3, 5]),
        seed in any::<u64>(),
        levels in 1usize..4,
        values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = sample_tree(p, &mut rng).unwrap();
        let phases: EdgePhases = random_phases(&tree, &mut rng);
        let system = WaveletSystem::build(&tree, &phases, &Limits::default()).unwrap();
        let bank = FilterBank::from_system(&system);
        let m = system.p;
        let mut grid = CoeffGrid::new(m, 2);
        let span = (p as u64).pow(3);
        for (k, (re, im)) in values.into_iter().enumerate() {
            grid.entries.insert((k as u64 * 7919) % span, Complex64::new(re, im));
        }
        let pyramid = bank.analyze(&grid, levels).unwrap();
        prop_assert!(bank.synthesize(&pyramid).unwrap().max_abs_diff(&grid) < 1e-12);
        prop_assert!((pyramid.energy() - grid.energy()).abs() < 1e-12);
        for d in parseval_deviations(&bank, &grid, levels).unwrap() {
            prop_assert!(d < 1e-12);
        }
    }
}

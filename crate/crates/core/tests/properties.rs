use std::cmp::Ordering;

use fracparts::bounds::{evaluate_bound, evaluate_bounds};
use fracparts::lattice::{cardinality_bridge, naive_count_m};
use fracparts::realnum::{dist_nearest_int, eval_real, RealSpec};
use fracparts::{count_m, sum_reciprocals, AlphaVector, BoxSpec, RunConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NONSQUARES: [u64; 8] = [2, 3, 5, 6, 7, 10, 13, 9_999_991];

fn quad(a: i64, b: i64, d: u64, c: i64) -> RealSpec {
    RealSpec::quadratic(a, b, d, c).unwrap()
}

fn quad_strategy() -> impl Strategy<Value = (i64, i64, u64, i64)> {
    (-50i64..50, (1i64..20).prop_flat_map(|b| prop_oneof![Just(b), Just(-b)]), prop::sample::select(NONSQUARES.to_vec()), 1i64..30)
}

// Sign of (a + b sqrt(d)) / c - r, decided exactly by squaring.
fn cmp_surd(r: &BigRational, a: i64, b: i64, d: u64, c: i64) -> Ordering {
    // compare b sqrt(d) with t = c r - a (c > 0)
    let t = r * BigRational::from_integer(c.into()) - BigRational::from_integer(a.into());
    let lhs_neg = b < 0;
    let t_neg = t.is_negative();
    let lhs_sq = BigRational::from_integer(BigInt::from(b) * BigInt::from(b) * BigInt::from(d));
    let t_sq = &t * &t;
    match (lhs_neg, t_neg) {
        (false, true) => Ordering::Greater,
        (true, false) => Ordering::Less,
        (false, false) => lhs_sq.cmp(&t_sq),
        (true, true) => t_sq.cmp(&lhs_sq),
    }
}

fn small_alpha(dim: usize) -> impl Strategy<Value = AlphaVector> {
    prop::collection::vec(quad_strategy(), dim).prop_map(|cs| {
        AlphaVector::new(cs.into_iter().map(|(a, b, d, c)| quad(a, b, d, c)).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enclosures_contain_the_value((a, b, d, c) in quad_strategy(), bits in 16u32..600) {
        let v = eval_real(&quad(a, b, d, c), bits).unwrap();
        prop_assert_ne!(cmp_surd(&v.lower(), a, b, d, c), Ordering::Less);
        prop_assert_ne!(cmp_surd(&v.upper(), a, b, d, c), Ordering::Greater);
    }

    #[test]
    fn refinement_narrows_and_overlaps((a, b, d, c) in quad_strategy(), bits in 16u32..300) {
        let s = quad(a, b, d, c);
        let coarse = eval_real(&s, bits).unwrap();
        let fine = eval_real(&s, bits * 2).unwrap();
        prop_assert!(fine.radius() <= coarse.radius());
        prop_assert!(fine.lower() <= coarse.upper() && coarse.lower() <= fine.upper());
    }

    #[test]
    fn distance_is_symmetric_and_periodic((a, b, d, c) in quad_strategy(), shift in -1000i64..1000) {
        let x = eval_real(&quad(a, b, d, c), 200).unwrap();
        let base = dist_nearest_int(&x);
        let neg = dist_nearest_int(&x.neg());
        let moved = dist_nearest_int(&x.add_int(&BigInt::from(shift)));
        prop_assert_eq!(&base.dist, &moved.dist);
        prop_assert!(neg.dist.lower() <= base.dist.upper() && base.dist.lower() <= neg.dist.upper());
        let half = BigRational::new(1.into(), 2.into());
        prop_assert!(!base.dist.lower().is_negative() && base.dist.lower() <= half);
    }

    #[test]
    fn alpha_specs_round_trip(alpha in small_alpha(3), r in (-9i64..9, 1i64..9)) {
        let mut comps: Vec<RealSpec> = alpha.components().to_vec();
        comps.push(RealSpec::rational(r.0, r.1).unwrap());
        comps.push(RealSpec::decimal("0.1234567", 80).unwrap());
        let v = AlphaVector::new(comps).unwrap();
        let again = AlphaVector::parse(&v.to_string()).unwrap();
        prop_assert_eq!(&again, &v);
        prop_assert_eq!(again.to_string(), v.to_string());
    }

    #[test]
    fn counts_are_even_and_monotone(alpha in small_alpha(1), q in 1u32..40, k in 1u32..7) {
        let cfg = RunConfig::default();
        let eps = |k: u32| BigRational::new(1.into(), BigInt::from(1u64 << k));
        let c = count_m(&alpha, &eps(k), q as f64, &cfg).unwrap().count;
        let c_small_eps = count_m(&alpha, &eps(k + 1), q as f64, &cfg).unwrap().count;
        let c_big_q = count_m(&alpha, &eps(k), q as f64 + 1.0, &cfg).unwrap().count;
        prop_assert_eq!(c % 2, 0);
        prop_assert!(c_small_eps <= c);
        prop_assert!(c <= c_big_q);
    }

    #[test]
    fn bridge_adds_the_origin(alpha in small_alpha(2), q in 1u32..8, num in 1i64..50) {
        let eps = BigRational::new(num.into(), 100.into());
        let (lat, m) = cardinality_bridge(&alpha, &eps, q as f64, &RunConfig::default()).unwrap();
        prop_assert_eq!(lat, m + 1);
    }

    #[test]
    fn results_ignore_chunk_count(alpha in small_alpha(2), q in 1u32..25, chunks in 1usize..17) {
        let one = RunConfig::default().with_chunks(1);
        let many = RunConfig::default().with_chunks(chunks);
        let bx = BoxSpec::cube(2, q as f64).unwrap();
        match (sum_reciprocals(&alpha, &bx, &one), sum_reciprocals(&alpha, &bx, &many)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.exact_bounds(), b.exact_bounds());
                prop_assert_eq!(a, b);
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
        let eps = BigRational::new(1.into(), 8.into());
        let c1 = count_m(&alpha, &eps, q as f64, &one).unwrap();
        let c2 = count_m(&alpha, &eps, q as f64, &many).unwrap();
        prop_assert_eq!(c1, c2);
    }

    #[test]
    fn bound_catalog_ordering(n in 1usize..4, q in 2.0f64..1e4, phi in 1e-6f64..=1.0, shrink in 1e-3f64..=1.0) {
        let up = evaluate_bound("thm_upper", n, q, phi, None).unwrap().value;
        let low = evaluate_bound("thm_lower", n, q, phi, None).unwrap().value;
        prop_assert!(up >= low);
        let gap = evaluate_bound("gap_upper", n, q, phi, Some(phi * shrink)).unwrap().value;
        prop_assert!(gap >= q.powi(n as i32) * q.ln());
        let all = evaluate_bounds(n, q, phi, Some(phi * shrink)).unwrap();
        prop_assert_eq!(&all, &evaluate_bounds(n, q, phi, Some(phi * shrink)).unwrap());
        prop_assert!(all.iter().all(|b| b.value.is_finite() && b.value >= 0.0));
        prop_assert_eq!(all.iter().any(|b| b.name == "lang_1d"), n == 1);
    }
}

#[test]
fn sampled_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let cfg = RunConfig::default();
    for _ in 0..40 {
        let dim = rng.gen_range(1..=3);
        let comps = (0..dim)
            .map(|_| {
                let b = rng.gen_range(1..12i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
                let d = NONSQUARES[rng.gen_range(0..NONSQUARES.len())];
                quad(rng.gen_range(-20..20), b, d, rng.gen_range(1..15))
            })
            .collect();
        let alpha = AlphaVector::new(comps).unwrap();
        let q = rng.gen_range(1..=if dim == 3 { 5 } else { 12 }) as f64;
        let eps = BigRational::new(rng.gen_range(1..=50i64).into(), 100.into());
        let fast = count_m(&alpha, &eps, q, &cfg).unwrap().count;
        let naive = naive_count_m(&alpha, &eps, q, &cfg).unwrap();
        assert_eq!(fast, naive, "alpha={alpha} eps={eps} Q={q}");
    }
}

#[test]
fn half_integer_ties_count_both_neighbours() {
    // second component 1/2 + sqrt(2), so q = (1, -1) gives alpha . q = -1/2
    let alpha = AlphaVector::parse("quad:(0+1*sqrt(2))/1,quad:(1+2*sqrt(2))/2").unwrap();
    let eps = BigRational::new(1.into(), 2.into());
    let cfg = RunConfig::default();
    let rec = count_m(&alpha, &eps, 3.0, &cfg).unwrap();
    assert!(rec.ties_present);
    assert_eq!(rec.count, naive_count_m(&alpha, &eps, 3.0, &cfg).unwrap());
}

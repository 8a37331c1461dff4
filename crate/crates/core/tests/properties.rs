use conetri_core::linalg::{
    determinant, nullspace_mod2, smith_normal_form, solve_rational, solve_scaled, IntMatrix,
};
use conetri_core::number_theory::{factorize, p_max, phi};
use conetri_core::verify::{corollary_bound, mu_ceiling};
use conetri_core::{pow2, run_p2t, LatticeVector, SimplicialCone, Triangulation};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn matrix(n: usize, entries: &[i64]) -> IntMatrix {
    let rows: Vec<Vec<i64>> = entries.chunks(n).map(<[i64]>::to_vec).collect();
    IntMatrix::from_rows(&rows).unwrap()
}

fn square(max_n: usize, bound: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-bound..=bound, n * n).prop_map(move |e| matrix(n, &e))
    })
}

/// Leibniz expansion over all permutations.
fn permutation_det(m: &IntMatrix) -> BigInt {
    fn go(m: &IntMatrix, row: usize, used: &mut [bool], sign: i32) -> BigInt {
        let n = m.rows();
        if row == n {
            return BigInt::from(sign);
        }
        let mut total = BigInt::zero();
        for j in 0..n {
            if used[j] {
                continue;
            }
            // columns still free to the left of j each add one inversion
            let inversions = (0..j).filter(|&k| !used[k]).count();
            let s = if inversions % 2 == 0 { sign } else { -sign };
            used[j] = true;
            total += &m[(row, j)] * go(m, row + 1, used, s);
            used[j] = false;
        }
        total
    }
    go(m, 0, &mut vec![false; m.rows()], 1)
}

fn cone_strategy(dims: std::ops::RangeInclusive<usize>, bound: i64) -> impl Strategy<Value = SimplicialCone> {
    dims.prop_flat_map(move |d| prop::collection::vec(-bound..=bound, d * d))
        .prop_filter_map("singular or zero generator", |e| {
            let d = (e.len() as f64).sqrt() as usize;
            let gens: Vec<LatticeVector> = e
                .chunks(d)
                .map(|c| LatticeVector::from(c).primitive_part())
                .collect();
            SimplicialCone::new(gens).ok()
        })
}

fn is_in_lattice(cone: &SimplicialCone, x: &LatticeVector) -> bool {
    cone.barycentric(x).unwrap().iter().all(|q| q.is_integer())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn determinant_matches_permutation_expansion(m in square(4, 9)) {
        prop_assert_eq!(determinant(&m).unwrap(), permutation_det(&m));
    }

    #[test]
    fn solve_reproduces_rhs(m in square(5, 9), b in prop::collection::vec(-20i64..=20, 5)) {
        let n = m.rows();
        let b: Vec<BigInt> = b[..n].iter().map(|&v| BigInt::from(v)).collect();
        prop_assume!(!determinant(&m).unwrap().is_zero());
        let x = solve_rational(&m, &b).unwrap();
        for i in 0..n {
            let row: BigRational = (0..n)
                .map(|j| BigRational::from_integer(m[(i, j)].clone()) * &x[j])
                .sum();
            prop_assert_eq!(row, BigRational::from_integer(b[i].clone()));
        }
        let (y, den) = solve_scaled(&m, &b).unwrap();
        prop_assert_eq!(den, determinant(&m).unwrap().abs());
        for (yi, xi) in y.iter().zip(x.iter()) {
            prop_assert_eq!(BigRational::new(yi.clone(), determinant(&m).unwrap().abs()), xi.clone());
        }
    }

    #[test]
    fn solve_falls_back_to_big_integers(scale in 40u32..80, m in square(3, 5)) {
        let det = determinant(&m).unwrap();
        prop_assume!(!det.is_zero());
        let big = BigInt::from(3).pow(scale);
        let b: Vec<BigInt> = (0..m.rows()).map(|i| &big + i).collect();
        let x = solve_rational(&m, &b).unwrap();
        for i in 0..m.rows() {
            let row: BigRational = (0..m.rows())
                .map(|j| BigRational::from_integer(m[(i, j)].clone()) * &x[j])
                .sum();
            prop_assert_eq!(row, BigRational::from_integer(b[i].clone()));
        }
    }

    #[test]
    fn smith_form_identities(m in square(4, 9)) {
        let det = determinant(&m).unwrap();
        prop_assume!(!det.is_zero());
        let snf = smith_normal_form(&m).unwrap();
        let product = snf.left.mul(&m).unwrap().mul(&snf.right).unwrap();
        prop_assert!(product.is_diagonal());
        for (i, d) in snf.diag.iter().enumerate() {
            prop_assert_eq!(&product[(i, i)], d);
            prop_assert!(d.is_positive());
        }
        for w in snf.diag.windows(2) {
            prop_assert!(w[1].is_multiple_of(&w[0]));
        }
        prop_assert_eq!(snf.diag.iter().product::<BigInt>(), det.abs());
        prop_assert!(determinant(&snf.left).unwrap().abs().is_one());
        prop_assert!(determinant(&snf.right).unwrap().abs().is_one());
    }

    #[test]
    fn nullspace_mod2_is_kernel(m in square(5, 9)) {
        let n = m.rows();
        let basis = nullspace_mod2(&m).unwrap();
        for k in &basis {
            for i in 0..n {
                let s: BigInt = (0..n).map(|j| &m[(i, j)] * BigInt::from(k[j])).sum();
                prop_assert!(s.is_even());
            }
        }
        // rank over GF(2) by elimination on bit rows
        let mut rows: Vec<u32> = (0..n)
            .map(|i| (0..n).fold(0u32, |acc, j| acc | (u32::from(m[(i, j)].is_odd()) << j)))
            .collect();
        let mut rank = 0;
        for bit in 0..n {
            if let Some(p) = (rank..n).find(|&r| rows[r] >> bit & 1 == 1) {
                rows.swap(rank, p);
                for r in 0..n {
                    if r != rank && rows[r] >> bit & 1 == 1 {
                        rows[r] ^= rows[rank];
                    }
                }
                rank += 1;
            }
        }
        prop_assert_eq!(basis.len(), n - rank);
    }

    #[test]
    fn phi_additive(a in 1u64..=10_000, b in 1u64..=10_000) {
        let lhs = phi(a * b).unwrap();
        prop_assert!((lhs - phi(a).unwrap() - phi(b).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn par_normalize_idempotent(cone in cone_strategy(2..=4, 6), x in prop::collection::vec(-30i64..=30, 4)) {
        let d = cone.dim();
        let x = LatticeVector::from(&x[..d]);
        let once = cone.par_normalize(&x).unwrap();
        prop_assert_eq!(cone.par_normalize(&once).unwrap(), once.clone());
        prop_assert!(is_in_lattice(&cone, &x.sub(&once)));
        for q in cone.barycentric(&once).unwrap().iter() {
            prop_assert!(!q.is_negative() && *q < BigRational::one());
        }
    }

    #[test]
    fn order_p_element_properties(cone in cone_strategy(2..=4, 6)) {
        let mu = cone.multiplicity_u64().unwrap();
        prop_assume!(mu > 1);
        for &(p, _) in factorize(mu).unwrap().factors() {
            let e = cone.order_p_element(p).unwrap();
            prop_assert!(e.z.iter().all(|&z| z < p));
            prop_assert!(!is_in_lattice(&cone, &e.x));
            prop_assert!(is_in_lattice(&cone, &e.x.scale(&BigInt::from(p))));
        }
    }

    #[test]
    fn dilation_homogeneous(cone in cone_strategy(2..=4, 6), c in prop::collection::vec(0i64..=5, 4), k in 1i64..=9) {
        let d = cone.dim();
        let coefs: Vec<BigInt> = c[..d].iter().map(|&v| BigInt::from(v)).collect();
        let x = LatticeVector::combination(cone.generators(), &coefs, &BigInt::one()).unwrap();
        let kx = x.scale(&BigInt::from(k));
        prop_assert_eq!(
            cone.dilation(&kx).unwrap(),
            cone.dilation(&x).unwrap() * BigRational::from_integer(k.into())
        );
    }

    #[test]
    fn half_vector_iff_even(cone in cone_strategy(2..=3, 8)) {
        let h = cone.half_vector().unwrap();
        prop_assert_eq!(h.is_none(), cone.multiplicity().is_odd());
        if let Some(u) = h {
            prop_assert!(cone.contains(&u));
            let lambda = cone.barycentric(&u).unwrap();
            let half = BigRational::new(1.into(), 2.into());
            prop_assert!(lambda.iter().all(|q| q.is_zero() || *q == half));
        }
    }

    #[test]
    fn indexed_lookup_matches_scan(cone in cone_strategy(2..=3, 5), probes in prop::collection::vec(prop::collection::vec(0i64..=3, 3), 1..6)) {
        let p2t = run_p2t(cone.clone()).unwrap();
        let t = pow2::refine_bounded(p2t.triangulation, Some(20_000)).map(|r| r.triangulation);
        prop_assume!(t.is_ok());
        let t = t.unwrap();
        let d = cone.dim();
        for c in probes {
            let coefs: Vec<BigInt> = c[..d].iter().map(|&v| BigInt::from(v)).collect();
            let x = LatticeVector::combination(cone.generators(), &coefs, &BigInt::one()).unwrap();
            prop_assume!(!x.is_zero());
            let scan = t.cones_containing_scan(&x);
            let holder = t.get(scan[0]).unwrap();
            let (nums, _) = holder.barycentric_scaled(&x).unwrap();
            let face: Vec<LatticeVector> = holder
                .generators()
                .iter()
                .zip(&nums)
                .filter(|(_, n)| !n.is_zero())
                .map(|(g, _)| g.clone())
                .collect();
            prop_assert_eq!(t.cones_containing(&x, &face), scan);
        }
    }

    #[test]
    fn stellar_children_partition_parent(cone in cone_strategy(2..=4, 5), c in prop::collection::vec(0i64..=4, 4)) {
        let d = cone.dim();
        let coefs: Vec<BigInt> = c[..d].iter().map(|&v| BigInt::from(v)).collect();
        let x = LatticeVector::combination(cone.generators(), &coefs, &BigInt::one()).unwrap();
        prop_assume!(!x.is_zero());
        let mut t = Triangulation::new(cone.clone());
        t.subdivide_all(&x.primitive_part(), &[]).unwrap();
        prop_assert!(t.volume_ok());
    }
}

#[test]
fn phi_on_range() {
    for n in 2..=100_000u64 {
        let f = factorize(n).unwrap();
        let p = f.phi();
        assert!(p >= -1e-12, "phi({n}) = {p}");
        assert_eq!(p.floor() == 0.0, n.is_power_of_two(), "n = {n}");
        assert!(p <= 2.0 * (n as f64).log2() - 2.0 + 1e-9, "n = {n}");
    }
}

#[test]
fn bounds_monotone_in_mu() {
    for d in 2..=6 {
        let mut prev_cor = 0.0;
        let mut prev_ceiling = 0.0;
        for mu in 2..=10_000u64 {
            let cor = corollary_bound(mu, d).unwrap();
            let ceiling = mu_ceiling(mu);
            assert!(cor >= prev_cor, "d={d} mu={mu}");
            assert!(ceiling >= prev_ceiling, "mu={mu}");
            prev_cor = cor;
            prev_ceiling = ceiling;
        }
    }
}

#[test]
fn p_max_of_power_of_two_is_two() {
    for k in 1..40 {
        assert_eq!(p_max(1 << k).unwrap(), 2);
    }
}

//! Property tests of order relations that hold exactly or pointwise.

use dvlab::estimators::{
    geometric_mean_from_norms, m_from_norms, negative_moment_from_norms, positive_moment_from_norms, sphere_norms,
};
use dvlab::optimize::SphereOptConfig;
use dvlab::sampling::{sample_grassmannian, sample_sphere};
use dvlab::sections::{section_diameter, section_inradius};
use dvlab::{ConvexBody, SeedSpec};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(f64::INFINITY), 1.0f64..8.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_norm_is_non_increasing_in_p(n in 1usize..40, p in 1.0f64..10.0, dp in 0.0f64..5.0, seed: u64) {
        let x = sample_sphere(n, &SeedSpec::new(seed)).unwrap();
        let a = ConvexBody::lp(p, n).unwrap().eval(&x);
        let b = ConvexBody::lp(p + dp, n).unwrap().eval(&x);
        let c = ConvexBody::cube(n).unwrap().eval(&x);
        prop_assert!(b <= a * (1.0 + 1e-12));
        prop_assert!(c <= b * (1.0 + 1e-12));
    }

    #[test]
    fn mean_norm_is_non_increasing_in_p(n in 2usize..30, p in 1.0f64..6.0, dp in 0.1f64..4.0, seed: u64) {
        // common random numbers make the ordering hold sample by sample
        let s = SeedSpec::new(seed);
        let a = m_from_norms(&sphere_norms(&ConvexBody::lp(p, n).unwrap(), 500, &s).unwrap(), &s);
        let b = m_from_norms(&sphere_norms(&ConvexBody::lp(p + dp, n).unwrap(), 500, &s).unwrap(), &s);
        prop_assert!(b.value <= a.value * (1.0 + 1e-12));
    }

    #[test]
    fn power_means_are_ordered(p in exponent(), n in 2usize..30, q in 0.2f64..6.0, seed: u64) {
        let s = SeedSpec::new(seed);
        let norms = sphere_norms(&ConvexBody::lp(p, n).unwrap(), 400, &s).unwrap();
        let neg = negative_moment_from_norms(&norms, q, &s).unwrap().value;
        let geo = geometric_mean_from_norms(&norms, &s).unwrap().value;
        let mean = m_from_norms(&norms, &s).value;
        let pos = positive_moment_from_norms(&norms, 1.0 + q, &s).unwrap().value;
        let tol = 1.0 + 1e-10;
        prop_assert!(neg <= geo * tol, "{neg} > {geo}");
        prop_assert!(geo <= mean * tol, "{geo} > {mean}");
        prop_assert!(mean <= pos * tol, "{mean} > {pos}");
    }

    #[test]
    fn diameter_dominates_twice_the_inradius(p in exponent(), n in 3usize..12, l in 1usize..4, seed: u64) {
        let l = l.min(n);
        let body = ConvexBody::lp(p, n).unwrap();
        let s = SeedSpec::new(seed);
        let e = sample_grassmannian(n, l, &s).unwrap();
        let cfg = SphereOptConfig { restarts: 8, ..Default::default() };
        let d = section_diameter(&body, &e, &cfg, &s).unwrap().value;
        let r = section_inradius(&body, &e, &cfg, &s).unwrap().value;
        prop_assert!(d >= 2.0 * r * (1.0 - 1e-9), "diam {d} < 2·{r}");
        // K ∩ E sits between the balls of radius 1/b and 1/min‖·‖
        let lo = body.lipschitz_constant().unwrap();
        let hi = body.min_on_sphere().unwrap();
        prop_assert!(r >= 1.0 / lo * (1.0 - 1e-9));
        prop_assert!(d <= 2.0 / hi * (1.0 + 1e-9));
    }
}

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Two-sample Kolmogorov distance `sup_t |F_a(t) - F_b(t)|` between the
/// empirical CDFs of `a` and `b`, computed exactly by a merge scan.
///
/// Tied values are consumed from both samples before the gap is measured.
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("Kolmogorov distance needs two nonempty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(invalid("NaN in Kolmogorov distance input"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup = 0.0f64;
    while i < a.len() && j < b.len() {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(
            ks_two_sample(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(),
            0.0
        );
        assert_eq!(ks_two_sample(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[1.0, 3.0], &[2.0]).unwrap(), 0.5);
        assert_eq!(ks_two_sample(&[1.0f32, 1.0], &[1.0]).unwrap(), 0.0);
        assert!(ks_two_sample::<f64>(&[], &[1.0]).is_err());
    }

    /// Brute-force sup over every pooled point.
    fn brute(a: &[f64], b: &[f64]) -> f64 {
        let cdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
        a.iter()
            .chain(b)
            .map(|&t| (cdf(a, t) - cdf(b, t)).abs())
            .fold(0.0, f64::max)
    }

    fn rounded() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec((-20i32..20).prop_map(|v| v as f64 / 4.0), 1..40)
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in rounded(), b in rounded()) {
            prop_assert!((ks_two_sample(&a, &b).unwrap() - brute(&a, &b)).abs() < 1e-12);
        }

        #[test]
        fn symmetric_and_transform_invariant(a in rounded(), b in rounded()) {
            let d = ks_two_sample(&a, &b).unwrap();
            prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap());
            let f = |v: &Vec<f64>| v.iter().map(|x| x.exp() * 3.0 - 1.0).collect::<Vec<_>>();
            prop_assert!((ks_two_sample(&f(&a), &f(&b)).unwrap() - d).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn triangle_inequality(a in rounded(), b in rounded(), c in rounded()) {
            let ab = ks_two_sample(&a, &b).unwrap();
            let bc = ks_two_sample(&b, &c).unwrap();
            let ac = ks_two_sample(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }
}

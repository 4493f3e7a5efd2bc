//! Exact integer and rational matrices.
//!
//! Determinants and adjugates use fraction-free (Bareiss) elimination so that
//! every intermediate value is itself a minor of the input. A plain rational
//! Gaussian elimination is kept alongside as an independent oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    labels: Vec<String>,
    rows: Vec<Vec<BigInt>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    labels: Vec<String>,
    rows: Vec<Vec<BigRational>>,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_square<T>(labels: &[String], rows: &[Vec<T>]) -> Result<()> {
    let n = rows.len();
    if labels.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch);
    }
    Ok(())
}

impl IntMatrix {
    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        check_square(&labels, &rows)?;
        Ok(IntMatrix { labels, rows })
    }

    /// Unlabelled matrix from machine integers; labels are `0, 1, ...`.
    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        let rows: Vec<Vec<BigInt>> =
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_rows(default_labels(rows.len()), rows)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        IntMatrix { labels: default_labels(n), rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.rows[i][j] = value;
    }

    pub fn negated(&self) -> Self {
        IntMatrix {
            labels: self.labels.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(|x| -x).collect()).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.rows[i][j] == self.rows[j][i]))
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        let n = self.dim();
        if other.dim() != n {
            return Err(Error::DimensionMismatch);
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(BigInt::zero(), |acc, k| acc + &self.rows[i][k] * &other.rows[k][j]))
                    .collect()
            })
            .collect();
        Ok(IntMatrix { labels: self.labels.clone(), rows })
    }

    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix {
            labels: self.labels.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(|x| BigRational::from(x.clone())).collect()).collect(),
        }
    }

    /// Deletes row `r` and column `c`.
    pub fn minor_matrix(&self, r: usize, c: usize) -> IntMatrix {
        let keep = |k: usize, skip: usize| k != skip;
        let rows = self
            .rows
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep(i, r))
            .map(|(_, row)| row.iter().enumerate().filter(|&(j, _)| keep(j, c)).map(|(_, x)| x.clone()).collect())
            .collect();
        let labels = self.labels.iter().enumerate().filter(|&(i, _)| keep(i, r)).map(|(_, l)| l.clone()).collect();
        IntMatrix { labels, rows }
    }

    /// Leading principal submatrix of order `k`.
    pub fn leading(&self, k: usize) -> IntMatrix {
        IntMatrix {
            labels: self.labels[..k].to_vec(),
            rows: self.rows[..k].iter().map(|r| r[..k].to_vec()).collect(),
        }
    }

    /// Entries as decimal strings, row by row.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rows
                .iter()
                .map(|r| serde_json::Value::Array(r.iter().map(|x| x.to_string().into()).collect()))
                .collect(),
        )
    }
}

impl RatMatrix {
    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<BigRational>>) -> Result<Self> {
        check_square(&labels, &rows)?;
        Ok(RatMatrix { labels, rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.rows[i][j]
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        let n = self.dim();
        if other.dim() != n {
            return Err(Error::DimensionMismatch);
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(BigRational::zero(), |acc, k| acc + &self.rows[i][k] * &other.rows[k][j])
                    })
                    .collect()
            })
            .collect();
        Ok(RatMatrix { labels: self.labels.clone(), rows })
    }

    pub fn is_identity(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() }))
    }

    pub fn scaled(&self, factor: &BigRational) -> RatMatrix {
        RatMatrix {
            labels: self.labels.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(|x| x * factor).collect()).collect(),
        }
    }

    /// Entries as `"p/q"` strings.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rows
                .iter()
                .map(|r| serde_json::Value::Array(r.iter().map(|x| rat_json(x).into()).collect()))
                .collect(),
        )
    }
}

/// `"p/q"` in lowest terms with `q > 0`, also for integers.
pub fn rat_json(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `p` for integers, `p/q` otherwise.
pub fn rat_compact(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p.trim().parse().ok()?, q))
        }
        None => Some(BigRational::from(s.trim().parse::<BigInt>().ok()?)),
    }
}

/// Bareiss elimination with row swaps on zero pivots.
pub fn determinant(m: &IntMatrix) -> BigInt {
    let n = m.dim();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.rows.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Rational Gaussian elimination; an independent route to the determinant.
pub fn determinant_rational(m: &IntMatrix) -> BigInt {
    let n = m.dim();
    let mut a = m.to_rational().rows;
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let pivot = a[k][k].clone();
        det *= &pivot;
        for i in k + 1..n {
            let factor = &a[i][k] / &pivot;
            if factor.is_zero() {
                continue;
            }
            for j in k..n {
                let d = &factor * &a[k][j];
                a[i][j] -= d;
            }
        }
    }
    debug_assert!(det.is_integer());
    det.to_integer()
}

/// Leading principal minors of orders `1..=n`, computed by Bareiss without
/// row exchanges. Stops after the first zero minor, since elimination
/// cannot continue past it without pivoting.
pub fn leading_minors(m: &IntMatrix) -> Vec<BigInt> {
    let n = m.dim();
    let mut a = m.rows.clone();
    let mut prev = BigInt::one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(a[k][k].clone());
        if a[k][k].is_zero() {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    out
}

/// First leading principal minor of `m` that is not strictly positive, as
/// `(order, value)`.
pub fn first_nonpositive_leading_minor(m: &IntMatrix) -> Option<(usize, BigInt)> {
    leading_minors(m).into_iter().enumerate().find(|(_, d)| !d.is_positive()).map(|(i, d)| (i + 1, d))
}

/// Sylvester's criterion applied to `-I`.
pub fn is_negative_definite(i: &IntMatrix) -> Result<bool> {
    if !i.is_symmetric() {
        return Err(Error::NonSymmetric);
    }
    Ok(first_nonpositive_leading_minor(&i.negated()).is_none())
}

/// Like [`is_negative_definite`] but reports the failing minor of `-I`.
pub fn require_negative_definite(i: &IntMatrix) -> Result<()> {
    if !i.is_symmetric() {
        return Err(Error::NonSymmetric);
    }
    match first_nonpositive_leading_minor(&i.negated()) {
        None => Ok(()),
        Some((order, minor)) => Err(Error::NotNegativeDefinite { order, minor: minor.to_string() }),
    }
}

/// Fraction-free Gauss-Jordan on `[M | Id]`. Returns `(det, adj)` when `M`
/// is nonsingular.
fn bareiss_gauss_jordan(m: &IntMatrix) -> Option<(BigInt, Vec<Vec<BigInt>>)> {
    let n = m.dim();
    let mut a: Vec<Vec<BigInt>> = m
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let i = (k + 1..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, i);
            sign = !sign;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in 0..2 * n {
                if j == k {
                    continue;
                }
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    // Left block is d·Id with d = ±det(M); right block is d·M⁻¹.
    let adj = a
        .into_iter()
        .map(|row| row[n..].iter().map(|x| if sign { -x } else { x.clone() }).collect())
        .collect();
    let det = if sign { -prev } else { prev };
    Some((det, adj))
}

fn adjugate_by_cofactors(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let n = m.dim();
    if n == 1 {
        return vec![vec![BigInt::one()]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = determinant(&m.minor_matrix(j, i));
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        -c
                    }
                })
                .collect()
        })
        .collect()
}

/// The classical adjoint: `M · adj(M) = det(M) · Id`.
pub fn adjugate(m: &IntMatrix) -> IntMatrix {
    let rows = match m.dim() {
        0 => Vec::new(),
        _ => match bareiss_gauss_jordan(m) {
            Some((_, adj)) => adj,
            None => adjugate_by_cofactors(m),
        },
    };
    IntMatrix { labels: m.labels.clone(), rows }
}

/// Adjugate from cofactor expansion; quadratic in determinant calls and
/// used only as an oracle.
pub fn adjugate_cofactor(m: &IntMatrix) -> IntMatrix {
    IntMatrix { labels: m.labels.clone(), rows: adjugate_by_cofactors(m) }
}

pub fn inverse(m: &IntMatrix) -> Result<RatMatrix> {
    let (det, adj) = bareiss_gauss_jordan(m).ok_or(Error::SingularMatrix)?;
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let rows = adj
        .into_iter()
        .map(|r| r.into_iter().map(|x| BigRational::new(x, det.clone())).collect())
        .collect();
    Ok(RatMatrix { labels: m.labels.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn int(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn minus_i(g: &crate::dualgraph::WeightedDualGraph) -> IntMatrix {
        g.intersection_matrix().negated()
    }

    fn entry(m: &IntMatrix, labels: (&str, &str)) -> BigInt {
        let i = m.labels().iter().position(|l| l == labels.0).unwrap();
        let j = m.labels().iter().position(|l| l == labels.1).unwrap();
        m.get(i, j).clone()
    }

    #[test]
    fn golden_determinants() {
        assert_eq!(determinant(&minus_i(&fixtures::sixtree())), int(4));
        assert_eq!(determinant(&minus_i(&fixtures::cyclic())), int(56));
        assert_eq!(determinant(&minus_i(&fixtures::nonmetric())), int(480));
        assert_eq!(determinant(&IntMatrix::from_i64(&[vec![2]]).unwrap()), int(2));
    }

    #[test]
    fn x1_adjugate_matches_labels() {
        let adj = adjugate(&minus_i(&fixtures::cyclic()));
        for (pair, v) in [
            (("a", "l"), 114),
            (("a", "c"), 92),
            (("c", "b"), 56),
            (("l", "b"), 70),
            (("a", "b"), 98),
            (("l", "c"), 64),
        ] {
            assert_eq!(entry(&adj, pair), int(v), "{pair:?}");
        }
    }

    #[test]
    fn x3_adjugate_matches_labels() {
        let adj = adjugate(&minus_i(&fixtures::nonmetric()));
        for (pair, v) in [
            (("a", "l"), 30),
            (("a", "c"), 30),
            (("l", "b"), 30),
            (("c", "b"), 30),
            (("a", "b"), 12),
            (("l", "c"), 35),
        ] {
            assert_eq!(entry(&adj, pair), int(v), "{pair:?}");
        }
        let minors = leading_minors(&minus_i(&fixtures::nonmetric()));
        assert_eq!(minors, vec![int(5), int(25), int(115), int(480)]);
        assert!(is_negative_definite(&fixtures::nonmetric().intersection_matrix()).unwrap());
    }

    #[test]
    fn identity_adjugate() {
        assert_eq!(adjugate(&IntMatrix::identity(3)), IntMatrix::identity(3));
    }

    #[test]
    fn scalar_inverse() {
        let inv = inverse(&IntMatrix::from_i64(&[vec![2]]).unwrap()).unwrap();
        assert_eq!(inv.get(0, 0), &BigRational::new(int(1), int(2)));
        assert_eq!(inverse(&IntMatrix::from_i64(&[vec![0]]).unwrap()), Err(Error::SingularMatrix));
    }

    #[test]
    fn sixtree_inverse_entries() {
        let inv = inverse(&minus_i(&fixtures::sixtree())).unwrap();
        assert_eq!(inv.get(0, 1), &BigRational::from(int(6)));
        assert_eq!(inv.get(5, 5), &BigRational::from(int(1)));
    }

    #[test]
    fn definiteness() {
        assert!(is_negative_definite(&fixtures::sixtree().intersection_matrix()).unwrap());
        assert!(!is_negative_definite(&IntMatrix::from_i64(&[vec![0]]).unwrap()).unwrap());
        let asym = IntMatrix::from_i64(&[vec![-2, 1], vec![0, -2]]).unwrap();
        assert_eq!(is_negative_definite(&asym), Err(Error::NonSymmetric));
        let m = IntMatrix::from_i64(&[vec![-1, 1], vec![1, -1]]).unwrap();
        assert_eq!(
            require_negative_definite(&m),
            Err(Error::NotNegativeDefinite { order: 2, minor: "0".into() })
        );
    }

    #[test]
    fn singular_adjugate_uses_cofactors() {
        let m = IntMatrix::from_i64(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]).unwrap();
        assert_eq!(determinant(&m), int(0));
        assert_eq!(adjugate(&m), adjugate_cofactor(&m));
        let zero_pivot = IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(determinant(&zero_pivot), int(-1));
        assert_eq!(adjugate(&zero_pivot), adjugate_cofactor(&zero_pivot));
    }

    #[test]
    fn json_is_decimal_strings() {
        let m = IntMatrix::from_i64(&[vec![-3, 1], vec![1, 2]]).unwrap();
        assert_eq!(m.to_json(), serde_json::json!([["-3", "1"], ["1", "2"]]));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv.to_json()[0][0], "-2/7");
        assert_eq!(rat_json(&BigRational::from(int(4))), "4/1");
        assert_eq!(parse_rational(" -6/4 "), Some(BigRational::new(int(-3), int(2))));
        assert_eq!(parse_rational("1/0"), None);
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..6).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(-6i64..7, n), n)
                .prop_map(|rows| IntMatrix::from_i64(&rows).unwrap())
        })
    }

    proptest! {
        #[test]
        fn bareiss_agrees_with_rational_elimination(m in small_matrix()) {
            prop_assert_eq!(determinant(&m), determinant_rational(&m));
        }

        #[test]
        fn adjugate_identity(m in small_matrix()) {
            let adj = adjugate(&m);
            prop_assert_eq!(&adj, &adjugate_cofactor(&m));
            let prod = m.mul(&adj).unwrap();
            let det = determinant(&m);
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let want = if i == j { det.clone() } else { BigInt::zero() };
                    prop_assert_eq!(prod.get(i, j), &want);
                }
            }
        }

        #[test]
        fn inverse_is_adjugate_over_det(m in small_matrix()) {
            let det = determinant(&m);
            prop_assume!(!det.is_zero());
            let inv = inverse(&m).unwrap();
            prop_assert!(inv.mul(&m.to_rational()).unwrap().is_identity());
            let scaled = inv.scaled(&BigRational::from(det));
            prop_assert_eq!(scaled, adjugate(&m).to_rational());
        }

        #[test]
        fn negative_definite_implies_positive_det(m in small_matrix()) {
            let n = m.dim();
            // Symmetrize to satisfy the precondition.
            let rows: Vec<Vec<BigInt>> = (0..n)
                .map(|i| (0..n).map(|j| m.get(i.min(j), i.max(j)).clone()).collect())
                .collect();
            let s = IntMatrix::from_rows(m.labels().to_vec(), rows).unwrap();
            if is_negative_definite(&s).unwrap() {
                prop_assert!(determinant(&s.negated()).is_positive());
            }
        }
    }
}

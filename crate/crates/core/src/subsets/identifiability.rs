use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_EXACT_BOUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identifiability {
    pub identifiable: bool,
    /// Nonzero integer-valued vector whose every cyclic `q`-window sums to 0.
    pub witness: Option<Vec<f64>>,
}

/// Exact rank test of the `p x p` cyclic window incidence matrix.
///
/// Row `l` marks the members of window `l`. Full rational rank means the
/// window sums determine every coordinate; otherwise a kernel vector is
/// returned as a witness.
pub fn verify_identifiability(p: usize, q: usize, bound: usize) -> Result<Identifiability> {
    if q < 1 || q >= p {
        return Err(Error::BadCardinality(format!("q = {q} must satisfy 1 <= q < p = {p}")));
    }
    if p > bound {
        return Err(Error::TooLarge { p, bound });
    }
    let mut a: Vec<Vec<BigRational>> = (0..p)
        .map(|l| {
            (0..p)
                .map(|j| {
                    // j is in window l iff (j - l) mod p < q
                    if (j + p - l) % p < q {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();

    let pivots = reduce_to_rref(&mut a);
    if pivots.len() == p {
        return Ok(Identifiability {
            identifiable: true,
            witness: None,
        });
    }

    // Kernel vector from the first free column: x_free = 1, pivot vars solved from RREF.
    let free = (0..p).find(|c| !pivots.contains(c)).expect("rank deficient");
    let mut x = vec![BigRational::zero(); p];
    x[free] = BigRational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = -a[row][free].clone();
    }
    let lcm = x.iter().fold(BigInt::one(), |acc, v| num_integer_lcm(&acc, v.denom()));
    let witness = x
        .iter()
        .map(|v| {
            (v * BigRational::from_integer(lcm.clone()))
                .to_integer()
                .to_f64()
                .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(Identifiability {
        identifiable: false,
        witness: Some(witness),
    })
}

/// In-place reduced row echelon form; returns pivot columns by row.
fn reduce_to_rref(a: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let delta = &f * &a[r][k];
                    a[i][k] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn num_integer_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    let g = gcd_big(a.abs(), b.abs());
    (a * b).abs() / g
}

fn gcd_big(mut a: BigInt, mut b: BigInt) -> BigInt {
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

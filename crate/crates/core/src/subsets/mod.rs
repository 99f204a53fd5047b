//! Pooling designs: the circular window family over `{1..p}`, random
//! extension subsets, and an exact identifiability check for small `p`.
//!
//! With `gcd(p, q) = 1`, the `p` cyclic windows `{l, .., l+q-1}` (indices
//! past `p` wrap around) have window sums that vanish only for the zero
//! vector, so testing all window means is equivalent to testing all
//! coordinate means. [`verify_identifiability`] makes that statement
//! checkable by exact rational rank computation.

mod identifiability;

pub use identifiability::{verify_identifiability, Identifiability, DEFAULT_EXACT_BOUND};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSpec;

/// `d` index subsets of `{1..p}`, each of cardinality `q`, stored 1-based
/// and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily", into = "RawFamily")]
pub struct SubsetFamily {
    p: usize,
    q: usize,
    members: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawFamily {
    p: usize,
    q: usize,
    d: usize,
    members: Vec<Vec<usize>>,
}

impl TryFrom<RawFamily> for SubsetFamily {
    type Error = Error;
    fn try_from(raw: RawFamily) -> Result<Self> {
        if raw.d != raw.members.len() {
            return Err(Error::DimensionMismatch(format!(
                "d = {} but {} members listed",
                raw.d,
                raw.members.len()
            )));
        }
        SubsetFamily::from_members(raw.p, raw.q, raw.members)
    }
}

impl From<SubsetFamily> for RawFamily {
    fn from(f: SubsetFamily) -> Self {
        RawFamily {
            p: f.p,
            q: f.q,
            d: f.members.len(),
            members: f.members,
        }
    }
}

impl SubsetFamily {
    /// Validates an arbitrary family: every member must hold exactly `q`
    /// distinct indices from `1..=p`. Members are sorted on the way in.
    pub fn from_members(p: usize, q: usize, members: Vec<Vec<usize>>) -> Result<Self> {
        if q < 1 || q > p {
            return Err(Error::BadCardinality(format!("q = {q} must satisfy 1 <= q <= p = {p}")));
        }
        if members.is_empty() {
            return Err(Error::BadCardinality("family needs at least one subset".into()));
        }
        let members = members
            .into_iter()
            .enumerate()
            .map(|(l, m)| validate_member(p, q, l, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { p, q, members })
    }

    /// The family `{1}, {2}, .., {p}`: pooling reduces to the raw columns.
    pub fn singletons(p: usize) -> Result<Self> {
        Self::from_members(p, 1, (1..=p).map(|j| vec![j]).collect())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.members.len()
    }

    /// 1-based member lists.
    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn validate_member(p: usize, q: usize, l: usize, mut m: Vec<usize>) -> Result<Vec<usize>> {
    m.sort_unstable();
    m.dedup();
    if m.len() != q {
        return Err(Error::BadCardinality(format!(
            "subset {} has {} distinct indices, expected {q}",
            l + 1,
            m.len()
        )));
    }
    if m[0] < 1 || m[q - 1] > p {
        return Err(Error::BadCardinality(format!(
            "subset {} has an index outside 1..={p}",
            l + 1
        )));
    }
    Ok(m)
}

pub fn gcd(a: usize, b: usize) -> usize {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_design(p: usize, q: usize) -> Result<()> {
    if q < 1 || q >= p {
        return Err(Error::BadCardinality(format!("q = {q} must satisfy 1 <= q < p = {p}")));
    }
    let g = gcd(p, q);
    if g != 1 {
        return Err(Error::NotCoprime { p, q, gcd: g });
    }
    Ok(())
}

/// Closest `q' != q` in `1..p` coprime with `p`, preferring the smaller one
/// on ties. Used to suggest a fix when a user picks a bad `q`.
pub fn nearest_coprime(p: usize, q: usize) -> Option<usize> {
    (1..p).filter(|&c| gcd(p, c) == 1).min_by_key(|&c| (c.abs_diff(q), c))
}

fn windows(p: usize, q: usize) -> Vec<Vec<usize>> {
    (1..=p)
        .map(|l| {
            let mut m: Vec<usize> = (l..l + q).map(|i| if i > p { i - p } else { i }).collect();
            m.sort_unstable();
            m
        })
        .collect()
}

/// The `p` cyclic windows `S_l = {l, .., l+q-1}`, wrapping `i > p` to `i - p`.
pub fn circular_family(p: usize, q: usize) -> Result<SubsetFamily> {
    check_design(p, q)?;
    Ok(SubsetFamily {
        p,
        q,
        members: windows(p, q),
    })
}

/// `count` subsets, each `q` indices drawn uniformly without replacement
/// from `{1..p}`. Subsets are not deduplicated against each other.
pub fn random_extension(p: usize, q: usize, count: usize, rng: RngSpec) -> Result<Vec<Vec<usize>>> {
    if q < 1 || q > p {
        return Err(Error::BadCardinality(format!("q = {q} must satisfy 1 <= q <= p = {p}")));
    }
    let mut g = rng.generator();
    Ok((0..count)
        .map(|_| {
            let mut m: Vec<usize> = index::sample(&mut g, p, q).into_iter().map(|i| i + 1).collect();
            m.sort_unstable();
            m
        })
        .collect())
}

/// Circular windows followed by `d - p` random subsets.
pub fn build_family(p: usize, q: usize, d: usize, rng: RngSpec) -> Result<SubsetFamily> {
    check_design(p, q)?;
    if d < p {
        return Err(Error::DTooSmall { p, d });
    }
    let mut members = windows(p, q);
    members.extend(random_extension(p, q, d - p, rng)?);
    Ok(SubsetFamily { p, q, members })
}

/// Circular windows followed by caller-chosen subsets. The extra subsets are
/// checked for size and index range only.
pub fn build_family_with(p: usize, q: usize, extra: Vec<Vec<usize>>) -> Result<SubsetFamily> {
    check_design(p, q)?;
    let mut members = windows(p, q);
    for (k, m) in extra.into_iter().enumerate() {
        members.push(validate_member(p, q, p + k, m)?);
    }
    Ok(SubsetFamily { p, q, members })
}

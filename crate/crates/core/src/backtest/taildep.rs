//! Empirical upper tail dependence.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Upper-tail membership per column: `F_hat(z) > 1 - u`, where
/// `F_hat(z) = #{z_i <= z} / n`.
fn tail_sets(z: &DataMatrix, u: f64) -> Vec<Vec<bool>> {
    let n = z.n_rows();
    let cutoff = n as f64 * u;
    (0..z.n_cols())
        .map(|j| {
            let col = z.column(j);
            let mut sorted = col.clone();
            sorted.sort_by(f64::total_cmp);
            col.iter()
                .map(|&v| {
                    let le = sorted.partition_point(|&s| s <= v);
                    ((n - le) as f64) < cutoff
                })
                .collect()
        })
        .collect()
}

/// Symmetric matrix of `lambda_jk = #{i : both in upper u-tail} / (n u)`.
pub fn tail_dependence(zhat: &DataMatrix, u: f64) -> Result<Vec<Vec<f64>>> {
    let n = zhat.n_rows();
    if !(u > 0.0 && u < 0.5) || (n as f64) * u < 1.0 {
        return Err(Error::BadThreshold(u));
    }
    let tails = tail_sets(zhat, u);
    let p = tails.len();
    let norm = n as f64 * u;
    let mut out = vec![vec![0.0; p]; p];
    for a in 0..p {
        for b in a..p {
            let joint = tails[a].iter().zip(&tails[b]).filter(|(x, y)| **x && **y).count();
            let lambda = joint as f64 / norm;
            out[a][b] = lambda;
            out[b][a] = lambda;
        }
    }
    Ok(out)
}

/// Heatmap-ready CSV: a header of identifiers and one labelled row per asset.
///
/// With `groups`, rows and columns are reordered by group (stable within a
/// group) and a `group` column follows the identifier.
pub fn tail_dependence_csv(ids: &[String], lambda: &[Vec<f64>], groups: Option<&[String]>) -> Result<String> {
    let p = ids.len();
    if lambda.len() != p || lambda.iter().any(|r| r.len() != p) {
        return Err(Error::DimensionMismatch(format!(
            "{p} identifiers for a {}-row matrix",
            lambda.len()
        )));
    }
    let mut order: Vec<usize> = (0..p).collect();
    if let Some(g) = groups {
        if g.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} group labels for {p} assets",
                g.len()
            )));
        }
        order.sort_by(|&a, &b| g[a].cmp(&g[b]));
    }
    let mut out = String::from("id");
    if groups.is_some() {
        out.push_str(",group");
    }
    for &j in &order {
        out.push(',');
        out.push_str(&ids[j]);
    }
    out.push('\n');
    for &i in &order {
        out.push_str(&ids[i]);
        if let Some(g) = groups {
            out.push(',');
            out.push_str(&g[i]);
        }
        for &j in &order {
            out.push_str(&format!(",{}", lambda[i][j]));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn duplicated_column_is_fully_dependent() {
        let mut g = RngSpec::new(2).generator();
        let c: Vec<f64> = (0..500).map(|_| g.sample(StandardNormal)).collect();
        let z = DataMatrix::from_columns(&[c.clone(), c]).unwrap();
        let l = tail_dependence(&z, 0.01).unwrap();
        assert_eq!(l[0][1], 1.0);
        assert_eq!(l[0][0], 1.0);
    }

    #[test]
    fn independent_columns() {
        let mut g = RngSpec::new(3).generator();
        let cols: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..100_000).map(|_| g.sample(StandardNormal)).collect())
            .collect();
        let l = tail_dependence(&DataMatrix::from_columns(&cols).unwrap(), 0.01).unwrap();
        assert!((l[0][1] - 0.01).abs() < 0.005, "{}", l[0][1]);
        assert_eq!(l[0][1], l[1][0]);
    }

    #[test]
    fn threshold_guards() {
        let z = DataMatrix::from_columns(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(tail_dependence(&z, 0.01).unwrap_err(), Error::BadThreshold(0.01));
        assert!(tail_dependence(&z, 0.5).is_err());
        // n u = 1.02, so the top two ranks form the tail
        assert_eq!(tail_dependence(&z, 0.34).unwrap()[0][0], 2.0 / (3.0 * 0.34));
    }

    #[test]
    fn grouped_csv() {
        let ids: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let groups: Vec<String> = ["y", "x", "y"].iter().map(|s| s.to_string()).collect();
        let l = vec![vec![1.0, 0.2, 0.3], vec![0.2, 1.0, 0.4], vec![0.3, 0.4, 1.0]];
        let csv = tail_dependence_csv(&ids, &l, Some(&groups)).unwrap();
        assert_eq!(csv, "id,group,b,a,c\nb,x,1,0.2,0.4\na,y,0.2,1,0.3\nc,y,0.4,0.3,1\n");
        let plain = tail_dependence_csv(&ids, &l, None).unwrap();
        assert!(plain.starts_with("id,a,b,c\na,1,0.2,0.3\n"));
    }
}

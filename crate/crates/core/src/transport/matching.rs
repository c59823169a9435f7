use num_complex::Complex64;
use super::TransportError;

/// Eigenvalues with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenMultiset {
    values: Vec<Complex64>,
}

impl EigenMultiset {
    pub fn new(values: Vec<Complex64>) -> Result<Self, TransportError> {
        if values.is_empty() {
            return Err(TransportError::Empty);
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self, TransportError> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Optimal matching (bottleneck) distance between equal-size multisets.
pub fn matching_distance(a: &EigenMultiset, b: &EigenMultiset) -> Result<f64, TransportError> {
    if a.len() != b.len() {
        return Err(TransportError::SizeMismatch(a.len(), b.len()));
    }
    let cost: Vec<Vec<f64>> = a
        .values
        .iter()
        .map(|x| b.values.iter().map(|y| (x - y).norm()).collect())
        .collect();
    Ok(bottleneck_assignment(&cost).0)
}

/// `max_i |a_(i) - b_(i)|` after sorting both lists.
pub fn sorted_matching_distance(a: &[f64], b: &[f64]) -> Result<f64, TransportError> {
    if a.len() != b.len() {
        return Err(TransportError::SizeMismatch(a.len(), b.len()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Bottleneck assignment on a square cost matrix: the smallest threshold `t`
/// among the entries such that the bipartite graph `{cost[i][j] <= t}` has a
/// perfect matching, found by binary search over the sorted distinct entries.
/// Returns the value and a row-to-column assignment attaining it.
pub fn bottleneck_assignment(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut thresholds: Vec<f64> = cost.iter().flatten().copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let (mut lo, mut hi) = (0, thresholds.len() - 1);
    let mut best = perfect_matching(n, |i, j| cost[i][j] <= thresholds[hi])
        .expect("the complete bipartite graph has a perfect matching");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match perfect_matching(n, |i, j| cost[i][j] <= thresholds[mid]) {
            Some(m) => {
                best = m;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    (thresholds[lo], best)
}

/// Kuhn's augmenting-path algorithm; `Some(assignment)` iff a perfect
/// matching exists.
fn perfect_matching(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| allowed(i, j)).collect())
        .collect();
    let mut match_col: Vec<Option<usize>> = vec![None; n];
    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(row, &adj, &mut seen, &mut match_col) {
            return None;
        }
    }
    let mut assignment = vec![0; n];
    for (col, row) in match_col.into_iter().enumerate() {
        assignment[row.expect("perfect matching covers every column")] = col;
    }
    Some(assignment)
}

fn augment(row: usize, adj: &[Vec<usize>], seen: &mut [bool], match_col: &mut [Option<usize>]) -> bool {
    for &col in &adj[row] {
        if seen[col] {
            continue;
        }
        seen[col] = true;
        if match_col[col].is_none_or(|other| augment(other, adj, seen, match_col)) {
            match_col[col] = Some(row);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(xs: &[f64]) -> EigenMultiset {
        EigenMultiset::from_real(xs).unwrap()
    }

    #[test]
    fn identical_multisets() {
        let a = ms(&[3.0, -1.0, 2.5]);
        assert_eq!(matching_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn two_point_example() {
        assert_eq!(matching_distance(&ms(&[0.0, 1.0]), &ms(&[0.5, 0.5])).unwrap(), 0.5);
    }

    #[test]
    fn size_mismatch() {
        assert_eq!(
            matching_distance(&ms(&[0.0]), &ms(&[0.0, 1.0])),
            Err(TransportError::SizeMismatch(1, 2))
        );
        assert_eq!(EigenMultiset::new(vec![]), Err(TransportError::Empty));
    }

    #[test]
    fn assignment_attains_value() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let (v, assignment) = bottleneck_assignment(&cost);
        assert_eq!(v, 2.0);
        let attained = (0..3).map(|i| cost[i][assignment[i]]).fold(0.0, f64::max);
        assert_eq!(attained, v);
        let mut cols = assignment.clone();
        cols.sort();
        assert_eq!(cols, vec![0, 1, 2]);
    }

    #[test]
    fn complex_points() {
        let a = EigenMultiset::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        let b = EigenMultiset::new(vec![Complex64::new(0.0, -1.0), Complex64::new(-1.0, 0.0)]).unwrap();
        let d = matching_distance(&a, &b).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }
}

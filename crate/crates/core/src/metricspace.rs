//! Pairwise distances, k-nearest-neighbour graphs and all-pairs shortest paths.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::datasets::Point;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    /// Euclidean distance between flattened images.
    Frobenius,
    /// Shortest path length through a k-NN graph; may be `+∞`.
    Geodesic,
}

/// Symmetric, zero-diagonal, nonnegative distance matrix. Geodesic matrices
/// use `f64::INFINITY` for pairs in different connected components.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    d: DMatrix<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    /// Wraps an existing matrix after checking the distance-matrix invariants.
    pub fn from_matrix(d: DMatrix<f64>, metric: Metric) -> Result<Self> {
        if !d.is_square() {
            return Err(Error::invalid(format!(
                "distance matrix must be square, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        let n = d.nrows();
        for i in 0..n {
            if d[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let v = d[(i, j)];
                if v.is_nan() || v < 0.0 {
                    return Err(Error::invalid(format!("bad distance {v} at ({i}, {j})")));
                }
                if v != d[(j, i)] {
                    return Err(Error::invalid(format!("asymmetric at ({i}, {j})")));
                }
                if v.is_infinite() && metric != Metric::Geodesic {
                    return Err(Error::invalid(format!(
                        "infinite {metric:?} distance at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { d, metric })
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.d
    }

    /// Off-diagonal entries with `i < j`.
    pub fn upper_entries(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n();
        (0..n).flat_map(move |j| (0..j).map(move |i| self.d[(i, j)]))
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_dims(points: &[Point]) -> Result<usize> {
    let first = points.first().ok_or_else(|| Error::invalid("no points"))?;
    let dim = first.dim();
    if let Some(i) = points.iter().position(|p| p.dim() != dim) {
        return Err(Error::invalid(format!(
            "point {i} has dimension {}, expected {dim}",
            points[i].dim()
        )));
    }
    Ok(dim)
}

/// Euclidean distances between all pairs of points.
pub fn pairwise_distances(points: &[Point]) -> Result<DistanceMatrix> {
    pairwise_distances_tagged(points, Metric::Euclidean)
}

/// Same as [`pairwise_distances`] with an explicit tag (`Frobenius` for images).
pub fn pairwise_distances_tagged(points: &[Point], metric: Metric) -> Result<DistanceMatrix> {
    if metric == Metric::Geodesic {
        return Err(Error::invalid(
            "geodesic distances come from floyd_warshall",
        ));
    }
    check_dims(points)?;
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j > i {
                        euclidean(points[i].coords(), points[j].coords())
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for j in i + 1..n {
            d[(i, j)] = row[j];
            d[(j, i)] = row[j];
        }
    }
    Ok(DistanceMatrix { d, metric })
}

/// Euclidean distances from each query to each reference point (`q x r`).
pub fn cross_distances(queries: &[Point], refs: &[Point]) -> Result<DMatrix<f64>> {
    let dim = check_dims(refs)?;
    if let Some(i) = queries.iter().position(|p| p.dim() != dim) {
        return Err(Error::invalid(format!(
            "query {i} has dimension {}, expected {dim}",
            queries[i].dim()
        )));
    }
    let rows: Vec<Vec<f64>> = queries
        .par_iter()
        .map(|q| {
            refs.iter()
                .map(|r| euclidean(q.coords(), r.coords()))
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(queries.len(), refs.len(), |i, j| {
        rows[i][j]
    }))
}

/// Weighted k-NN graph. Non-edges carry `+∞`; the diagonal is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnGraph {
    adjacency: DMatrix<f64>,
    k: usize,
}

impl KnnGraph {
    /// Builds a graph directly from an adjacency matrix (`+∞` = no edge).
    /// Used for hand-made graphs; `k` is recorded as given.
    pub fn from_adjacency(adjacency: DMatrix<f64>, k: usize) -> Result<Self> {
        let checked = DistanceMatrix::from_matrix(adjacency, Metric::Geodesic)?;
        Ok(KnnGraph {
            adjacency: checked.into_matrix(),
            k,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.adjacency[(i, j)].is_finite()
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .map(|j| (0..j).filter(|&i| self.has_edge(i, j)).count())
            .sum()
    }
}

/// Keeps each point's `k` nearest neighbours (ties to the lower index) and
/// symmetrizes by union: an edge exists if either endpoint selected it.
pub fn knn_graph(d: &DistanceMatrix, k: usize) -> Result<KnnGraph> {
    let n = d.n();
    if k < 1 || k + 1 > n {
        return Err(Error::invalid(format!(
            "k must lie in 1..={}, got {k}",
            n.saturating_sub(1)
        )));
    }
    let mut adjacency = DMatrix::from_element(n, n, f64::INFINITY);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        adjacency[(i, i)] = 0.0;
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| d.get(i, a).total_cmp(&d.get(i, b)).then(a.cmp(&b)));
        for &j in &order[..k] {
            let w = d.get(i, j);
            adjacency[(i, j)] = w;
            adjacency[(j, i)] = w;
        }
    }
    Ok(KnnGraph { adjacency, k })
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.extend(m.row(i).iter().copied());
    }
    out
}

fn geodesic_from_row_major(n: usize, buf: &[f64]) -> DistanceMatrix {
    DistanceMatrix {
        d: DMatrix::from_row_slice(n, n, buf),
        metric: Metric::Geodesic,
    }
}

/// Classic triple-loop Floyd–Warshall over every intermediate vertex.
pub fn floyd_warshall(g: &KnnGraph) -> DistanceMatrix {
    let n = g.n();
    let mut dist = row_major(g.adjacency());
    for mid in 0..n {
        for u in 0..n {
            let du = dist[u * n + mid];
            if du == f64::INFINITY {
                continue;
            }
            for v in 0..n {
                let cand = du + dist[mid * n + v];
                if cand < dist[u * n + v] {
                    dist[u * n + v] = cand;
                }
            }
        }
    }
    geodesic_from_row_major(n, &dist)
}

/// Whole-matrix relaxation: for each of the first `passes` intermediates `i`,
/// `Dist = min(Dist, Dist[:, i] ⊕ Dist[i, :])`. Rows are relaxed in parallel.
///
/// With `passes == n` this is exactly [`floyd_warshall`]. Smaller values give
/// the truncated variant that only routes through vertices `0..passes`.
pub fn floyd_warshall_matrix_form(g: &KnnGraph, passes: usize) -> Result<DistanceMatrix> {
    let n = g.n();
    if passes < 1 || passes > n {
        return Err(Error::invalid(format!(
            "passes must lie in 1..={n}, got {passes}"
        )));
    }
    let mut dist = row_major(g.adjacency());
    let mut pivot_row = vec![0.0; n];
    for mid in 0..passes {
        pivot_row.copy_from_slice(&dist[mid * n..(mid + 1) * n]);
        let pivot_row = &pivot_row;
        dist.par_chunks_mut(n).for_each(|row| {
            let du = row[mid];
            if du == f64::INFINITY {
                return;
            }
            for (cur, &dv) in row.iter_mut().zip(pivot_row) {
                let cand = du + dv;
                if cand < *cur {
                    *cur = cand;
                }
            }
        });
    }
    Ok(geodesic_from_row_major(n, &dist))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<Point> {
        v.iter().map(|c| Point::new(c.to_vec())).collect()
    }

    fn path_graph(weights: &[f64]) -> KnnGraph {
        let n = weights.len() + 1;
        let mut a = DMatrix::from_element(n, n, f64::INFINITY);
        for i in 0..n {
            a[(i, i)] = 0.0;
        }
        for (i, &w) in weights.iter().enumerate() {
            a[(i, i + 1)] = w;
            a[(i + 1, i)] = w;
        }
        KnnGraph::from_adjacency(a, 1).unwrap()
    }

    #[test]
    fn three_four_five() {
        let d = pairwise_distances(&pts(&[&[0.0, 0.0], &[3.0, 4.0]])).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 0), 5.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn identical_points_give_zero_matrix() {
        let d = pairwise_distances(&pts(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]])).unwrap();
        assert!(d.matrix().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn frobenius_of_ones_vs_zeros_image() {
        let imgs = vec![Point::new(vec![1.0; 784]), Point::new(vec![0.0; 784])];
        let d = pairwise_distances_tagged(&imgs, Metric::Frobenius).unwrap();
        assert_eq!(d.get(0, 1), 28.0);
        assert_eq!(d.metric(), Metric::Frobenius);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(pairwise_distances(&pts(&[&[0.0], &[0.0, 1.0]])).is_err());
        assert!(pairwise_distances(&[]).is_err());
    }

    #[test]
    fn knn_full_k_is_complete() {
        let d = pairwise_distances(&pts(&[&[0.0], &[1.0], &[3.0], &[7.0]])).unwrap();
        let g = knn_graph(&d, 3).unwrap();
        assert_eq!(g.adjacency(), d.matrix());
    }

    #[test]
    fn knn_union_adds_far_point_edge() {
        // Nearest neighbours: 0->1, 1->0 (tie with 2 broken low), 2->1, 3->2.
        let d = pairwise_distances(&pts(&[&[0.0], &[1.0], &[2.0], &[10.0]])).unwrap();
        let g = knn_graph(&d, 1).unwrap();
        assert!(g.has_edge(0, 1));
        assert!(g.has_edge(1, 2));
        assert!(g.has_edge(2, 3), "edge selected by point 3 only");
        assert_eq!(g.adjacency()[(3, 2)], 8.0);
        assert_eq!(g.adjacency()[(2, 3)], 8.0);
        assert!(!g.has_edge(0, 2));
        assert!(!g.has_edge(1, 3));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn knn_k_range() {
        let d = pairwise_distances(&pts(&[&[0.0], &[1.0], &[2.0]])).unwrap();
        assert!(knn_graph(&d, 0).is_err());
        assert!(knn_graph(&d, 3).is_err());
        assert!(knn_graph(&d, 2).is_ok());
    }

    #[test]
    fn unit_path_geodesic() {
        let g = path_graph(&[1.0, 1.0]);
        let d = floyd_warshall(&g);
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.metric(), Metric::Geodesic);
        let m = floyd_warshall_matrix_form(&g, 3).unwrap();
        assert_eq!(m, d);
    }

    #[test]
    fn disconnected_components_stay_infinite() {
        let mut a = DMatrix::from_element(4, 4, f64::INFINITY);
        for i in 0..4 {
            a[(i, i)] = 0.0;
        }
        a[(0, 1)] = 1.0;
        a[(1, 0)] = 1.0;
        a[(2, 3)] = 2.0;
        a[(3, 2)] = 2.0;
        let d = floyd_warshall(&KnnGraph::from_adjacency(a, 1).unwrap());
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(2, 3), 2.0);
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert_eq!(d.get(i, j), f64::INFINITY);
        }
    }

    #[test]
    fn single_pass_routes_only_through_vertex_zero() {
        // Star-ish graph: 1-0-2 and 2-3. By hand, one pass through vertex 0
        // links 1 and 2 (1 + 2 = 3) but leaves 1-3 and 0-3 unreachable,
        // since those paths need vertex 2 as an intermediate.
        let inf = f64::INFINITY;
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 2.0, inf, //
                1.0, 0.0, inf, inf, //
                2.0, inf, 0.0, 4.0, //
                inf, inf, 4.0, 0.0,
            ],
        );
        let g = KnnGraph::from_adjacency(a, 1).unwrap();
        let one = floyd_warshall_matrix_form(&g, 1).unwrap();
        assert_eq!(one.get(1, 2), 3.0);
        assert_eq!(one.get(2, 1), 3.0);
        assert_eq!(one.get(0, 3), inf);
        assert_eq!(one.get(1, 3), inf);
        let full = floyd_warshall_matrix_form(&g, 4).unwrap();
        assert_eq!(full.get(0, 3), 6.0);
        assert_eq!(full.get(1, 3), 7.0);
        assert_eq!(full, floyd_warshall(&g));
    }

    #[test]
    fn passes_out_of_range() {
        let g = path_graph(&[1.0, 1.0]);
        assert!(floyd_warshall_matrix_form(&g, 0).is_err());
        assert!(floyd_warshall_matrix_form(&g, 4).is_err());
    }

    #[test]
    fn from_matrix_validates() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(DistanceMatrix::from_matrix(bad, Metric::Euclidean).is_err());
        let inf = DMatrix::from_row_slice(2, 2, &[0.0, f64::INFINITY, f64::INFINITY, 0.0]);
        assert!(DistanceMatrix::from_matrix(inf.clone(), Metric::Euclidean).is_err());
        assert!(DistanceMatrix::from_matrix(inf, Metric::Geodesic).is_ok());
    }
}

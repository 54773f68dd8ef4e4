use std::io::Write;
use std::str::FromStr;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Geometric;

use crate::error::{Error, Result};
use crate::lattice::Aggregate;

/// Support and parameter of the geometric edge weights.
///
/// Both conventions live on `{0, 1, 2, ...}`. `ParameterHalf` has success
/// probability 1/2 (mean 1); `MeanHalf` has success probability 2/3 (mean 1/2).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GeomConvention {
    #[default]
    ParameterHalf,
    MeanHalf,
}

impl GeomConvention {
    pub fn success_probability(self) -> f64 {
        match self {
            GeomConvention::ParameterHalf => 0.5,
            GeomConvention::MeanHalf => 2.0 / 3.0,
        }
    }

    pub fn mean(self) -> f64 {
        let p = self.success_probability();
        (1.0 - p) / p
    }

    pub fn variance(self) -> f64 {
        let p = self.success_probability();
        (1.0 - p) / (p * p)
    }

    pub fn pmf(self, k: u64) -> f64 {
        let p = self.success_probability();
        (1.0 - p).powi(k as i32) * p
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GeomConvention::ParameterHalf => "parameter-half",
            GeomConvention::MeanHalf => "mean-half",
        }
    }
}

impl FromStr for GeomConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parameter-half" => Ok(GeomConvention::ParameterHalf),
            "mean-half" => Ok(GeomConvention::MeanHalf),
            other => Err(Error::Config(format!("unknown geometric convention {other:?} (parameter-half|mean-half)"))),
        }
    }
}

/// Rooted forest over particle indices. Vertex `i` is the `i`-th site of the
/// aggregate it was grown with; roots are the initial sites, every later
/// vertex hangs off the site its particle started from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenealogyForest {
    parent: Vec<Option<u32>>,
    depth: Vec<u32>,
    /// Weight of the edge to the parent, per vertex (0 for roots).
    weights: Option<Vec<u64>>,
}

impl GenealogyForest {
    pub fn with_roots(n: usize) -> Self {
        GenealogyForest {
            parent: vec![None; n],
            depth: vec![0; n],
            weights: None,
        }
    }

    /// Appends a vertex below `parent` and returns its index.
    pub fn push_child(&mut self, parent: usize) -> usize {
        assert!(parent < self.parent.len(), "parent {parent} does not exist");
        assert!(self.weights.is_none(), "cannot grow a weighted forest");
        let idx = self.parent.len();
        self.parent.push(Some(parent as u32));
        self.depth.push(self.depth[parent] + 1);
        idx
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v].map(|p| p as usize)
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn n_roots(&self) -> usize {
        self.parent.iter().filter(|p| p.is_none()).count()
    }

    pub fn n_edges(&self) -> usize {
        self.len() - self.n_roots()
    }

    /// Number of children of `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.parent.iter().filter(|p| **p == Some(v as u32)).count()
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn edge_weight(&self, v: usize) -> Option<u64> {
        self.parent[v]?;
        self.weights.as_ref().map(|w| w[v])
    }

    pub fn has_weights(&self) -> bool {
        self.weights.is_some()
    }

    /// Draws an independent geometric weight for every edge, in vertex order.
    pub fn assign_edge_weights<R: Rng + ?Sized>(&mut self, convention: GeomConvention, rng: &mut R) -> Result<()> {
        if self.weights.is_some() {
            return Err(Error::InvalidArgument("edge weights already assigned".into()));
        }
        let geom = Geometric::new(convention.success_probability()).expect("valid probability");
        let w = self.parent.iter().map(|p| if p.is_some() { geom.sample(rng) } else { 0 }).collect();
        self.weights = Some(w);
        Ok(())
    }

    /// Sets explicit weights (per vertex, index-aligned; root entries ignored).
    pub fn set_edge_weights(&mut self, weights: Vec<u64>) -> Result<()> {
        if weights.len() != self.len() {
            return Err(Error::InvalidArgument(format!("expected {} weights, got {}", self.len(), weights.len())));
        }
        let w = weights.into_iter().zip(&self.parent).map(|(w, p)| if p.is_some() { w } else { 0 }).collect();
        self.weights = Some(w);
        Ok(())
    }

    /// Sum of edge weights on the root-to-`v` path, for every `v`.
    pub fn reaching_times(&self) -> Result<Vec<u64>> {
        if self.n_edges() == 0 {
            return Ok(vec![0; self.len()]);
        }
        let w = self
            .weights
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("edge weights not assigned".into()))?;
        // parents always precede children
        let mut t = vec![0u64; self.len()];
        for v in 0..self.len() {
            if let Some(p) = self.parent[v] {
                t[v] = t[p as usize] + w[v];
            }
        }
        Ok(t)
    }

    pub fn max_reaching_time(&self) -> Result<u64> {
        Ok(self.reaching_times()?.into_iter().max().unwrap_or(0))
    }

    /// CSV dump: `index,parent_index,site_coords,edge_weight,depth,reaching_time`.
    /// Indices are 1-based; roots have an empty parent and edge weight.
    pub fn write_csv<W: Write>(&self, agg: &Aggregate, mut out: W) -> Result<()> {
        if agg.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "forest has {} vertices but aggregate has {} sites",
                self.len(),
                agg.len()
            )));
        }
        let reach = if self.weights.is_some() || self.n_edges() == 0 {
            Some(self.reaching_times()?)
        } else {
            None
        };
        writeln!(out, "index,parent_index,site_coords,edge_weight,depth,reaching_time")?;
        for v in 0..self.len() {
            let coords: Vec<String> = agg.site(v).coords(agg.dim()).iter().map(|c| c.to_string()).collect();
            let parent = self.parent[v].map(|p| (p + 1).to_string()).unwrap_or_default();
            let weight = self.edge_weight(v).map(|w| w.to_string()).unwrap_or_default();
            let reach = reach.as_ref().map(|r| r[v].to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{},{}", v + 1, parent, coords.join(" "), weight, self.depth[v], reach)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn chain(weights: &[u64]) -> GenealogyForest {
        let mut f = GenealogyForest::with_roots(1);
        for i in 0..weights.len() {
            f.push_child(i);
        }
        let mut w = vec![0];
        w.extend_from_slice(weights);
        f.set_edge_weights(w).unwrap();
        f
    }

    #[test]
    fn reaching_time_examples() {
        let f = chain(&[1, 0, 2]);
        assert_eq!(f.reaching_times().unwrap(), vec![0, 1, 1, 3]);
        assert_eq!(f.max_reaching_time().unwrap(), 3);
        assert_eq!(f.depth(3), 3);

        let mut star = GenealogyForest::with_roots(1);
        for _ in 0..3 {
            star.push_child(0);
        }
        star.set_edge_weights(vec![9, 0, 3, 1]).unwrap();
        assert_eq!(star.max_reaching_time().unwrap(), 3);
        assert_eq!(star.degree(0), 3);
        assert_eq!(star.edge_weight(0), None);

        let roots = GenealogyForest::with_roots(4);
        assert_eq!(roots.max_reaching_time().unwrap(), 0);
    }

    #[test]
    fn unassigned_weights_error() {
        let mut f = GenealogyForest::with_roots(1);
        f.push_child(0);
        assert!(f.reaching_times().is_err());
        let mut rng = RngStream::new(1, 0);
        f.assign_edge_weights(GeomConvention::ParameterHalf, &mut rng).unwrap();
        assert!(f.assign_edge_weights(GeomConvention::ParameterHalf, &mut rng).is_err());
    }

    #[test]
    fn empty_forest_is_noop() {
        let mut f = GenealogyForest::default();
        f.assign_edge_weights(GeomConvention::ParameterHalf, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(f.max_reaching_time().unwrap(), 0);
    }

    #[test]
    fn geometric_pmf_and_mean() {
        let conv = GeomConvention::ParameterHalf;
        assert_eq!(conv.pmf(0), 0.5);
        assert_eq!(conv.pmf(1), 0.25);
        assert_eq!(conv.pmf(2), 0.125);
        assert!((GeomConvention::MeanHalf.mean() - 0.5).abs() < 1e-15);

        for conv in [GeomConvention::ParameterHalf, GeomConvention::MeanHalf] {
            let n = 100_000;
            let mut f = GenealogyForest::with_roots(1);
            for _ in 0..n {
                f.push_child(0);
            }
            f.assign_edge_weights(conv, &mut RngStream::new(9, 0)).unwrap();
            let w: Vec<u64> = (1..=n).map(|v| f.edge_weight(v).unwrap()).collect();
            let mean = w.iter().sum::<u64>() as f64 / n as f64;
            let se = (conv.variance() / n as f64).sqrt();
            assert!((mean - conv.mean()).abs() < 4.0 * se, "{conv:?}: {mean}");
            for k in 0..3 {
                let freq = w.iter().filter(|&&x| x == k).count() as f64 / n as f64;
                let p = conv.pmf(k);
                assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
            }
        }
    }

    #[test]
    fn csv_dump() {
        use crate::lattice::{Dim, LatticePoint};
        let dim = Dim::new(2).unwrap();
        let agg = Aggregate::from_points(dim, [LatticePoint::ORIGIN, LatticePoint::new(&[1, 0])]).unwrap();
        let mut f = GenealogyForest::with_roots(1);
        f.push_child(0);
        f.set_edge_weights(vec![0, 2]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&agg, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,parent_index,site_coords,edge_weight,depth,reaching_time\n1,,0 0,,0,0\n2,1,1 0,2,1,2\n"
        );
    }
}

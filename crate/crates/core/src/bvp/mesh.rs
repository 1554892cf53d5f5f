use crate::error::{Error, Result};

/// Graded mesh nodes; never coarsened.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    pub refinement_history: Vec<RefinementPass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementPass {
    pub epsilon: f64,
    pub inserted: usize,
    pub nodes_after: usize,
}

/// Bisection keeps neighbouring interval ratios within this bound.
pub const GRADING_RATIO: f64 = 2.0;

impl Mesh {
    pub fn uniform(start: f64, end: f64, intervals: usize) -> Self {
        assert!(intervals >= 2 && end > start);
        let h = (end - start) / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|k| start + h * k as f64).collect();
        nodes[intervals] = end;
        Self {
            nodes,
            refinement_history: Vec::new(),
        }
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidInput("mesh needs at least 3 nodes".into()));
        }
        if let Some(k) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!("mesh not strictly increasing at node {k}")));
        }
        Ok(Self {
            nodes,
            refinement_history: Vec::new(),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Width of interval `k` (between nodes `k` and `k + 1`).
    pub fn h(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.intervals()).map(|k| self.h(k)).fold(0.0, f64::max)
    }

    /// Largest ratio between adjacent interval widths.
    pub fn max_ratio(&self) -> f64 {
        (1..self.intervals())
            .map(|k| {
                let (a, b) = (self.h(k - 1), self.h(k));
                a.max(b) / a.min(b)
            })
            .fold(1.0, f64::max)
    }

    /// Bisects every marked interval, plus whatever neighbours are needed to
    /// keep the grading ratio. Returns the new mesh and the inserted count.
    pub fn bisect(&self, marks: &[bool], epsilon: f64, max_nodes: usize) -> Result<(Mesh, usize)> {
        assert_eq!(marks.len(), self.intervals());
        let mut marks = marks.to_vec();
        loop {
            let widths: Vec<f64> = (0..self.intervals())
                .map(|k| if marks[k] { 0.5 * self.h(k) } else { self.h(k) })
                .collect();
            let mut changed = false;
            for k in 1..widths.len() {
                let (a, b) = (widths[k - 1], widths[k]);
                if a > GRADING_RATIO * b * (1.0 + 1e-9) && !marks[k - 1] {
                    marks[k - 1] = true;
                    changed = true;
                } else if b > GRADING_RATIO * a * (1.0 + 1e-9) && !marks[k] {
                    marks[k] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let inserted = marks.iter().filter(|&&m| m).count();
        let requested = self.len() + inserted;
        if requested > max_nodes {
            return Err(Error::MeshBudgetExceeded {
                requested,
                max: max_nodes,
            });
        }
        let mut nodes = Vec::with_capacity(requested);
        for k in 0..self.intervals() {
            nodes.push(self.nodes[k]);
            if marks[k] {
                nodes.push(0.5 * (self.nodes[k] + self.nodes[k + 1]));
            }
        }
        nodes.push(self.end());
        let mut history = self.refinement_history.clone();
        if inserted > 0 {
            history.push(RefinementPass {
                epsilon,
                inserted,
                nodes_after: nodes.len(),
            });
        }
        Ok((
            Mesh {
                nodes,
                refinement_history: history,
            },
            inserted,
        ))
    }

    /// Index `k` with `nodes[k] <= y <= nodes[k + 1]` (clamped).
    pub fn locate(&self, y: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x <= y);
        k.saturating_sub(1).min(self.intervals() - 1)
    }
}

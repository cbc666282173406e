//! Optimization of the metric scale `s` and the pilot count `n_p`.
//!
//! The candidate set is a grid. A hill climb starts from a warm start or from
//! the grid point nearest `s = 0.7, n_p = 8`, first moving `coarse_stride`
//! steps along the `s` axis at a time and then single steps. An optional
//! refinement pass tries the geometric midpoints between the best `s` and its
//! grid neighbours.
//! Objectives are evaluated on `search_trials` trials; callers re-evaluate
//! the winner on the full trial budget.

use std::collections::HashMap;

use crate::density::SnnParam;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub s_grid: Vec<f64>,
    pub pilot_grid: Vec<usize>,
    pub search_trials: usize,
    pub coarse_stride: usize,
    pub refine: bool,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            s_grid: (1..=30).map(|i| i as f64 / 10.0).collect(),
            pilot_grid: vec![1, 2, 4, 8, 12, 16, 24],
            search_trials: 20_000,
            coarse_stride: 3,
            refine: true,
        }
    }
}

impl SearchSpace {
    /// A single fixed candidate (no optimization).
    pub fn fixed(s: f64, pilots: usize) -> Self {
        SearchSpace {
            s_grid: vec![s],
            pilot_grid: vec![pilots],
            search_trials: usize::MAX,
            coarse_stride: 1,
            refine: false,
        }
    }

    pub fn validate(&self, coherence_symbols: usize) -> Result<()> {
        if self.s_grid.is_empty() {
            return Err(Error::config("s_grid", "must not be empty"));
        }
        if let Some(bad) = self.s_grid.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::config("s_grid", format!("entries must be finite and >= 0 (got {bad})")));
        }
        if self.pilot_grid.is_empty() {
            return Err(Error::config("n_p_grid", "must not be empty"));
        }
        if let Some(bad) = self.pilot_grid.iter().find(|&&p| p == 0 || p >= coherence_symbols) {
            return Err(Error::config(
                "n_p_grid",
                format!("entries must satisfy 1 <= n_p < n_c = {coherence_symbols} (got {bad})"),
            ));
        }
        if self.search_trials == 0 {
            return Err(Error::config("search_trials", "must be at least 1"));
        }
        if self.coarse_stride == 0 {
            return Err(Error::config("coarse_stride", "must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn sorted(&self) -> SearchSpace {
        let mut out = self.clone();
        out.s_grid.sort_by(f64::total_cmp);
        out.s_grid.dedup();
        out.pilot_grid.sort_unstable();
        out.pilot_grid.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub s: SnnParam,
    pub pilots: usize,
}

const COLD_START: (f64, f64) = (0.7, 8.0);

/// Grid coordinates `(s index, pilot index)` of a candidate, used for warm starts.
pub type GridPoint = (usize, usize);

#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchResult<O> {
    pub best: Candidate,
    pub score: O,
    pub grid_point: GridPoint,
}

pub(crate) fn optimize<O, F>(space: &SearchSpace, warm: Option<GridPoint>, mut eval: F) -> Result<SearchResult<O>>
where
    O: PartialOrd + Copy,
    F: FnMut(Candidate) -> Result<O>,
{
    let space = space.sorted();
    let (ns, np) = (space.s_grid.len(), space.pilot_grid.len());
    let candidate = |i: usize, j: usize| Candidate {
        s: SnnParam::new(space.s_grid[i]).expect("validated grid"),
        pilots: space.pilot_grid[j],
    };
    let mut memo: HashMap<GridPoint, O> = HashMap::new();
    let mut score_of = |pt: GridPoint, memo: &mut HashMap<GridPoint, O>| -> Result<O> {
        if let Some(v) = memo.get(&pt) {
            return Ok(*v);
        }
        let v = eval(candidate(pt.0, pt.1))?;
        memo.insert(pt, v);
        Ok(v)
    };

    let nearest = |grid: &[f64], x: f64| {
        (0..grid.len())
            .min_by(|&a, &b| (grid[a] - x).abs().total_cmp(&(grid[b] - x).abs()))
            .expect("non-empty grid")
    };
    let mut current = match warm {
        Some((i, j)) if i < ns && j < np => (i, j),
        _ => {
            let pilots: Vec<f64> = space.pilot_grid.iter().map(|&p| p as f64).collect();
            (nearest(&space.s_grid, COLD_START.0), nearest(&pilots, COLD_START.1))
        }
    };
    let mut current_score = score_of(current, &mut memo)?;

    let mut strides = vec![space.coarse_stride.min(ns.saturating_sub(1)).max(1)];
    if strides[0] > 1 {
        strides.push(1);
    }
    for stride in strides {
        loop {
            let (i, j) = current;
            let mut neighbours = Vec::with_capacity(4);
            if i > 0 {
                neighbours.push((i.saturating_sub(stride), j));
            }
            if i + 1 < ns {
                neighbours.push(((i + stride).min(ns - 1), j));
            }
            if j > 0 {
                neighbours.push((i, j - 1));
            }
            if j + 1 < np {
                neighbours.push((i, j + 1));
            }
            let mut moved = false;
            for pt in neighbours {
                let v = score_of(pt, &mut memo)?;
                if v < current_score {
                    current = pt;
                    current_score = v;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }

    let mut result = SearchResult {
        best: candidate(current.0, current.1),
        score: current_score,
        grid_point: current,
    };
    if space.refine {
        let (i, j) = current;
        let s = space.s_grid[i];
        let mids = [i.checked_sub(1), (i + 1 < ns).then_some(i + 1)]
            .into_iter()
            .flatten()
            .map(|k| (s * space.s_grid[k]).sqrt())
            .filter(|m| m.is_finite() && *m > 0.0);
        for m in mids {
            let cand = Candidate { s: SnnParam::new(m)?, pilots: space.pilot_grid[j] };
            let v = eval(cand)?;
            if v < result.score {
                result.best = cand;
                result.score = v;
            }
        }
    }
    Ok(result)
}

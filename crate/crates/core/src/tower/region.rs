//! Oriented boundaries of the truncated sets `X_M^k` as lists of lifted pieces.
//!
//! The boundary of `X_0^k` is the arc chain of the cheese. Passing from stage
//! `M-1` to `M` splits every piece where `arg f_M` meets the cut level and lifts
//! the subpieces to the `m_M` sheets of the window (the `E_I` part), then adds
//! two oppositely oriented copies of each cut curve on the window edges (the
//! `E_J` part).

use super::cut::{CutCurve, CutSet};
use super::path::{BasePath, LiftedPath, StageStack};
use crate::cheese::{boundary_chain, CheeseSpec};
use crate::error::Result;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Initial parameter step when sampling arcs (radians).
pub const ARC_STEP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceOrigin {
    /// An arc of the cheese boundary.
    Base { arc: usize },
    /// Sheet `sheet` of a subpiece of piece `parent` of the previous region.
    Lifted { stage: usize, sheet: usize, parent: usize },
    /// A copy of cut curve `curve` on the lower (`top = false`) or upper window edge.
    Cut { stage: usize, curve: usize, top: bool },
}

#[derive(Clone, Debug)]
pub struct BoundaryPiece {
    pub path: LiftedPath,
    /// `+1` when the boundary is traversed with increasing `t`.
    pub orientation: i8,
    pub origin: PieceOrigin,
}

impl BoundaryPiece {
    /// Whether the piece belongs to the `E_J` part of the stage-`stage` boundary.
    pub fn is_cut_of(&self, stage: usize) -> bool {
        matches!(self.origin, PieceOrigin::Cut { stage: s, .. } if s == stage)
    }
}

#[derive(Clone, Debug)]
pub struct Region {
    pub stage: usize,
    pub k: usize,
    pub pieces: Vec<BoundaryPiece>,
}

impl Region {
    /// Lifted points at every piece endpoint, as traversal (start, end) pairs.
    pub fn endpoints(&self) -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
        self.pieces
            .iter()
            .map(|p| {
                let (a, b) = (p.path.start().z.clone(), p.path.end().z.clone());
                if p.orientation > 0 {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect()
    }

    /// Every traversal end meets a traversal start (greedy matching on all coordinates).
    pub fn is_closed(&self, tol: f64) -> bool {
        let ends = self.endpoints();
        let mut starts: Vec<&Vec<Complex64>> = ends.iter().map(|e| &e.0).collect();
        for (_, e) in &ends {
            let pos = starts.iter().position(|s| {
                s.iter().zip(e.iter()).all(|(a, b)| (a - b).norm() < tol)
            });
            match pos {
                Some(i) => {
                    starts.swap_remove(i);
                }
                None => return false,
            }
        }
        true
    }
}

/// Boundary of `X_0^k` as unlifted pieces.
pub fn stage0_region(spec: &CheeseSpec, k: usize, max_step_arg: f64) -> Result<Region> {
    let chain = boundary_chain(spec, k)?;
    let stack = StageStack::new(super::TowerKind::Exponential, Vec::new());
    let mut pieces = Vec::with_capacity(chain.arcs.len());
    for (i, arc) in chain.arcs.iter().enumerate() {
        let d = spec.circle(arc.circle_index);
        let base = BasePath::Arc { center: d.center, radius: d.radius };
        let z0 = base.point(arc.start_angle).0;
        let path = LiftedPath::lift(
            base,
            arc.start_angle,
            arc.end_angle,
            &stack,
            (vec![z0], Vec::new()),
            max_step_arg,
            ARC_STEP,
        )?;
        pieces.push(BoundaryPiece { path, orientation: arc.orientation, origin: PieceOrigin::Base { arc: i } });
    }
    Ok(Region { stage: 0, k, pieces })
}

/// Shift (in units of `2 pi`) bringing the last coordinate's imaginary part at
/// the middle parameter of the path into `[c, c + 2 pi)`.
fn window_slot(stack: &StageStack, path: &LiftedPath, c: f64) -> Result<f64> {
    let (z, _) = path.lift_at(stack, 0.5 * (path.t0 + path.t1))?;
    Ok(((z.last().unwrap().im - c) / TAU).floor())
}

/// `X_M^k` from `X_{M-1}^k` given the stage-`M` cut data.
pub fn advance_region(
    prev: &Region,
    stack: &StageStack,
    c: f64,
    m: usize,
    cut: &CutSet,
) -> Result<Region> {
    let stage = prev.stage + 1;
    let mut by_piece: Vec<Vec<f64>> = vec![Vec::new(); prev.pieces.len()];
    for x in &cut.crossings {
        by_piece[x.piece].push(x.t);
    }
    for v in &mut by_piece {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let lifted: Vec<Vec<BoundaryPiece>> = cut
        .prepared
        .par_iter()
        .enumerate()
        .map(|(i, prepared)| -> Result<Vec<BoundaryPiece>> {
            let parent = &prev.pieces[i];
            let mut marks = vec![prepared.path.t0];
            marks.extend(by_piece[i].iter().copied());
            marks.push(prepared.path.t1);
            let mut out = Vec::new();
            for w in marks.windows(2) {
                let sub = prepared.path.sub_path(stack, w[0], w[1])?;
                let q = window_slot(stack, &sub, c)?;
                for s in 0..m {
                    let mut p = sub.clone();
                    p.shift_last(Complex64::new(0.0, TAU * (s as f64 - q)));
                    out.push(BoundaryPiece {
                        path: p,
                        orientation: parent.orientation,
                        origin: PieceOrigin::Lifted { stage, sheet: s, parent: i },
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pieces: Vec<BoundaryPiece> = lifted.into_iter().flatten().collect();
    let copies: Vec<[BoundaryPiece; 2]> = cut
        .curves
        .par_iter()
        .enumerate()
        .map(|(ci, curve)| cut_copies(stack, curve, ci, stage, c, m))
        .collect::<Result<Vec<_>>>()?;
    for pair in copies {
        pieces.extend(pair);
    }
    Ok(Region { stage, k: prev.k, pieces })
}

fn cut_copies(
    stack: &StageStack,
    curve: &CutCurve,
    index: usize,
    stage: usize,
    c: f64,
    m: usize,
) -> Result<[BoundaryPiece; 2]> {
    let path = curve.extended(stack)?;
    let mid = &path.samples[path.samples.len() / 2];
    let q = ((mid.z.last().unwrap().im - c) / TAU).round();
    let mut bottom = path;
    bottom.shift_last(Complex64::new(0.0, -TAU * q));
    let mut top = bottom.clone();
    top.shift_last(Complex64::new(0.0, TAU * m as f64));
    Ok([
        BoundaryPiece { path: bottom, orientation: 1, origin: PieceOrigin::Cut { stage, curve: index, top: false } },
        BoundaryPiece { path: top, orientation: -1, origin: PieceOrigin::Cut { stage, curve: index, top: true } },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheese::{generate_cheese, Disc};

    #[test]
    fn stage0_region_is_closed() {
        let spec = generate_cheese(11, 0.5, 8, 0.01).unwrap();
        let r = stage0_region(&spec, 8, 0.1).unwrap();
        assert!(r.is_closed(1e-9));
    }

    #[test]
    fn stage0_full_disc() {
        let spec = CheeseSpec::new(0, 0.5, 0.01, Vec::<Disc>::new());
        let r = stage0_region(&spec, 0, 0.1).unwrap();
        assert_eq!(r.pieces.len(), 1);
        assert!((r.pieces[0].path.t1 - r.pieces[0].path.t0 - TAU).abs() < 1e-15);
    }
}

//! Multi-dimensional complex FFT over interleaved multi-component arrays.
//!
//! Data layout is row-major over `dims` with `ncomp` interleaved components
//! at each site. Each axis is transformed by gathering its lines into a
//! contiguous scratch buffer, transforming, and scattering back.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Kernel `e^{-i x·ξ}`, unnormalized.
    Forward,
    /// Kernel `e^{+i x·ξ}`, scaled by `1/∏dims`.
    Inverse,
}

const LINES_PER_TASK: usize = 32;

thread_local! {
    // plans and the line buffer are reused across calls on the same thread
    static WORKSPACE: RefCell<(FftPlanner<f64>, Vec<Complex64>)> = RefCell::new((FftPlanner::new(), Vec::new()));
}

/// Transforms every component of `data` along every axis in `dims`.
pub fn transform(data: &mut [Complex64], dims: &[usize], ncomp: usize, dir: Direction) {
    let total: usize = dims.iter().product::<usize>() * ncomp;
    assert_eq!(data.len(), total, "buffer does not match dims");
    WORKSPACE.with(|ws| {
        let (planner, scratch) = &mut *ws.borrow_mut();
        scratch.resize(total, Complex64::new(0.0, 0.0));
        for axis in 0..dims.len() {
            let len = dims[axis];
            let plan = match dir {
                Direction::Forward => planner.plan_fft_forward(len),
                Direction::Inverse => planner.plan_fft_inverse(len),
            };
            transform_axis(data, &mut scratch[..total], dims, ncomp, axis, &plan);
        }
    });
    if dir == Direction::Inverse {
        let scale = 1.0 / dims.iter().product::<usize>() as f64;
        par::for_each_chunk_mut(data, 1 << 14, |_, chunk| {
            for v in chunk {
                *v *= scale;
            }
        });
    }
}

fn transform_axis(
    data: &mut [Complex64],
    scratch: &mut [Complex64],
    dims: &[usize],
    ncomp: usize,
    axis: usize,
    plan: &Arc<dyn Fft<f64>>,
) {
    let len = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product::<usize>() * ncomp;
    // line ℓ = block * stride + offset; element k sits at block*len*stride + k*stride + offset
    {
        let src: &[Complex64] = data;
        par::for_each_chunk_mut(scratch, len * LINES_PER_TASK, |task, chunk| {
            for (li, line) in chunk.chunks_mut(len).enumerate() {
                let l = task * LINES_PER_TASK + li;
                let (block, offset) = (l / stride, l % stride);
                let base = block * len * stride + offset;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = src[base + k * stride];
                }
            }
            plan.process(chunk);
        });
    }
    let lines: &[Complex64] = scratch;
    // each `stride`-long row of `data` is a fixed (block, k)
    par::for_each_chunk_mut(data, stride, |row, chunk| {
        let (block, k) = (row / len, row % len);
        for (offset, v) in chunk.iter_mut().enumerate() {
            *v = lines[(block * stride + offset) * len + k];
        }
    });
}

use crate::measures::Grid1D;

/// Values of `V^N` on the tensor grid at the retained time steps.
///
/// Axis `a = k·d + c` is coordinate `c` of particle `k`; axis 0 varies
/// fastest in each slice.
#[derive(Debug, Clone)]
pub struct ValueTensor {
    pub(crate) n_particles: usize,
    pub(crate) dim: usize,
    pub(crate) grid: Grid1D,
    pub(crate) horizon: f64,
    pub(crate) n_time_steps: usize,
    pub(crate) slice_steps: Vec<usize>,
    pub(crate) slices: Vec<Vec<f64>>,
}

impl ValueTensor {
    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axes(&self) -> usize {
        self.n_particles * self.dim
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_time_steps(&self) -> usize {
        self.n_time_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_time_steps as f64
    }

    pub fn node_count(&self) -> usize {
        self.grid.n_points().pow(self.axes() as u32)
    }

    /// Time-step indices of the retained slices, increasing.
    pub fn slice_steps(&self) -> &[usize] {
        &self.slice_steps
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        &self.slices[i]
    }

    pub fn slice_time(&self, i: usize) -> f64 {
        self.slice_steps[i] as f64 * self.dt()
    }

    /// Slice retained at time step `step`, if any.
    pub fn slice_at_step(&self, step: usize) -> Option<&[f64]> {
        self.slice_steps.binary_search(&step).ok().map(|i| self.slices[i].as_slice())
    }

    /// Latest retained slice at or before `step` (the first slice otherwise).
    pub fn slice_index_for_step(&self, step: usize) -> usize {
        self.slice_steps.partition_point(|&s| s <= step).saturating_sub(1)
    }

    pub fn initial(&self) -> &[f64] {
        &self.slices[0]
    }

    pub fn terminal(&self) -> Option<&[f64]> {
        self.slice_at_step(self.n_time_steps)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.grid.n_points().pow(axis as u32)
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let n = self.grid.n_points();
        multi.iter().rev().fold(0, |acc, &i| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let n = self.grid.n_points();
        (0..self.axes())
            .map(|_| {
                let i = flat % n;
                flat /= n;
                i
            })
            .collect()
    }

    /// Particle coordinates of a node.
    pub fn node_state(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).into_iter().map(|i| self.grid.node(i)).collect()
    }

    /// Node nearest to `state`.
    pub fn nearest_node(&self, state: &[f64]) -> usize {
        let multi: Vec<usize> = state.iter().map(|&x| self.grid.nearest(x)).collect();
        self.flat_index(&multi)
    }

    /// Multilinear interpolation of a slice at `state` (clamped to the box).
    pub fn interpolate(&self, slice: usize, state: &[f64]) -> f64 {
        interpolate(&self.grid, &self.slices[slice], state)
    }

    /// Central-difference gradient at `state` with step `h`, one-sided where
    /// the stencil leaves the box.
    pub fn gradient(&self, slice: usize, state: &[f64], out: &mut [f64]) {
        let h = self.grid.spacing();
        let (lo, hi) = (self.grid.lo(), self.grid.hi());
        let mut probe = state.to_vec();
        for a in 0..state.len() {
            let x = state[a].clamp(lo, hi);
            let up = (x + h).min(hi);
            let down = (x - h).max(lo);
            probe[a] = up;
            let vu = self.interpolate(slice, &probe);
            probe[a] = down;
            let vd = self.interpolate(slice, &probe);
            probe[a] = state[a];
            out[a] = (vu - vd) / (up - down);
        }
    }
}

pub(crate) fn interpolate(grid: &Grid1D, values: &[f64], state: &[f64]) -> f64 {
    let n = grid.n_points();
    let axes = state.len();
    let mut base = 0usize;
    let mut stride = 1usize;
    let mut strides = [0usize; super::MAX_AXES];
    let mut fracs = [0.0f64; super::MAX_AXES];
    for a in 0..axes {
        let (i, t) = grid.locate(state[a]);
        base += i * stride;
        strides[a] = stride;
        fracs[a] = t;
        stride *= n;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << axes) {
        let mut w = 1.0;
        let mut idx = base;
        for a in 0..axes {
            if corner >> a & 1 == 1 {
                w *= fracs[a];
                idx += strides[a];
            } else {
                w *= 1.0 - fracs[a];
            }
        }
        if w != 0.0 {
            acc += w * values[idx];
        }
    }
    acc
}

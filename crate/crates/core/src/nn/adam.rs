use crate::error::{Error, Result};
use crate::scalar::Real;

/// Adam with decoupled L2 decay and optional keep-masks.
#[derive(Debug, Clone)]
pub struct AdamState<T: Real> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    pub l2: T,
    step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    /// Fresh state with zero moments for parameters of the given sizes.
    pub fn new(sizes: &[usize], lr: T, l2: T) -> Self {
        AdamState {
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            l2,
            step: 0,
            m: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update. `mask[i][j] == false` marks a pruned entry: its effective gradient is
    /// zero and the parameter is pinned to 0. `grads` is only read.
    pub fn step<P: AsMut<[T]>>(
        &mut self,
        params: &mut [P],
        grads: &[Vec<T>],
        mask: Option<&[Option<Vec<bool>>]>,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape("adam_step", &[params.len(), grads.len()], &[self.m.len()]));
        }
        if let Some(mask) = mask {
            if mask.len() != params.len() {
                return Err(Error::shape("adam_step (mask)", &[mask.len()], &[params.len()]));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = T::one() - self.beta1.powi(t);
        let bc2 = T::one() - self.beta2.powi(t);
        for (i, p) in params.iter_mut().enumerate() {
            let p = p.as_mut();
            let g = &grads[i];
            if p.len() != g.len() || p.len() != self.m[i].len() {
                return Err(Error::shape("adam_step (param)", &[p.len()], &[g.len()]));
            }
            let keep = mask.and_then(|m| m[i].as_deref());
            if let Some(k) = keep {
                if k.len() != p.len() {
                    return Err(Error::shape("adam_step (mask entry)", &[k.len()], &[p.len()]));
                }
            }
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for j in 0..p.len() {
                if keep.is_some_and(|k| !k[j]) {
                    m[j] *= self.beta1;
                    v[j] *= self.beta2;
                    p[j] = T::zero();
                    continue;
                }
                m[j] = self.beta1 * m[j] + (T::one() - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (T::one() - self.beta2) * g[j] * g[j];
                let mh = m[j] / bc1;
                let vh = v[j] / bc2;
                p[j] -= self.lr * (mh / (vh.sqrt() + self.eps) + self.l2 * p[j]);
            }
        }
        Ok(())
    }
}

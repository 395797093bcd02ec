use super::tensor::Matrix;

/// A set of named parameter blocks in a fixed order.
///
/// Gradients use the same type as the parameters they belong to, so the
/// optimizers, gradient checker and checkpoint code can walk both in
/// lockstep.
pub trait Parameterized {
    fn blocks(&self) -> Vec<(String, &Matrix)>;
    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)>;

    fn zero_grad(&mut self) {
        for (_, m) in self.blocks_mut() {
            m.fill(0.0);
        }
    }

    fn zeros_like(&self) -> Self
    where
        Self: Clone + Sized,
    {
        let mut z = self.clone();
        z.zero_grad();
        z
    }

    fn accumulate(&mut self, other: &Self)
    where
        Self: Sized,
    {
        for ((_, a), (_, b)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            a.add_assign(b);
        }
    }

    fn scale_all(&mut self, s: f64) {
        for (_, m) in self.blocks_mut() {
            m.scale(s);
        }
    }

    fn param_count(&self) -> usize {
        self.blocks().iter().map(|(_, m)| m.data.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.blocks().iter().all(|(_, m)| m.is_finite())
    }
}

/// Prefixes the block names of a component.
pub(crate) fn prefixed<'a>(
    prefix: &str,
    blocks: Vec<(String, &'a Matrix)>,
) -> impl Iterator<Item = (String, &'a Matrix)> + use<'a> {
    let prefix = prefix.to_string();
    blocks
        .into_iter()
        .map(move |(n, m)| (format!("{prefix}.{n}"), m))
}

pub(crate) fn prefixed_mut<'a>(
    prefix: &str,
    blocks: Vec<(String, &'a mut Matrix)>,
) -> impl Iterator<Item = (String, &'a mut Matrix)> + use<'a> {
    let prefix = prefix.to_string();
    blocks
        .into_iter()
        .map(move |(n, m)| (format!("{prefix}.{n}"), m))
}

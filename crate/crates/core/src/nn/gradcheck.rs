use super::params::Parameterized;

pub const DEFAULT_EPS: f64 = 1e-5;

/// Denominator floor for relative errors, so near-zero gradients don't blow up.
const REL_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub checked: usize,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares `analytic` against central finite differences of `loss` around
/// `model`, entry by entry. Returns the worst relative error per block.
pub fn gradient_check<P, F>(model: &P, analytic: &P, eps: f64, loss: F) -> Vec<BlockCheck>
where
    P: Parameterized + Clone,
    F: Fn(&P) -> f64,
{
    let mut probe = model.clone();
    let sizes: Vec<(String, usize)> = model
        .blocks()
        .iter()
        .map(|(n, m)| (n.clone(), m.data.len()))
        .collect();
    let analytic = analytic.blocks();
    let mut out = Vec::with_capacity(sizes.len());
    for (b, (name, len)) in sizes.into_iter().enumerate() {
        let mut worst = 0.0f64;
        for k in 0..len {
            let orig = probe.blocks()[b].1.data[k];
            probe.blocks_mut()[b].1.data[k] = orig + eps;
            let up = loss(&probe);
            probe.blocks_mut()[b].1.data[k] = orig - eps;
            let down = loss(&probe);
            probe.blocks_mut()[b].1.data[k] = orig;
            let numeric = (up - down) / (2.0 * eps);
            worst = worst.max(relative_error(analytic[b].1.data[k], numeric));
        }
        out.push(BlockCheck {
            name,
            max_rel_error: worst,
            checked: len,
        });
    }
    out
}

pub fn worst(checks: &[BlockCheck]) -> f64 {
    checks.iter().map(|c| c.max_rel_error).fold(0.0, f64::max)
}

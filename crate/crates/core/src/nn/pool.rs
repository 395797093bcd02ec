use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a sequence of LSTM states collapses into one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Last,
    Mean,
    Max,
}

impl Pooling {
    pub const ALL: [Pooling; 3] = [Pooling::Last, Pooling::Mean, Pooling::Max];
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Last => "last",
            Pooling::Mean => "mean",
            Pooling::Max => "max",
        })
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(Pooling::Last),
            "mean" => Ok(Pooling::Mean),
            "max" => Ok(Pooling::Max),
            _ => Err(Error::invalid(format!("unknown pooling mode {s:?}"))),
        }
    }
}

/// Pools the unmasked states. `Last` takes the final unmasked state.
///
/// Returns the pooled vector and, for `Max`, the winning timestep per unit.
pub fn pool(states: &[Vec<f64>], mask: &[bool], mode: Pooling) -> Result<(Vec<f64>, Vec<usize>)> {
    let live: Vec<usize> = (0..states.len()).filter(|&t| mask[t]).collect();
    let Some(&last) = live.last() else {
        return Err(Error::invalid("cannot pool an empty sequence"));
    };
    let dim = states[last].len();
    Ok(match mode {
        Pooling::Last => (states[last].clone(), Vec::new()),
        Pooling::Mean => {
            let mut out = vec![0.0; dim];
            for &t in &live {
                for (o, v) in out.iter_mut().zip(&states[t]) {
                    *o += v;
                }
            }
            let n = live.len() as f64;
            out.iter_mut().for_each(|o| *o /= n);
            (out, Vec::new())
        }
        Pooling::Max => {
            let mut out = vec![f64::NEG_INFINITY; dim];
            let mut arg = vec![live[0]; dim];
            for &t in &live {
                for k in 0..dim {
                    // strict comparison keeps the first argmax on ties
                    if states[t][k] > out[k] {
                        out[k] = states[t][k];
                        arg[k] = t;
                    }
                }
            }
            (out, arg)
        }
    })
}

/// Spreads the pooled gradient back over the states. Ties under `Max` route
/// the whole gradient to the first maximizing timestep.
pub fn pool_backward(
    d_pooled: &[f64],
    n_steps: usize,
    mask: &[bool],
    mode: Pooling,
    argmax: &[usize],
) -> Vec<Vec<f64>> {
    let dim = d_pooled.len();
    let mut d = vec![vec![0.0; dim]; n_steps];
    let live: Vec<usize> = (0..n_steps).filter(|&t| mask[t]).collect();
    match mode {
        Pooling::Last => {
            if let Some(&t) = live.last() {
                d[t].copy_from_slice(d_pooled);
            }
        }
        Pooling::Mean => {
            let n = live.len() as f64;
            for &t in &live {
                for (x, g) in d[t].iter_mut().zip(d_pooled) {
                    *x = g / n;
                }
            }
        }
        Pooling::Max => {
            for (k, &t) in argmax.iter().enumerate() {
                d[t][k] += d_pooled[k];
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes() {
        let s = vec![vec![1.0, 4.0], vec![3.0, 2.0], vec![9.0, 9.0]];
        let m = [true, true, false];
        assert_eq!(pool(&s, &m, Pooling::Last).unwrap().0, [3.0, 2.0]);
        assert_eq!(pool(&s, &m, Pooling::Mean).unwrap().0, [2.0, 3.0]);
        let (mx, arg) = pool(&s, &m, Pooling::Max).unwrap();
        assert_eq!(mx, [3.0, 4.0]);
        assert_eq!(arg, [1, 0]);
    }

    #[test]
    fn max_tie_goes_to_first() {
        let s = vec![vec![2.0], vec![2.0]];
        let (_, arg) = pool(&s, &[true, true], Pooling::Max).unwrap();
        let d = pool_backward(&[1.0], 2, &[true, true], Pooling::Max, &arg);
        assert_eq!(d, vec![vec![1.0], vec![0.0]]);
    }

    #[test]
    fn empty_is_error() {
        assert!(pool(&[vec![1.0]], &[false], Pooling::Mean).is_err());
    }

    #[test]
    fn parse_round_trip() {
        for p in Pooling::ALL {
            assert_eq!(p.to_string().parse::<Pooling>().unwrap(), p);
        }
        assert!("median".parse::<Pooling>().is_err());
    }
}

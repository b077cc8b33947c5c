// Copyright 2026 The bellnl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
use crate::behaviors::Behavior;
use crate::error::{Error, Result};

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    let total: f64 = p.iter().sum();
    if p.iter().any(|&x| x < -crate::tol::CLAMP || !x.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(format!("{name} sums to {total} or has negative entries")));
    }
    Ok(())
}

/// `sum_x p_x log2(p_x / q_x)` without input validation.
pub(crate) fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&px, &qx) in p.iter().zip(q) {
        if px > 0.0 {
            if qx <= 0.0 {
                return f64::INFINITY;
            }
            d += px * (px / qx).log2();
        }
    }
    d.max(0.0)
}

/// Kullback-Leibler divergence in bits; infinite when `p` is not supported
/// inside `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!("distributions of length {} and {}", p.len(), q.len())));
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    Ok(kl_bits(p, q))
}

/// Worst-case input divergence between two classical channels.
pub fn channel_divergence(n: &Behavior, m: &Behavior) -> Result<f64> {
    if n.scenario() != m.scenario() {
        return Err(Error::WrongScenario("channels act on different scenarios".into()));
    }
    let s = n.scenario();
    let mut worst = 0.0f64;
    for x0 in 0..s.nx0 {
        for y0 in 0..s.ny0 {
            worst = worst.max(kl_bits(n.block(x0, y0), m.block(x0, y0)));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::Scenario;

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&[0.25; 4], &[0.25; 4]).unwrap(), 0.0);
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), f64::INFINITY);
        assert!(kl_divergence(&[0.5, 0.4], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn channel_divergence_examples() {
        let pr = Behavior::pr_box();
        assert_eq!(channel_divergence(&pr, &pr).unwrap(), 0.0);
        assert_eq!(channel_divergence(&pr, &Behavior::uniform(Scenario::chsh())).unwrap(), 1.0);
        let s = Scenario::new(1, 1, 2, 2).unwrap();
        let a = Behavior::new(s, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let b = Behavior::new(s, vec![0.25; 4]).unwrap();
        assert_eq!(
            channel_divergence(&a, &b).unwrap(),
            kl_divergence(&[0.1, 0.2, 0.3, 0.4], &[0.25; 4]).unwrap()
        );
    }
}

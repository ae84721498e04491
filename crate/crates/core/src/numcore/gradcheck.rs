use super::{Graph, Tensor, Var};
use crate::{Real, Result};

/// Central-difference step.
pub const GRAD_CHECK_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Entries whose perturbation crossed a ReLU or max-pool kink.
    pub excluded: usize,
    /// `(parameter index, entry index)` of the largest error.
    pub worst: Option<(usize, usize)>,
}

fn evaluate<T: Real, F>(params: &[Tensor<T>], build: &F) -> Result<(T, Vec<usize>)>
where
    F: for<'g> Fn(&mut Graph<'g, T>, &[Var]) -> Result<Var>,
{
    let mut g = Graph::new();
    let vars: Vec<Var> = params.iter().map(|p| g.param(p)).collect();
    let loss = build(&mut g, &vars)?;
    Ok((g.scalar(loss)?, g.kink_signature()))
}

/// Compares reverse-mode gradients of the scalar built by `build` against
/// central differences `(L(x+eps) - L(x-eps)) / 2eps`, one parameter entry
/// at a time. Entries whose perturbation changes the activation pattern
/// are skipped and counted in `excluded`.
pub fn grad_check<T: Real, F>(params: &[Tensor<T>], epsilon: T, build: F) -> Result<GradCheckReport>
where
    F: for<'g> Fn(&mut Graph<'g, T>, &[Var]) -> Result<Var>,
{
    let analytic: Vec<Vec<T>> = {
        let mut g = Graph::new();
        let vars: Vec<Var> = params.iter().map(|p| g.param(p)).collect();
        let loss = build(&mut g, &vars)?;
        let grads = g.backward(loss)?;
        vars.iter()
            .zip(params)
            .map(|(&v, p)| {
                grads
                    .get(v)
                    .map(<[T]>::to_vec)
                    .unwrap_or_else(|| vec![T::zero(); p.len()])
            })
            .collect()
    };
    let (_, base_sig) = evaluate(params, &build)?;

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        excluded: 0,
        worst: None,
    };
    let two_eps = epsilon + epsilon;
    let mut work = params.to_vec();
    for (pi, param) in params.iter().enumerate() {
        for ei in 0..param.len() {
            let orig = param.values()[ei];
            work[pi].values_mut()[ei] = orig + epsilon;
            let (plus, sig_plus) = evaluate(&work, &build)?;
            work[pi].values_mut()[ei] = orig - epsilon;
            let (minus, sig_minus) = evaluate(&work, &build)?;
            work[pi].values_mut()[ei] = orig;

            if sig_plus != base_sig || sig_minus != base_sig {
                report.excluded += 1;
                continue;
            }
            let numeric = ((plus - minus) / two_eps).to_f64_lossy();
            let a = analytic[pi][ei].to_f64_lossy();
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            let rel = (a - numeric).abs() / denom;
            report.checked += 1;
            if rel > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(rel);
                report.worst = Some((pi, ei));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{gaussian_init, RngState};

    #[test]
    fn bilinear_is_exact() {
        let mut rng = RngState::new(3);
        let params: Vec<Tensor<f64>> = (0..2)
            .map(|_| gaussian_init(&[6], &mut rng).unwrap())
            .collect();
        let report = grad_check(&params, GRAD_CHECK_EPSILON, |g, v| g.dot(v[0], v[1])).unwrap();
        assert_eq!(report.checked, 12);
        assert!(report.max_rel_error < 1e-9, "{report:?}");
    }

    #[test]
    fn each_op_in_isolation() {
        let mut rng = RngState::new(11);
        let mut p = |s: &[usize]| gaussian_init::<f64>(s, &mut rng).unwrap();
        let params = vec![
            p(&[5, 3]),    // token table
            p(&[2, 2, 3]), // kernels
            p(&[2]),       // conv bias
            p(&[4, 5]),    // affine weights
            p(&[4]),       // affine bias
            p(&[4]),       // other tower
        ];
        let report = grad_check(&params, GRAD_CHECK_EPSILON, |g, v| {
            let seq = g.embedding_seq(v[0], &[1, 4, 4, 2])?;
            let conv = g.conv1d(seq, v[1], v[2])?;
            let act = g.relu(conv);
            let pooled = g.max_pool_over_time(act)?;
            let summed = g.embedding_sum(v[0], &[0, 3, 3])?;
            let joined = g.concat(&[pooled, summed])?;
            let hidden = g.affine(joined, v[3], v[4])?;
            let pred = g.dot(hidden, v[5])?;
            let twice = g.dot(v[5], v[5])?;
            g.mse_loss(&[pred, twice], &[0.3, -0.2])
        })
        .unwrap();
        assert!(report.checked > 0);
        assert!(report.max_rel_error < 1e-4, "{report:?}");
    }

    #[test]
    fn tiny_tolerance_is_not_met() {
        let mut rng = RngState::new(5);
        let params = vec![gaussian_init::<f64>(&[3, 4], &mut rng).unwrap()];
        let report = grad_check(&params, GRAD_CHECK_EPSILON, |g, v| {
            let x = g.input(vec![0.7, -0.1, 0.4, 1.3]);
            let b = g.input(vec![0.0; 3]);
            let h = g.affine(x, v[0], b)?;
            let h2 = g.affine(x, v[0], b)?;
            let s = g.dot(h, h2)?;
            g.mse_loss(&[s], &[1.0])
        })
        .unwrap();
        assert!(report.max_rel_error < 1e-4);
        assert!(report.max_rel_error > 1e-12);
    }
}

//! Generalized advantage estimation over per-agent decision trajectories.

/// One decision of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub obs: Vec<f64>,
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
    /// Shared reward summed over the decision interval that followed.
    pub reward: f64,
    /// The episode ended after this step.
    pub done: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Value estimate of the state after the last step, used when that step
    /// did not end the episode.
    pub bootstrap_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gae {
    pub advantages: Vec<f64>,
    /// Value targets: advantage plus the value estimate.
    pub returns: Vec<f64>,
}

pub fn compute_gae(traj: &Trajectory, gamma: f64, lambda: f64) -> Gae {
    let n = traj.steps.len();
    let mut advantages = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let step = &traj.steps[t];
        let next_value = if t + 1 < n {
            traj.steps[t + 1].value
        } else {
            traj.bootstrap_value
        };
        let live = if step.done { 0.0 } else { 1.0 };
        let delta = step.reward + gamma * next_value * live - step.value;
        running = delta + gamma * lambda * live * running;
        advantages[t] = running;
    }
    let returns = advantages.iter().zip(&traj.steps).map(|(a, s)| a + s.value).collect();
    Gae { advantages, returns }
}

/// Shifts and scales to zero mean and unit (population) standard deviation.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let scale = if std > 1e-12 { 1.0 / std } else { 1.0 };
    adv.iter_mut().for_each(|a| *a = (*a - mean) * scale);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn traj(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64) -> Trajectory {
        Trajectory {
            steps: rewards
                .iter()
                .zip(values)
                .zip(dones)
                .map(|((r, v), d)| Step {
                    obs: vec![],
                    action: 0,
                    log_prob: 0.0,
                    value: *v,
                    reward: *r,
                    done: *d,
                })
                .collect(),
            bootstrap_value: bootstrap,
        }
    }

    /// Direct definition: A_t = sum_l (gamma*lambda)^l delta_{t+l}, stopping
    /// at episode ends.
    fn oracle(t: &Trajectory, gamma: f64, lambda: f64) -> Vec<f64> {
        let n = t.steps.len();
        let value_after = |i: usize| {
            if t.steps[i].done {
                0.0
            } else if i + 1 < n {
                t.steps[i + 1].value
            } else {
                t.bootstrap_value
            }
        };
        (0..n)
            .map(|start| {
                let mut total = 0.0;
                let mut weight = 1.0;
                for i in start..n {
                    let delta = t.steps[i].reward + gamma * value_after(i) - t.steps[i].value;
                    total += weight * delta;
                    if t.steps[i].done {
                        break;
                    }
                    weight *= gamma * lambda;
                }
                total
            })
            .collect()
    }

    #[test]
    fn zero_discount_is_one_step_error() {
        let t = traj(&[1.0, -2.0, 0.5], &[0.3, 0.1, -0.7], &[false, false, false], 4.0);
        let g = compute_gae(&t, 0.0, 0.95);
        assert_eq!(g.advantages, vec![0.7, -2.1, 1.2]);
    }

    #[test]
    fn undiscounted_monte_carlo() {
        let r = [1.0, 2.0, -4.0, 0.5];
        let t = traj(&r, &[0.0; 4], &[false, false, false, true], 0.0);
        let g = compute_gae(&t, 1.0, 1.0);
        assert_eq!(g.advantages, vec![-0.5, -1.5, -3.5, 0.5]);
        assert_eq!(g.returns, g.advantages);
    }

    #[test]
    fn matches_recursive_definition() {
        let t = traj(
            &[0.3, -1.1, 2.2, 0.0, -0.4],
            &[0.5, 0.2, -0.3, 1.1, 0.7],
            &[false, true, false, false, false],
            -0.8,
        );
        let g = compute_gae(&t, 0.9, 0.8);
        for (a, b) in g.advantages.iter().zip(oracle(&t, 0.9, 0.8)) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn random_trajectories_match_oracle(
            rows in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0, any::<bool>()), 1..12),
            bootstrap in -5.0f64..5.0,
            gamma in 0.0f64..1.0,
            lambda in 0.0f64..=1.0,
        ) {
            let r: Vec<f64> = rows.iter().map(|x| x.0).collect();
            let v: Vec<f64> = rows.iter().map(|x| x.1).collect();
            let d: Vec<bool> = rows.iter().map(|x| x.2).collect();
            let t = traj(&r, &v, &d, bootstrap);
            let g = compute_gae(&t, gamma, lambda);
            for (a, b) in g.advantages.iter().zip(oracle(&t, gamma, lambda)) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn normalization(mut adv in proptest::collection::vec(-100.0f64..100.0, 2..200)) {
            prop_assume!(adv.iter().any(|a| (a - adv[0]).abs() > 1e-3));
            normalize_advantages(&mut adv);
            let n = adv.len() as f64;
            let mean = adv.iter().sum::<f64>() / n;
            let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-8);
            prop_assert!((std - 1.0).abs() < 1e-6);
        }
    }
}

use super::config::LrSchedule;

/// `min(1, step_size · ⌊step / interval⌋)`.
pub fn anneal_beta(step: u64, step_size: f64, interval: u64) -> f64 {
    let k = step / interval.max(1);
    (step_size * k as f64).min(1.0)
}

pub fn decay_lr(step: u64, lr0: f64, rate: f64, schedule: LrSchedule) -> f64 {
    match schedule {
        LrSchedule::Exponential => lr0 * (1.0 - rate).powf(step as f64),
        LrSchedule::InverseTime => lr0 / (1.0 + rate * step as f64),
    }
}

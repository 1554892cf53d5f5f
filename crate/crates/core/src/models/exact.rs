//! Exact Riemann solutions used as limit oracles.

use nalgebra::DVector;

use super::psystem::{pressure, sound_speed, specific_volume_for_speed, speed_integral};
use super::{ModelDescriptor, Oracle};
use crate::error::{Error, Result};
use crate::system::State;

/// Self-similar state inside a rarefaction fan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fan {
    Burgers,
    /// Riemann invariant `w -+ Phi(v)` fixed by the anchoring state.
    PSystem { gamma: f64, family: usize, v0: f64, w0: f64 },
    /// `u + 2c = invariant` (family 0) or `u - 2c = invariant` (family 1).
    ShallowWater { gravity: f64, family: usize, invariant: f64 },
}

impl Fan {
    pub fn state_at(&self, y: f64) -> State {
        match *self {
            Fan::Burgers => DVector::from_element(1, y),
            Fan::PSystem { gamma, family, v0, w0 } => {
                let c = y.abs();
                let v = specific_volume_for_speed(gamma, c);
                let w = if family == 0 {
                    w0 + speed_integral(gamma, v) - speed_integral(gamma, v0)
                } else {
                    w0 - (speed_integral(gamma, v) - speed_integral(gamma, v0))
                };
                DVector::from_vec(vec![v, w])
            }
            Fan::ShallowWater {
                gravity,
                family,
                invariant,
            } => {
                let (vel, c) = if family == 0 {
                    let c = (invariant - y) / 3.0;
                    (y + c, c)
                } else {
                    let c = (y - invariant) / 3.0;
                    (y - c, c)
                };
                let h = c * c / gravity;
                DVector::from_vec(vec![h, h * vel])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Wave {
    /// No wave (equal adjacent states).
    Trivial { speed: f64 },
    Shock { speed: f64 },
    Rarefaction { head: f64, tail: f64, fan: Fan },
}

impl Wave {
    /// Representative speed (midpoint for fans).
    pub fn speed(&self) -> f64 {
        match self {
            Wave::Trivial { speed } | Wave::Shock { speed } => *speed,
            Wave::Rarefaction { head, tail, .. } => 0.5 * (head + tail),
        }
    }
}

/// Piecewise-smooth self-similar solution: constant `states[j]` between
/// wave `j - 1` and wave `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannSolution {
    pub states: Vec<State>,
    pub waves: Vec<Wave>,
}

impl RiemannSolution {
    pub fn sample(&self, y: f64) -> State {
        for (j, w) in self.waves.iter().enumerate() {
            match w {
                Wave::Trivial { speed } | Wave::Shock { speed } => {
                    if y < *speed {
                        return self.states[j].clone();
                    }
                }
                Wave::Rarefaction { head, tail, fan } => {
                    if y < *head {
                        return self.states[j].clone();
                    }
                    if y <= *tail {
                        return fan.state_at(y);
                    }
                }
            }
        }
        self.states.last().cloned().expect("at least one state")
    }

    pub fn middle_states(&self) -> &[State] {
        &self.states[1..self.states.len() - 1]
    }
}

fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Maximum Rankine–Hugoniot defect tolerated by the oracle self-check.
pub const ORACLE_RH_TOL: f64 = 1e-10;

/// Classical (Lax-admissible) Riemann solution of `model` with data `(left, right)`.
pub fn exact_riemann(model: &ModelDescriptor, left: &State, right: &State) -> Result<RiemannSolution> {
    let oracle = model
        .oracle
        .ok_or_else(|| Error::InvalidInput(format!("model '{}' has no exact solver", model.name)))?;
    let sol = match oracle {
        Oracle::Burgers => burgers_riemann(left[0], right[0]),
        Oracle::PSystem { gamma } => psystem_riemann(gamma, left, right)?,
        Oracle::ShallowWater { gravity } => shallow_water_riemann(gravity, left, right)?,
    };
    for m in sol.middle_states() {
        if !model.system.in_ball(m) {
            return Err(Error::NoSolutionInBall(format!(
                "middle state {:?} outside the ball",
                m.as_slice()
            )));
        }
    }
    if let Some(flux) = &model.system.flux {
        for (j, w) in sol.waves.iter().enumerate() {
            if let Wave::Shock { speed } = w {
                let du = &sol.states[j + 1] - &sol.states[j];
                let df = flux(&sol.states[j + 1]) - flux(&sol.states[j]);
                let defect = (du * *speed - df).amax();
                if defect > ORACLE_RH_TOL {
                    return Err(Error::InvalidInput(format!(
                        "oracle shock {j} violates Rankine-Hugoniot by {defect:e}"
                    )));
                }
            }
        }
    }
    Ok(sol)
}

fn burgers_riemann(ul: f64, ur: f64) -> RiemannSolution {
    let states = vec![DVector::from_element(1, ul), DVector::from_element(1, ur)];
    let wave = if ul == ur {
        Wave::Trivial { speed: ul }
    } else if ul > ur {
        Wave::Shock {
            speed: 0.5 * (ul + ur),
        }
    } else {
        Wave::Rarefaction {
            head: ul,
            tail: ur,
            fan: Fan::Burgers,
        }
    };
    RiemannSolution {
        states,
        waves: vec![wave],
    }
}

fn psystem_riemann(gamma: f64, left: &State, right: &State) -> Result<RiemannSolution> {
    let (vl, wl) = (left[0], left[1]);
    let (vr, wr) = (right[0], right[1]);
    let (pl, pr) = (pressure(gamma, vl), pressure(gamma, vr));
    let phi = |v: f64| speed_integral(gamma, v);
    let w1 = |v: f64| {
        if v >= vl {
            wl + phi(v) - phi(vl)
        } else {
            wl - ((pressure(gamma, v) - pl) * (vl - v)).sqrt()
        }
    };
    let w2 = |v: f64| {
        if v >= vr {
            wr - (phi(v) - phi(vr))
        } else {
            wr + ((pressure(gamma, v) - pr) * (vr - v)).sqrt()
        }
    };
    let lo = 1e-3 * vl.min(vr);
    let hi = 1e3 * vl.max(vr);
    let vm = bisect(|v| w1(v) - w2(v), lo, hi)
        .ok_or_else(|| Error::NoSolutionInBall("p-system wave curves do not intersect".into()))?;
    let mid = DVector::from_vec(vec![vm, w1(vm)]);
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-14 * a.abs().max(1.0);
    let wave1 = if eq(vm, vl) {
        Wave::Trivial {
            speed: -sound_speed(gamma, vl),
        }
    } else if vm < vl {
        Wave::Shock {
            speed: -((pressure(gamma, vm) - pl) / (vl - vm)).sqrt(),
        }
    } else {
        Wave::Rarefaction {
            head: -sound_speed(gamma, vl),
            tail: -sound_speed(gamma, vm),
            fan: Fan::PSystem {
                gamma,
                family: 0,
                v0: vl,
                w0: wl,
            },
        }
    };
    let wave2 = if eq(vm, vr) {
        Wave::Trivial {
            speed: sound_speed(gamma, vr),
        }
    } else if vm < vr {
        Wave::Shock {
            speed: ((pressure(gamma, vm) - pr) / (vr - vm)).sqrt(),
        }
    } else {
        Wave::Rarefaction {
            head: sound_speed(gamma, vm),
            tail: sound_speed(gamma, vr),
            fan: Fan::PSystem {
                gamma,
                family: 1,
                v0: vr,
                w0: wr,
            },
        }
    };
    Ok(RiemannSolution {
        states: vec![left.clone(), mid, right.clone()],
        waves: vec![wave1, wave2],
    })
}

fn shallow_water_riemann(g: f64, left: &State, right: &State) -> Result<RiemannSolution> {
    let (hl, hr) = (left[0], right[0]);
    if hl <= 0.0 || hr <= 0.0 {
        return Err(Error::DomainViolation("non-positive depth".into()));
    }
    let (ul, ur) = (left[1] / hl, right[1] / hr);
    let (cl, cr) = ((g * hl).sqrt(), (g * hr).sqrt());
    let branch = |h: f64, hk: f64| {
        if h <= hk {
            2.0 * ((g * h).sqrt() - (g * hk).sqrt())
        } else {
            (h - hk) * (0.5 * g * (h + hk) / (h * hk)).sqrt()
        }
    };
    let phi = |h: f64| branch(h, hl) + branch(h, hr) + ur - ul;
    if phi(1e-12) > 0.0 {
        return Err(Error::NoSolutionInBall("dry middle state".into()));
    }
    let hm = bisect(phi, 1e-12, 100.0 * hl.max(hr))
        .ok_or_else(|| Error::NoSolutionInBall("shallow-water curves do not intersect".into()))?;
    let um = 0.5 * (ul + ur) + 0.5 * (branch(hm, hr) - branch(hm, hl));
    let cm = (g * hm).sqrt();
    let mid = DVector::from_vec(vec![hm, hm * um]);
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-14 * a.abs().max(1.0);
    let wave1 = if eq(hm, hl) {
        Wave::Trivial { speed: ul - cl }
    } else if hm > hl {
        Wave::Shock {
            speed: (mid[1] - left[1]) / (hm - hl),
        }
    } else {
        Wave::Rarefaction {
            head: ul - cl,
            tail: um - cm,
            fan: Fan::ShallowWater {
                gravity: g,
                family: 0,
                invariant: ul + 2.0 * cl,
            },
        }
    };
    let wave2 = if eq(hm, hr) {
        Wave::Trivial { speed: ur + cr }
    } else if hm > hr {
        Wave::Shock {
            speed: (right[1] - mid[1]) / (hr - hm),
        }
    } else {
        Wave::Rarefaction {
            head: um + cm,
            tail: ur + cr,
            fan: Fan::ShallowWater {
                gravity: g,
                family: 1,
                invariant: ur - 2.0 * cr,
            },
        }
    };
    Ok(RiemannSolution {
        states: vec![left.clone(), mid, right.clone()],
        waves: vec![wave1, wave2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{burgers, psystem, shallow_water};

    fn s1(v: f64) -> State {
        DVector::from_element(1, v)
    }

    #[test]
    fn burgers_shock_and_rarefaction() {
        let m = burgers(0.0, 0.3, 1.0);
        let shock = exact_riemann(&m, &s1(0.2), &s1(-0.2)).unwrap();
        assert_eq!(shock.waves[0], Wave::Shock { speed: 0.0 });
        let rare = exact_riemann(&m, &s1(-0.2), &s1(0.2)).unwrap();
        for y in [-0.5, -0.2, -0.1, 0.0, 0.15, 0.2, 0.7] {
            assert_eq!(rare.sample(y)[0], y.clamp(-0.2, 0.2));
        }
    }

    #[test]
    fn shallow_water_dam_break_is_consistent() {
        let m = shallow_water(1.0, (1.0, 0.0), 0.1, 1.6).unwrap();
        let l = DVector::from_vec(vec![1.05, 0.0]);
        let r = DVector::from_vec(vec![0.95, 0.0]);
        let sol = exact_riemann(&m, &l, &r).unwrap();
        assert!(matches!(sol.waves[0], Wave::Rarefaction { .. }));
        assert!(matches!(sol.waves[1], Wave::Shock { .. }));
        let mid = &sol.states[1];
        // 1-rarefaction Riemann invariant u + 2 sqrt(h)
        let inv_l = 2.0 * 1.05f64.sqrt();
        let inv_m = mid[1] / mid[0] + 2.0 * mid[0].sqrt();
        assert!((inv_l - inv_m).abs() < 1e-12);
        // fan joins continuously
        if let Wave::Rarefaction { head, tail, fan } = &sol.waves[0] {
            assert!((fan.state_at(*head) - &l).amax() < 1e-12);
            assert!((fan.state_at(*tail) - mid).amax() < 1e-12);
        }
        // Hugoniot: momentum jump condition
        let f = m.system.flux.as_ref().unwrap();
        let s = sol.waves[1].speed();
        let defect = ((&r - mid) * s - (f(&r) - f(mid))).amax();
        assert!(defect <= 1e-12);
    }

    #[test]
    fn psystem_solution_joins_fans_and_shocks() {
        let m = psystem(2.0, 1.0, 0.1, 2.5).unwrap();
        let l = DVector::from_vec(vec![1.0, 0.0]);
        let r = DVector::from_vec(vec![1.0, 0.04]);
        let sol = exact_riemann(&m, &l, &r).unwrap();
        // w_r > w_l pulls apart: two rarefactions
        assert!(matches!(sol.waves[0], Wave::Rarefaction { .. }));
        assert!(matches!(sol.waves[1], Wave::Rarefaction { .. }));
        for w in &sol.waves {
            if let Wave::Rarefaction { head, tail, fan } = w {
                assert!(head < tail);
                let a = fan.state_at(*head);
                let b = fan.state_at(*tail);
                assert!(a.iter().all(|v| v.is_finite()) && b.iter().all(|v| v.is_finite()));
            }
        }
        let y0 = sol.sample(0.0);
        assert!((y0 - &sol.states[1]).amax() < 1e-15);
        let compress = exact_riemann(&m, &l, &DVector::from_vec(vec![1.0, -0.04])).unwrap();
        assert!(matches!(compress.waves[0], Wave::Shock { .. }));
        assert!(matches!(compress.waves[1], Wave::Shock { .. }));
    }

    #[test]
    fn equal_data_is_trivial() {
        let m = shallow_water(1.0, (1.0, 0.0), 0.1, 1.6).unwrap();
        let u = DVector::from_vec(vec![1.0, 0.0]);
        let sol = exact_riemann(&m, &u, &u).unwrap();
        assert!(sol.waves.iter().all(|w| matches!(w, Wave::Trivial { .. })));
    }
}

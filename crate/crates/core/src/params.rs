//! Physical parameters, the exponential memory kernel, and the
//! three-zone partition of the radial frequency axis.
//!
//! Units are normalized so that the sound speed satisfies c0^2 = 1.

use crate::error::{MgtError, Result};

/// Validated parameter set (tau, delta, m) of the MGT equation with
/// exponential memory g(t) = m exp(-t/tau).
///
/// `m * tau < 1` is the stability constraint; it can be lifted with
/// `allow_unstable` for instability demonstrations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    tau: f64,
    delta: f64,
    m: f64,
    allow_unstable: bool,
}

impl PhysParams {
    pub fn new(tau: f64, delta: f64, m: f64, allow_unstable: bool) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(MgtError::NonPositiveParameter {
                name: "tau",
                value: tau,
            });
        }
        if !(m > 0.0) {
            return Err(MgtError::NonPositiveParameter {
                name: "m",
                value: m,
            });
        }
        if !(delta >= 0.0) {
            return Err(MgtError::NonPositiveParameter {
                name: "delta",
                value: delta,
            });
        }
        if m * tau >= 1.0 && !allow_unstable {
            return Err(MgtError::StabilityViolated { mtau: m * tau });
        }
        Ok(Self {
            tau,
            delta,
            m,
            allow_unstable,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn m_tau(&self) -> f64 {
        self.m * self.tau
    }

    pub fn is_stable(&self) -> bool {
        self.m * self.tau < 1.0
    }

    pub fn allows_unstable(&self) -> bool {
        self.allow_unstable
    }

    /// Same parameters with a different sound diffusivity. Used by the
    /// viscous-minus-inviscid difference solver.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.tau, delta, self.m, self.allow_unstable)
    }

    pub fn kernel(&self) -> MemoryKernel {
        MemoryKernel {
            m: self.m,
            tau: self.tau,
        }
    }
}

/// The memory kernel g(t) = m exp(-t/tau) and its exact identities.
#[derive(Debug, Clone, Copy)]
pub struct MemoryKernel {
    m: f64,
    tau: f64,
}

impl MemoryKernel {
    pub fn eval(&self, t: f64) -> f64 {
        self.m * (-t / self.tau).exp()
    }

    /// g'(t) = -g(t)/tau.
    pub fn derivative(&self, t: f64) -> f64 {
        -self.eval(t) / self.tau
    }

    /// Exact running integral of the kernel:
    /// int_0^t g(t - eta) d eta = tau (m - g(t)).
    pub fn integral(&self, t: f64) -> f64 {
        self.tau * (self.m - self.eval(t))
    }

    pub fn at_zero(&self) -> f64 {
        self.m
    }
}

/// Zone of the radial frequency axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    Interior,
    Bounded,
    Exterior,
}

impl Zone {
    pub fn name(&self) -> &'static str {
        match self {
            Zone::Interior => "interior",
            Zone::Bounded => "bounded",
            Zone::Exterior => "exterior",
        }
    }
}

/// Sharp three-zone partition of r = |xi|: interior r < eps,
/// bounded eps <= r <= cap_n, exterior r > cap_n.
///
/// The partition replaces the smooth cut-offs of the frequency analysis;
/// zone-restricted integrals must not double-count.
#[derive(Debug, Clone, Copy)]
pub struct FrequencyZones {
    eps: f64,
    cap_n: f64,
}

impl Default for FrequencyZones {
    fn default() -> Self {
        Self {
            eps: 0.05,
            cap_n: 20.0,
        }
    }
}

impl FrequencyZones {
    pub fn new(eps: f64, cap_n: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(MgtError::NonPositiveParameter {
                name: "zones.eps",
                value: eps,
            });
        }
        if !(cap_n > eps) {
            return Err(MgtError::InvalidGrid(format!(
                "zone thresholds must satisfy 0 < eps < N, got eps = {eps}, N = {cap_n}"
            )));
        }
        Ok(Self { eps, cap_n })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cap_n(&self) -> f64 {
        self.cap_n
    }

    pub fn classify(&self, r: f64) -> Zone {
        if r < self.eps {
            Zone::Interior
        } else if r <= self.cap_n {
            Zone::Bounded
        } else {
            Zone::Exterior
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        let p = PhysParams::new(0.5, 1.0, 1.0, false).unwrap();
        assert_eq!(p.m_tau(), 0.5);

        assert_eq!(
            PhysParams::new(1.0, 0.1, 2.0, false),
            Err(MgtError::StabilityViolated { mtau: 2.0 })
        );

        let p = PhysParams::new(1.0, 0.1, 2.0, true).unwrap();
        assert!(!p.is_stable());

        assert!(matches!(
            PhysParams::new(-1.0, 0.0, 0.5, false),
            Err(MgtError::NonPositiveParameter { name: "tau", .. })
        ));
        assert!(matches!(
            PhysParams::new(1.0, -0.5, 0.5, false),
            Err(MgtError::NonPositiveParameter { name: "delta", .. })
        ));
    }

    #[test]
    fn kernel_identities_on_a_grid() {
        let p = PhysParams::new(0.7, 0.3, 1.2, false).unwrap();
        let g = p.kernel();
        assert_eq!(g.at_zero(), 1.2);

        // g'(t) = -g(t)/tau by central differences
        let h = 1e-6;
        for i in 0..40 {
            let t = 0.05 + 0.25 * i as f64;
            let fd = (g.eval(t + h) - g.eval(t - h)) / (2.0 * h);
            assert!((fd - g.derivative(t)).abs() < 1e-8 * (1.0 + g.eval(t)));

            // integral identity vs trapezoid quadrature
            let n = 4000;
            let dt = t / n as f64;
            let mut acc = 0.5 * (g.eval(t) + g.eval(0.0));
            for j in 1..n {
                acc += g.eval(t - j as f64 * dt);
            }
            acc *= dt;
            assert!((acc - g.integral(t)).abs() < 1e-6 * (1.0 + acc.abs()));
        }
    }

    #[test]
    fn zones_partition_the_axis() {
        let z = FrequencyZones::default();
        assert_eq!(z.classify(0.01), Zone::Interior);
        assert_eq!(z.classify(0.05), Zone::Bounded);
        assert_eq!(z.classify(20.0), Zone::Bounded);
        assert_eq!(z.classify(20.000001), Zone::Exterior);

        // increasing r crosses Interior -> Bounded -> Exterior exactly once each
        let mut last = Zone::Interior;
        let mut transitions = 0;
        for i in 0..100_000 {
            let r = 1e-4 * 1.0002f64.powi(i) * 1e2;
            let zone = z.classify(r * 1e-2);
            if zone != last {
                transitions += 1;
                last = zone;
            }
        }
        assert_eq!(transitions, 2);

        assert!(FrequencyZones::new(0.5, 0.1).is_err());
    }
}

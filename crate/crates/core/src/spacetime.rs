//! 1+1 dimensional Minkowski geometry with `c = 1`.
//!
//! Light-cone boundaries count as causally connected throughout.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance for deciding that an interval is lightlike.
pub const LIGHTLIKE_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    MeasurementA,
    MeasurementB,
    Comparison,
    Preparation,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub role: Role,
    #[serde(default)]
    pub label: String,
}

impl Event {
    pub fn new(t: f64, x: f64, role: Role, label: impl Into<String>) -> Self {
        Self {
            t,
            x,
            role,
            label: label.into(),
        }
    }

    /// Lorentz boost with rapidity `phi`.
    pub fn boosted(&self, phi: f64) -> Event {
        let (sh, ch) = (phi.sinh(), phi.cosh());
        Event {
            t: ch * self.t - sh * self.x,
            x: ch * self.x - sh * self.t,
            role: self.role,
            label: self.label.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IntervalClass {
    Timelike,
    Lightlike,
    Spacelike,
}

/// Classifies by the sign of `(Δt)² − (Δx)²`; lightlike when the two terms
/// agree within a relative `1e-12`.
pub fn interval_class(e1: &Event, e2: &Event) -> IntervalClass {
    let dt2 = (e1.t - e2.t).powi(2);
    let dx2 = (e1.x - e2.x).powi(2);
    let s = dt2 - dx2;
    if s.abs() <= LIGHTLIKE_REL_TOL * dt2.max(dx2) {
        IntervalClass::Lightlike
    } else if s > 0.0 {
        IntervalClass::Timelike
    } else {
        IntervalClass::Spacelike
    }
}

/// `e` lies in the closed future light cone of `of` (strictly later).
pub fn in_future_lightcone(e: &Event, of: &Event) -> bool {
    e.t > of.t && interval_class(e, of) != IntervalClass::Spacelike
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Predicate {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub predicates: Vec<Predicate>,
}

impl ProtocolReport {
    pub fn all_passed(&self) -> bool {
        self.predicates.iter().all(|p| p.passed)
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.predicates.iter().find(|p| p.name == name).map(|p| p.passed)
    }
}

pub const PRED_SPACELIKE: &str = "measurements spacelike separated";
pub const PRED_AFTER_A: &str = "comparison in future light cone of A";
pub const PRED_AFTER_B: &str = "comparison in future light cone of B";

fn single(events: &[Event], role: Role) -> Result<Option<&Event>> {
    let mut it = events.iter().filter(|e| e.role == role);
    let first = it.next();
    if it.next().is_some() {
        return Err(Error::MalformedTimeline(format!("more than one {role:?} event")));
    }
    Ok(first)
}

fn measurements(events: &[Event]) -> Result<(&Event, &Event)> {
    for e in events {
        if !e.t.is_finite() || !e.x.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    let a = single(events, Role::MeasurementA)?
        .ok_or_else(|| Error::MalformedTimeline("no MeasurementA event".into()))?;
    let b = single(events, Role::MeasurementB)?
        .ok_or_else(|| Error::MalformedTimeline("no MeasurementB event".into()))?;
    Ok((a, b))
}

/// Checks that the two measurements are spacelike separated and that the
/// comparison, if present, lies in both of their future light cones.
pub fn validate_protocol(events: &[Event]) -> Result<ProtocolReport> {
    let (a, b) = measurements(events)?;
    let comparison = single(events, Role::Comparison)?;
    let mut predicates = vec![Predicate {
        name: PRED_SPACELIKE.into(),
        passed: interval_class(a, b) == IntervalClass::Spacelike,
    }];
    if let Some(c) = comparison {
        predicates.push(Predicate {
            name: PRED_AFTER_A.into(),
            passed: in_future_lightcone(c, a),
        });
        predicates.push(Predicate {
            name: PRED_AFTER_B.into(),
            passed: in_future_lightcone(c, b),
        });
    }
    Ok(ProtocolReport { predicates })
}

/// Closed spatial interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub fn intersects(&self, other: &Span) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Cross-section of the backward light cone of `e` at time `t`.
pub fn backward_cone_at(e: &Event, t: f64) -> Span {
    let r = e.t - t;
    Span {
        lo: e.x - r,
        hi: e.x + r,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScreeningReport {
    pub slab: (f64, f64),
    /// Backward-cone cross-sections of A at the slab's lower and upper time.
    pub cone_a: (Span, Span),
    pub cone_b: (Span, Span),
    /// True when the two cones are disjoint across the whole slab, so the
    /// slab cuts each backward cone separately.
    pub screens: bool,
}

/// Intersects a time slab with the backward light cones of both
/// measurements. The cones widen into the past, so disjointness at the
/// slab's earliest time implies disjointness throughout.
pub fn region3_screens(events: &[Event], slab: (f64, f64)) -> Result<ScreeningReport> {
    let (a, b) = measurements(events)?;
    let (lo, hi) = slab;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidArgument(format!("bad slab [{lo}, {hi}]")));
    }
    if hi >= a.t || hi >= b.t {
        return Err(Error::SlabNotBefore { lo, hi });
    }
    let cone_a = (backward_cone_at(a, lo), backward_cone_at(a, hi));
    let cone_b = (backward_cone_at(b, lo), backward_cone_at(b, hi));
    Ok(ScreeningReport {
        slab,
        cone_a,
        cone_b,
        screens: !cone_a.0.intersects(&cone_b.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: f64, x: f64) -> Event {
        Event::new(t, x, Role::Other, "")
    }

    fn protocol(a: (f64, f64), b: (f64, f64), c: Option<(f64, f64)>) -> Vec<Event> {
        let mut v = vec![
            Event::new(a.0, a.1, Role::MeasurementA, "A"),
            Event::new(b.0, b.1, Role::MeasurementB, "B"),
        ];
        if let Some(c) = c {
            v.push(Event::new(c.0, c.1, Role::Comparison, "C"));
        }
        v
    }

    #[test]
    fn interval_classes() {
        assert_eq!(interval_class(&ev(0.0, 0.0), &ev(1.0, 0.0)), IntervalClass::Timelike);
        assert_eq!(interval_class(&ev(0.0, 0.0), &ev(1.0, 1.0)), IntervalClass::Lightlike);
        assert_eq!(interval_class(&ev(0.0, 0.0), &ev(0.0, 5.0)), IntervalClass::Spacelike);
    }

    #[test]
    fn future_cone_membership() {
        let o = ev(0.0, 0.0);
        assert!(in_future_lightcone(&ev(2.0, 0.0), &o));
        assert!(!in_future_lightcone(&ev(1.0, 5.0), &o));
        assert!(in_future_lightcone(&ev(1.0, 1.0), &o));
        assert!(!in_future_lightcone(&o, &ev(2.0, 0.0)));
    }

    #[test]
    fn comparison_inside_overlap() {
        let r = validate_protocol(&protocol((1.0, -2.0), (1.0, 2.0), Some((4.0, 0.0)))).unwrap();
        assert!(r.all_passed());
    }

    #[test]
    fn comparison_too_early() {
        let r = validate_protocol(&protocol((1.0, -2.0), (1.0, 2.0), Some((2.0, 0.0)))).unwrap();
        assert_eq!(r.get(PRED_SPACELIKE), Some(true));
        assert_eq!(r.get(PRED_AFTER_A), Some(false));
        assert_eq!(r.get(PRED_AFTER_B), Some(false));
    }

    #[test]
    fn timelike_measurements_flagged() {
        let r = validate_protocol(&protocol((0.0, 0.0), (3.0, 0.0), None)).unwrap();
        assert_eq!(r.get(PRED_SPACELIKE), Some(false));
        assert_eq!(r.predicates.len(), 1);
    }

    #[test]
    fn malformed_role_multisets() {
        let mut v = protocol((0.0, 0.0), (0.0, 3.0), None);
        v.push(Event::new(1.0, 1.0, Role::MeasurementA, "A2"));
        assert!(matches!(validate_protocol(&v), Err(Error::MalformedTimeline(_))));
        assert!(matches!(
            validate_protocol(&[Event::new(0.0, 0.0, Role::MeasurementB, "B")]),
            Err(Error::MalformedTimeline(_))
        ));
    }

    #[test]
    fn slab_separates_backward_cones() {
        let evs = protocol((2.0, -2.0), (2.0, 2.0), None);
        let r = region3_screens(&evs, (0.5, 1.0)).unwrap();
        assert!(r.screens);
        assert_eq!(r.cone_a.1, Span { lo: -3.0, hi: -1.0 });
        assert_eq!(r.cone_b.1, Span { lo: 1.0, hi: 3.0 });

        let r = region3_screens(&evs, (1.8, 1.9)).unwrap();
        assert!(r.screens);
        let close = |s: Span, lo: f64, hi: f64| (s.lo - lo).abs() < 1e-12 && (s.hi - hi).abs() < 1e-12;
        assert!(close(r.cone_a.0, -2.2, -1.8));
        assert!(close(r.cone_b.0, 1.8, 2.2));
    }

    #[test]
    fn early_slab_overlaps() {
        let evs = protocol((2.0, -2.0), (2.0, 2.0), None);
        let r = region3_screens(&evs, (-0.5, 0.5)).unwrap();
        assert!(!r.screens);
    }

    #[test]
    fn slab_after_measurement_rejected() {
        let evs = protocol((2.0, -2.0), (2.0, 2.0), None);
        assert!(matches!(
            region3_screens(&evs, (1.0, 2.5)),
            Err(Error::SlabNotBefore { .. })
        ));
    }

    #[test]
    fn boost_preserves_interval() {
        let (p, q) = (ev(0.3, -1.2), ev(2.0, 0.7));
        let s = |a: &Event, b: &Event| (a.t - b.t).powi(2) - (a.x - b.x).powi(2);
        for phi in [-1.0, -0.5, 0.5, 1.0] {
            assert!((s(&p, &q) - s(&p.boosted(phi), &q.boosted(phi))).abs() < 1e-12);
        }
    }
}

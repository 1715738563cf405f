//! Receivers and the dense trace buffer they record into.

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};
use crate::field::sample_trilinear;
use crate::geometry::{Component, SimulationDomain};
use crate::real::Real;
use crate::solver::FieldSet;

/// Station in geographic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Receiver {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    /// Meters above sea level.
    pub altitude: f64,
}

impl Receiver {
    /// Places the station on the grid at `depth_km` (usually the free surface).
    pub fn to_point(&self, domain: &SimulationDomain, depth_km: f64) -> Result<ReceiverPoint> {
        let position = domain
            .grid_position(self.latitude, self.longitude, depth_km)
            .map_err(|e| Error::config(format!("receiver {} outside domain: {e}", self.name)))?;
        Ok(ReceiverPoint {
            name: self.name.clone(),
            position,
        })
    }
}

/// Receiver at real-valued node coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverPoint {
    pub name: String,
    pub position: [f64; 3],
}

/// Velocity traces: one row per receiver and component (`vx, vy, vz`), one column per step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    names: Vec<String>,
    dt: f64,
    start_time: DateTime<Utc>,
    capacity: usize,
    len: usize,
    data: Vec<f64>,
}

impl TraceSet {
    pub fn new(names: Vec<String>, dt: f64, capacity: usize) -> Self {
        let rows = names.len() * 3;
        TraceSet {
            names,
            dt,
            start_time: DateTime::UNIX_EPOCH,
            capacity,
            len: 0,
            data: vec![0.0; rows * capacity],
        }
    }

    pub fn with_start_time(mut self, start: DateTime<Utc>) -> Self {
        self.start_time = start;
        self
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start_time(&self) -> DateTime<Utc> {
        self.start_time
    }

    pub fn rows(&self) -> usize {
        self.names.len() * 3
    }

    /// Completed steps.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, receiver: usize, component: Component) -> &[f64] {
        let r = receiver * 3 + velocity_slot(component);
        &self.data[r * self.capacity..r * self.capacity + self.len]
    }

    pub fn trace(&self, name: &str, component: Component) -> Option<&[f64]> {
        let n = self.names.iter().position(|s| s == name)?;
        Some(self.row(n, component))
    }

    fn grow(&mut self) {
        let new_cap = (self.capacity * 2).max(16);
        let mut data = vec![0.0; self.rows() * new_cap];
        for r in 0..self.rows() {
            data[r * new_cap..r * new_cap + self.len]
                .copy_from_slice(&self.data[r * self.capacity..r * self.capacity + self.len]);
        }
        self.data = data;
        self.capacity = new_cap;
    }

    /// Appends one column; `values` holds `rows()` entries in row order.
    pub fn push_column(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.rows());
        if self.len == self.capacity {
            self.grow();
        }
        for (r, v) in values.iter().enumerate() {
            self.data[r * self.capacity + self.len] = *v;
        }
        self.len += 1;
    }
}

fn velocity_slot(c: Component) -> usize {
    match c {
        Component::Vx => 0,
        Component::Vy => 1,
        Component::Vz => 2,
        other => panic!("traces hold velocity components only, got {other}"),
    }
}

/// Samples every velocity component at every receiver and appends column `t_index`.
pub fn record_receivers<T: Real>(
    fields: &FieldSet<T>,
    receivers: &[ReceiverPoint],
    traces: &mut TraceSet,
    t_index: usize,
) -> Result<()> {
    if t_index != traces.len() {
        return Err(Error::domain(format!(
            "recording column {t_index} but {} columns exist",
            traces.len()
        )));
    }
    let mut column = Vec::with_capacity(receivers.len() * 3);
    for r in receivers {
        for c in Component::VELOCITIES {
            let o = c.offset();
            let p = r.position;
            let q = [p[0] - o[0], p[1] - o[1], p[2] - o[2]];
            column.push(sample_trilinear(fields.get(c), q).to_f64_lossy());
        }
    }
    traces.push_column(&column);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field3;

    fn rp(name: &str, p: [f64; 3]) -> ReceiverPoint {
        ReceiverPoint {
            name: name.into(),
            position: p,
        }
    }

    #[test]
    fn node_aligned_receiver_reads_value() {
        let mut f = FieldSet::<f64>::zeros([6, 6, 6]);
        f.vx.fill(2.5);
        let rs = [rp("A", [2.5, 3.0, 1.0])];
        let mut t = TraceSet::new(vec!["A".into()], 0.1, 4);
        record_receivers(&f, &rs, &mut t, 0).unwrap();
        assert_eq!(t.row(0, Component::Vx), &[2.5]);
        assert_eq!(t.row(0, Component::Vy), &[0.0]);
    }

    #[test]
    fn uniform_field_same_everywhere() {
        let mut f = FieldSet::<f64>::zeros([8, 8, 8]);
        f.vz.fill(-1.25);
        let rs = [rp("A", [1.2, 3.3, 4.7]), rp("B", [6.9, 0.1, 2.2])];
        let mut t = TraceSet::new(vec!["A".into(), "B".into()], 0.1, 1);
        record_receivers(&f, &rs, &mut t, 0).unwrap();
        assert_eq!(t.row(0, Component::Vz), t.row(1, Component::Vz));
        assert_eq!(t.row(1, Component::Vz), &[-1.25]);
    }

    #[test]
    fn halfway_is_mean_of_neighbours() {
        let mut f = FieldSet::<f64>::zeros([8, 4, 4]);
        f.vy = Field3::from_fn([8, 4, 4], |i, _, _| 3.0 * i as f64 + 1.0);
        // vy nodes sit at integer x; x = 2.5 lies between nodes 2 and 3
        let rs = [rp("A", [2.5, 1.5, 1.0])];
        let mut t = TraceSet::new(vec!["A".into()], 0.1, 1);
        record_receivers(&f, &rs, &mut t, 0).unwrap();
        assert_eq!(t.row(0, Component::Vy), &[0.5 * (7.0 + 10.0)]);
    }

    #[test]
    fn columns_append_and_grow() {
        let f = FieldSet::<f64>::zeros([4, 4, 4]);
        let rs = [rp("A", [1.0, 1.0, 1.0])];
        let mut t = TraceSet::new(vec!["A".into()], 0.1, 1);
        for n in 0..5 {
            record_receivers(&f, &rs, &mut t, n).unwrap();
        }
        assert_eq!(t.len(), 5);
        assert!(record_receivers(&f, &rs, &mut t, 9).is_err());
        t.push_column(&[1.0, 2.0, 3.0]);
        assert_eq!(t.trace("A", Component::Vz).unwrap()[5], 3.0);
        assert_eq!(t.row(0, Component::Vx).len(), 6);
    }
}

use crate::field::Field3;
use crate::geometry::Component;
use crate::real::Real;

/// The nine staggered wavefield arrays: velocities in m/s, stresses in Pa.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet<T> {
    pub vx: Field3<T>,
    pub vy: Field3<T>,
    pub vz: Field3<T>,
    pub sxx: Field3<T>,
    pub syy: Field3<T>,
    pub szz: Field3<T>,
    pub sxy: Field3<T>,
    pub sxz: Field3<T>,
    pub syz: Field3<T>,
}

impl<T: Real> FieldSet<T> {
    pub fn zeros(dims: [usize; 3]) -> Self {
        let z = Field3::zeros(dims);
        FieldSet {
            vx: z.clone(),
            vy: z.clone(),
            vz: z.clone(),
            sxx: z.clone(),
            syy: z.clone(),
            szz: z.clone(),
            sxy: z.clone(),
            sxz: z.clone(),
            syz: z,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.vx.dims()
    }

    pub fn get(&self, c: Component) -> &Field3<T> {
        match c {
            Component::Vx => &self.vx,
            Component::Vy => &self.vy,
            Component::Vz => &self.vz,
            Component::Sxx => &self.sxx,
            Component::Syy => &self.syy,
            Component::Szz => &self.szz,
            Component::Sxy => &self.sxy,
            Component::Sxz => &self.sxz,
            Component::Syz => &self.syz,
        }
    }

    pub fn get_mut(&mut self, c: Component) -> &mut Field3<T> {
        match c {
            Component::Vx => &mut self.vx,
            Component::Vy => &mut self.vy,
            Component::Vz => &mut self.vz,
            Component::Sxx => &mut self.sxx,
            Component::Syy => &mut self.syy,
            Component::Szz => &mut self.szz,
            Component::Sxy => &mut self.sxy,
            Component::Sxz => &mut self.sxz,
            Component::Syz => &mut self.syz,
        }
    }

    pub fn all_finite(&self) -> bool {
        Component::ALL.iter().all(|&c| self.get(c).all_finite())
    }

    /// `sum(vx² + vy² + vz²)` over all nodes, accumulated in f64.
    pub fn kinetic_proxy(&self) -> f64 {
        Component::VELOCITIES
            .iter()
            .map(|&c| {
                self.get(c)
                    .as_slice()
                    .iter()
                    .map(|v| {
                        let v = v.to_f64_lossy();
                        v * v
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn max_abs_velocity(&self) -> f64 {
        Component::VELOCITIES
            .iter()
            .map(|&c| self.get(c).max_abs().to_f64_lossy())
            .fold(0.0, f64::max)
    }
}

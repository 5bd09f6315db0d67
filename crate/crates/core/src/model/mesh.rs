use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Wire,
    Insulator,
    Shield,
}

/// Radii of the cable's region interfaces, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoaxGeometry {
    pub r_wire: f64,
    pub r_ins: f64,
    pub r_out: f64,
}

impl Default for CoaxGeometry {
    fn default() -> Self {
        CoaxGeometry {
            r_wire: 1.0e-3,
            r_ins: 2.0e-3,
            r_out: 3.0e-3,
        }
    }
}

impl CoaxGeometry {
    pub fn validate(&self) -> Result<()> {
        let ok = self.r_wire > 0.0 && self.r_ins > self.r_wire && self.r_out > self.r_ins && self.r_out.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Mesh(format!(
                "radii must satisfy 0 < r_wire < r_ins < r_out, got {:?}",
                self
            )))
        }
    }

    /// Cross-section area of the wire.
    pub fn wire_area(&self) -> f64 {
        std::f64::consts::PI * self.r_wire * self.r_wire
    }

    fn region_of(&self, r_mid: f64) -> Region {
        if r_mid < self.r_wire {
            Region::Wire
        } else if r_mid < self.r_ins {
            Region::Insulator
        } else {
            Region::Shield
        }
    }
}

/// Radial mesh on `[0, r_out]` with linear elements. Node 0 sits on the axis;
/// the last node carries the Dirichlet condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    radii: Vec<f64>,
    regions: Vec<Region>,
    geometry: CoaxGeometry,
}

impl Mesh1D {
    pub fn new(radii: Vec<f64>, regions: Vec<Region>, geometry: CoaxGeometry) -> Result<Self> {
        geometry.validate()?;
        if radii.len() < 2 {
            return Err(Error::Mesh("need at least two nodes".into()));
        }
        if regions.len() != radii.len() - 1 {
            return Err(Error::Mesh(format!(
                "{} elements but {} region tags",
                radii.len() - 1,
                regions.len()
            )));
        }
        if radii[0] != 0.0 {
            return Err(Error::Mesh(format!(
                "first node must be on the axis, got r = {}",
                radii[0]
            )));
        }
        if *radii.last().unwrap() != geometry.r_out {
            return Err(Error::Mesh("last node must coincide with the outer radius".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Mesh("radii must be strictly increasing".into()));
        }
        for interface in [geometry.r_wire, geometry.r_ins] {
            if !radii.contains(&interface) {
                return Err(Error::Mesh(format!("interface r = {interface} is not a mesh node")));
            }
        }
        for (e, region) in regions.iter().enumerate() {
            let mid = 0.5 * (radii[e] + radii[e + 1]);
            if geometry.region_of(mid) != *region {
                return Err(Error::Mesh(format!(
                    "element {e} tagged {region:?} but lies in {:?}",
                    geometry.region_of(mid)
                )));
            }
        }
        Ok(Mesh1D {
            radii,
            regions,
            geometry,
        })
    }

    /// Mesh with `nodes` nodes, elements distributed over the three regions
    /// in proportion to their radial thickness and uniform inside each.
    pub fn coax(nodes: usize, geometry: CoaxGeometry) -> Result<Self> {
        geometry.validate()?;
        if nodes < 4 {
            return Err(Error::Mesh(format!(
                "need at least 4 nodes for three regions, got {nodes}"
            )));
        }
        let elements = nodes - 1;
        let widths = [
            geometry.r_wire,
            geometry.r_ins - geometry.r_wire,
            geometry.r_out - geometry.r_ins,
        ];
        let total: f64 = widths.iter().sum();
        // Largest-remainder apportionment, at least one element per region.
        let spare = elements - 3;
        let ideal: Vec<f64> = widths.iter().map(|w| w / total * spare as f64).collect();
        let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize + 1).collect();
        let mut left = elements - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| {
            let fa = ideal[a] - ideal[a].floor();
            let fb = ideal[b] - ideal[b].floor();
            fb.partial_cmp(&fa).unwrap().then(b.cmp(&a))
        });
        for &k in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[k] += 1;
            left -= 1;
        }

        let bounds = [0.0, geometry.r_wire, geometry.r_ins, geometry.r_out];
        let tags = [Region::Wire, Region::Insulator, Region::Shield];
        let mut radii = Vec::with_capacity(nodes);
        let mut regions = Vec::with_capacity(elements);
        radii.push(0.0);
        for k in 0..3 {
            let (lo, hi) = (bounds[k], bounds[k + 1]);
            for e in 1..=counts[k] {
                let r = if e == counts[k] {
                    hi
                } else {
                    lo + (hi - lo) * e as f64 / counts[k] as f64
                };
                radii.push(r);
                regions.push(tags[k]);
            }
        }
        Mesh1D::new(radii, regions, geometry)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn geometry(&self) -> &CoaxGeometry {
        &self.geometry
    }

    pub fn node_count(&self) -> usize {
        self.radii.len()
    }

    pub fn element_count(&self) -> usize {
        self.regions.len()
    }

    /// Unknown potentials: every node but the outer Dirichlet node.
    pub fn free_count(&self) -> usize {
        self.radii.len() - 1
    }

    /// Index of the first node at or beyond radius `r`.
    pub fn node_at_or_after(&self, r: f64) -> usize {
        self.radii.partition_point(|&x| x < r).min(self.radii.len() - 1)
    }
}

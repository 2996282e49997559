//! Half-line meshes: a uniform core, optional uniform refinement zones around selected
//! points, and a geometrically graded tail out to a far truncation.

/// A zone of uniform spacing `h` on `[center - half_width, center + half_width]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zone {
    pub center: f64,
    pub half_width: f64,
    pub h: f64,
}

impl Zone {
    /// Zone with `cells` cells of width `h` on either side of `center`.
    pub fn around(center: f64, h: f64, cells: usize) -> Self {
        Zone { center, half_width: cells as f64 * h, h }
    }
}

/// Growth rate of the spacing away from a zone (per unit distance).
const ZONE_GRADE: f64 = 0.08;

/// Layout of one half-line mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshSpec {
    /// Left end of the half-line (0 unless a gap around the origin is excluded).
    pub lo: f64,
    /// End of the uniform core.
    pub core_end: f64,
    /// Spacing in the core.
    pub h_core: f64,
    /// Far truncation; `None` ends the mesh at `core_end`.
    pub far: Option<f64>,
    /// Growth rate of the spacing beyond the core.
    pub tail_grade: f64,
    pub zones: Vec<Zone>,
}

impl MeshSpec {
    fn spacing(&self, x: f64) -> f64 {
        let mut h = if x <= self.core_end {
            self.h_core
        } else {
            self.h_core + self.tail_grade * (x - self.core_end)
        };
        for z in &self.zones {
            let d = ((x - z.center).abs() - z.half_width).max(0.0);
            h = h.min(z.h + ZONE_GRADE * d);
        }
        h
    }

    /// Cell edges `lo = e_0 < e_1 < ... < e_m = end`.
    pub fn edges(&self) -> Vec<f64> {
        let end = self.far.unwrap_or(self.core_end);
        let mut e = vec![self.lo];
        let mut x = self.lo;
        loop {
            let h = self.spacing(x);
            if x + h >= end - 0.5 * h {
                e.push(end);
                break;
            }
            x += h;
            e.push(x);
        }
        e
    }
}

/// Uniform edges on `[lo, hi]` with `n` cells.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zone_is_uniform_and_tail_reaches_truncation() {
        let spec = MeshSpec {
            lo: 0.0,
            core_end: 5.0,
            h_core: 0.05,
            far: Some(1e9),
            tail_grade: 0.06,
            zones: vec![Zone::around(1.3, 0.002, 40)],
        };
        let e = spec.edges();
        assert_eq!(*e.last().unwrap(), 1e9);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        let inside: Vec<f64> = e
            .windows(2)
            .filter(|w| w[0] > 1.3 - 0.07 && w[1] < 1.3 + 0.07)
            .map(|w| w[1] - w[0])
            .collect();
        assert!(inside.len() > 60);
        assert!(inside.iter().all(|&h| (h - 0.002).abs() < 1e-12));
        assert!(e.len() < 1200, "{}", e.len());
    }
}

use std::fmt;
use std::str::FromStr;

/// Linear RGB triple, channels nominally in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);
    pub const WHITE: Rgb = Rgb::new(1.0, 1.0, 1.0);
    pub const RED: Rgb = Rgb::new(1.0, 0.0, 0.0);
    pub const GREEN: Rgb = Rgb::new(0.0, 1.0, 0.0);
    pub const BLUE: Rgb = Rgb::new(0.0, 0.0, 1.0);
    pub const MAGENTA: Rgb = Rgb::new(1.0, 0.0, 1.0);
    pub const YELLOW: Rgb = Rgb::new(1.0, 1.0, 0.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb { r, g, b }
    }

    pub const fn gray(v: f64) -> Self {
        Rgb { r: v, g: v, b: v }
    }

    pub fn channels(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn from_channels(c: [f64; 3]) -> Self {
        Rgb::new(c[0], c[1], c[2])
    }

    /// Rec. 601 luma.
    pub fn luma(self) -> f64 {
        0.299 * self.r + 0.587 * self.g + 0.114 * self.b
    }

    pub fn scale(self, k: f64) -> Self {
        Rgb::new(self.r * k, self.g * k, self.b * k)
    }

    pub fn mul(self, o: Rgb) -> Self {
        Rgb::new(self.r * o.r, self.g * o.g, self.b * o.b)
    }

    pub fn add(self, o: Rgb) -> Self {
        Rgb::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }

    pub fn sub(self, o: Rgb) -> Self {
        Rgb::new(self.r - o.r, self.g - o.g, self.b - o.b)
    }

    /// `self * (1 - t) + o * t`
    pub fn lerp(self, o: Rgb, t: f64) -> Self {
        Rgb::new(
            self.r + (o.r - self.r) * t,
            self.g + (o.g - self.g) * t,
            self.b + (o.b - self.b) * t,
        )
    }

    pub fn clamp01(self) -> Self {
        Rgb::new(
            self.r.clamp(0.0, 1.0),
            self.g.clamp(0.0, 1.0),
            self.b.clamp(0.0, 1.0),
        )
    }

    pub fn dist(self, o: Rgb) -> f64 {
        let d = self.sub(o);
        (d.r * d.r + d.g * d.g + d.b * d.b).sqrt()
    }

    pub fn in_unit_range(self) -> bool {
        self.channels().iter().all(|c| (0.0..=1.0).contains(c))
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.r, self.g, self.b)
    }
}

impl FromStr for Rgb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected r,g,b but got {s:?}"));
        }
        let mut c = [0.0; 3];
        for (slot, p) in c.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|e| format!("bad channel {p:?}: {e}"))?;
        }
        Ok(Rgb::from_channels(c))
    }
}

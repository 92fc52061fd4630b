use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic box `[−L, L)^dim` with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Invalid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Invalid(format!("points per axis must be a power of two >= 16, got {n}")));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::Invalid(format!("half length must be positive, got {half_length}")));
        }
        Ok(Grid { dim, n, half_length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, m: usize) -> f64 {
        -self.half_length + m as f64 * self.spacing()
    }

    /// Axis indices of flat index `idx` (x fastest).
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.n, idx / self.n]
        }
    }

    pub fn flat(&self, ix: usize, iy: usize) -> usize {
        if self.dim == 1 {
            ix
        } else {
            iy * self.n + ix
        }
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [ix, iy] = self.axes(idx);
        let y = if self.dim == 1 { 0.0 } else { self.coord(iy) };
        [self.coord(ix), y]
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.point(idx);
        x.hypot(y)
    }

    /// Index of `x = 0`.
    pub fn center_index(&self) -> usize {
        self.flat(self.n / 2, self.n / 2)
    }

    /// Index of the corner `(L − spacing, …)`, the point farthest from the origin.
    pub fn corner_index(&self) -> usize {
        self.flat(self.n - 1, self.n - 1)
    }

    /// Index of `−x`.
    pub fn mirror_index(&self, idx: usize) -> usize {
        let [ix, iy] = self.axes(idx);
        let m = |i: usize| (self.n - i) % self.n;
        self.flat(m(ix), m(iy))
    }

    /// `π m / L` in FFT ordering.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let signed = if m < self.n / 2 { m as f64 } else { m as f64 - self.n as f64 };
        std::f64::consts::PI * signed / self.half_length
    }

    /// `‖k‖²` for every flat Fourier index.
    pub fn wavenumber_squared(&self) -> Vec<f64> {
        (0..self.len())
            .map(|idx| {
                let [ix, iy] = self.axes(idx);
                let kx = self.wavenumber(ix);
                let ky = if self.dim == 1 { 0.0 } else { self.wavenumber(iy) };
                kx * kx + ky * ky
            })
            .collect()
    }
}

/// Smallest half length for which the bump and the heat kernel tails are
/// negligible: `L ≥ 4σ + 6√(2 K_max)`.
pub fn auto_half_length(width: f64, k_max: f64) -> f64 {
    4.0 * width + 6.0 * (2.0 * k_max).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialProfile {
    Constant {
        value: f64,
    },
    /// `M − A exp(−‖x‖²/(2σ²))`.
    ConstantMinusBump {
        value: f64,
        amplitude: f64,
        width: f64,
    },
    /// Linear interpolation in `‖x‖`, equal to `far` beyond the last radius.
    RadialTable {
        radii: Vec<f64>,
        values: Vec<f64>,
        far: f64,
    },
}

impl InitialProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        match self {
            InitialProfile::Constant { value } => {
                if !(*value > 0.0) || !value.is_finite() {
                    return bad(format!("constant value must be positive, got {value}"));
                }
            }
            InitialProfile::ConstantMinusBump { value, amplitude, width } => {
                if !(*value > 0.0) || !value.is_finite() {
                    return bad(format!("value must be positive, got {value}"));
                }
                if !(*amplitude >= 0.0 && amplitude < value) {
                    return bad(format!("amplitude must lie in [0, {value}), got {amplitude}"));
                }
                if !(*width > 0.0) || !width.is_finite() {
                    return bad(format!("width must be positive, got {width}"));
                }
            }
            InitialProfile::RadialTable { radii, values, far } => {
                if !(*far > 0.0) || !far.is_finite() {
                    return bad(format!("far value must be positive, got {far}"));
                }
                if radii.is_empty() || radii.len() != values.len() {
                    return bad("radii and values must be nonempty and of equal length".into());
                }
                if radii[0] < 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("radii must be nonnegative and strictly increasing".into());
                }
                if values.iter().any(|v| !(*v >= 0.0 && v <= far)) {
                    return bad(format!("table values must lie in [0, {far}]"));
                }
            }
        }
        Ok(())
    }

    /// `‖φ‖_u`, the far-field value.
    pub fn sup(&self) -> f64 {
        match self {
            InitialProfile::Constant { value } | InitialProfile::ConstantMinusBump { value, .. } => *value,
            InitialProfile::RadialTable { far, .. } => *far,
        }
    }

    /// Width `σ` used by the box-size rule; a table counts as `σ = r_last/4`.
    pub fn support_width(&self) -> f64 {
        match self {
            InitialProfile::Constant { .. } => 0.0,
            InitialProfile::ConstantMinusBump { width, .. } => *width,
            InitialProfile::RadialTable { radii, .. } => radii[radii.len() - 1] / 4.0,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            InitialProfile::Constant { value } => *value,
            InitialProfile::ConstantMinusBump { value, amplitude, width } => {
                value - amplitude * (-r * r / (2.0 * width * width)).exp()
            }
            InitialProfile::RadialTable { radii, values, far } => {
                let k = radii.partition_point(|&x| x <= r);
                if k == radii.len() {
                    *far
                } else if k == 0 {
                    values[0]
                } else {
                    let w = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                    values[k - 1] + w * (values[k] - values[k - 1])
                }
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.eval(grid.radius(i))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: [Vec<f64>; 2],
    pub t: f64,
}

impl FieldPair {
    pub fn from_profiles(grid: &Grid, profiles: &[InitialProfile; 2]) -> Self {
        FieldPair {
            u: [profiles[0].sample(grid), profiles[1].sample(grid)],
            t: 0.0,
        }
    }

    pub fn sup(&self, i: usize) -> f64 {
        self.u[i].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self, i: usize) -> f64 {
        self.u[i].iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn has_nan(&self) -> bool {
        self.u.iter().any(|c| c.iter().any(|v| v.is_nan()))
    }
}

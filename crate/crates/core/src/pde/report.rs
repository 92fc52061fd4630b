use std::fmt::Write as _;

use serde::Serialize;

use super::{FieldPair, Grid, RunStatus, SimulationRun, Snapshot};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusProbe {
    pub radius: f64,
    /// `max_{‖x‖≤R} u_i` at the last stable time.
    pub max_inside: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceInfinityReport {
    pub last_stable_t: f64,
    pub far: [f64; 2],
    pub center: [f64; 2],
    pub probes: Vec<RadiusProbe>,
    /// `(t, center_1/far_1, center_2/far_2)` per snapshot.
    pub ratios: Vec<(f64, [f64; 2])>,
    /// Ratio nonincreasing over snapshots in `[t_last/2, t_last]`.
    pub ratio_nonincreasing_late: bool,
    /// Ratio nonincreasing over every snapshot.
    pub ratio_nonincreasing_all: bool,
    pub caveat: &'static str,
}

const CAVEAT: &str = "a periodic box cannot realize |x| -> infinity; the corner point stands in for the far field, \
and every point eventually blows up at the far-field rate on a finite box";

/// Interior-versus-far-field evidence at the last stable time of a run that
/// ended in blow-up.
pub fn space_infinity_report(run: &SimulationRun) -> Result<SpaceInfinityReport> {
    let last_stable_t = match run.status {
        RunStatus::BlowUpDetected { last_stable_t } => last_stable_t,
        s => return Err(Error::Invalid(format!("run did not end in blow-up: {s:?}"))),
    };
    let g = &run.grid;
    let l = g.half_length();
    let probes = [l / 8.0, l / 4.0, l / 2.0]
        .iter()
        .map(|&radius| {
            let mut max_inside = [f64::NEG_INFINITY; 2];
            for idx in (0..g.len()).filter(|&i| g.radius(i) <= radius) {
                for (c, m) in max_inside.iter_mut().enumerate() {
                    *m = m.max(run.fields.u[c][idx]);
                }
            }
            RadiusProbe { radius, max_inside }
        })
        .collect();
    let ratios: Vec<(f64, [f64; 2])> = run
        .snapshots
        .iter()
        .map(|s| (s.t, [s.center_far_ratio(0), s.center_far_ratio(1)]))
        .collect();
    let nonincreasing = |from: f64| {
        let r: Vec<_> = ratios.iter().filter(|(t, _)| *t >= from).collect();
        r.windows(2).all(|w| (0..2).all(|i| w[1].1[i] <= w[0].1[i]))
    };
    let (c, f) = (g.center_index(), g.corner_index());
    Ok(SpaceInfinityReport {
        last_stable_t,
        far: [run.fields.u[0][f], run.fields.u[1][f]],
        center: [run.fields.u[0][c], run.fields.u[1][c]],
        probes,
        ratio_nonincreasing_late: nonincreasing(0.5 * last_stable_t),
        ratio_nonincreasing_all: nonincreasing(f64::NEG_INFINITY),
        ratios,
        caveat: CAVEAT,
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns `t,sup1,sup2,center1,center2,far1,far2,y1,y2`; `y` is `nan` where
/// the companion is unavailable.
pub fn snapshots_csv(snapshots: &[Snapshot]) -> String {
    let mut out = String::from("t,sup1,sup2,center1,center2,far1,far2,y1,y2\n");
    for s in snapshots {
        let y = s.companion.unwrap_or([f64::NAN; 2]);
        let row = [s.t, s.sup[0], s.sup[1], s.center[0], s.center[1], s.far[0], s.far[1], y[0], y[1]];
        let row: Vec<String> = row.iter().map(|&v| num(v)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Grid values with a `# dim=… N=… L=… t=…` header line.
pub fn field_dump_csv(grid: &Grid, fields: &FieldPair) -> String {
    let mut out = format!(
        "# dim={} N={} L={} t={}\n",
        grid.dim(),
        grid.points_per_axis(),
        num(grid.half_length()),
        num(fields.t)
    );
    out.push_str(if grid.dim() == 1 { "x,u1,u2\n" } else { "x,y,u1,u2\n" });
    for idx in 0..grid.len() {
        let [x, y] = grid.point(idx);
        if grid.dim() == 1 {
            let _ = writeln!(out, "{},{},{}", num(x), num(fields.u[0][idx]), num(fields.u[1][idx]));
        } else {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                num(x),
                num(y),
                num(fields.u[0][idx]),
                num(fields.u[1][idx])
            );
        }
    }
    out
}

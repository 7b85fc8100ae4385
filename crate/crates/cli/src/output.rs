//! Files written into the output directory.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use smf_droplet::dynamics::{Snapshot, SnapshotSink};
use smf_droplet::{AccelEstimate, IntensityKind, SpectralGrid, TrajectoryRecord};

use crate::config::fmt_f64;

pub const LOCK_FILE: &str = ".lock";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_FILE);
        let mut f = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)?;
        writeln!(f, "{}", std::process::id())?;
        Ok(Self { path })
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes one snapshot as columns x̄, Re Ψ, Im Ψ, n, |F_tr|², |B|².
///
/// |F_tr|² is taken in the image plane, one round-trip distance from the
/// cloud; right at the cloud it would be the constant p₀.
pub fn write_snapshot(path: &Path, snap: &Snapshot, grid: &SpectralGrid) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# step = {}", snap.step)?;
    writeln!(w, "# t_bar = {}", fmt_f64(snap.t))?;
    writeln!(
        w,
        "x_bar,re_psi,im_psi,density,forward_intensity,backward_intensity"
    )?;
    for j in 0..grid.n_points() {
        writeln!(
            w,
            "{}",
            row(&[
                grid.x_values()[j],
                snap.psi[j].re,
                snap.psi[j].im,
                snap.density[j],
                snap.image_intensity[j],
                snap.backward_intensity[j],
            ])
        )?;
    }
    w.flush()
}

/// Reads Ψ back from a snapshot file, checking it was written on `grid`.
pub fn read_snapshot_psi(path: &Path, grid: &SpectralGrid) -> Result<Vec<Complex64>, String> {
    let f = File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    let mut psi = Vec::with_capacity(grid.n_points());
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("x_bar") {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("line {}: not numeric", i + 1))?;
        if cols.len() < 3 {
            return Err(format!("line {}: expected at least 3 columns", i + 1));
        }
        let j = psi.len();
        if j >= grid.n_points() {
            return Err(format!("more than {} rows", grid.n_points()));
        }
        if (cols[0] - grid.x_values()[j]).abs() > 1e-9 * grid.length() {
            return Err(format!(
                "line {}: x_bar = {} does not match the configured grid",
                i + 1,
                cols[0]
            ));
        }
        psi.push(Complex64::new(cols[1], cols[2]));
    }
    if psi.len() != grid.n_points() {
        return Err(format!(
            "{} rows but the grid has {} points",
            psi.len(),
            grid.n_points()
        ));
    }
    Ok(psi)
}

/// Sink that writes every snapshot, the snapshot index and the
/// density/intensity rasters.
pub struct SnapshotWriter<'a> {
    dir: PathBuf,
    grid: &'a SpectralGrid,
    intensity: IntensityKind,
    index: BufWriter<File>,
    density: BufWriter<File>,
    raster: BufWriter<File>,
}

impl<'a> SnapshotWriter<'a> {
    pub fn new(out: &Path, grid: &'a SpectralGrid, intensity: IntensityKind) -> io::Result<Self> {
        let dir = out.join("snapshots");
        fs::create_dir_all(&dir)?;
        let mut index = create(&dir.join("index.csv"))?;
        writeln!(index, "step,t_bar,file")?;
        let mut density = create(&out.join("plot").join("density.dat"))?;
        writeln!(density, "# t_bar x_bar density")?;
        let mut raster = create(&out.join("plot").join("intensity.dat"))?;
        let name = match intensity {
            IntensityKind::BackwardAtBec => "backward_intensity_at_bec",
            IntensityKind::ImagePlaneForward => "image_plane_forward_intensity",
        };
        writeln!(raster, "# t_bar x_bar {name}")?;
        Ok(Self {
            dir,
            grid,
            intensity,
            index,
            density,
            raster,
        })
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.index.flush()?;
        self.density.flush()?;
        self.raster.flush()
    }
}

impl SnapshotSink for SnapshotWriter<'_> {
    fn record(&mut self, snap: &Snapshot) -> io::Result<()> {
        let name = format!("snap_{:09}.csv", snap.step);
        write_snapshot(&self.dir.join(&name), snap, self.grid)?;
        writeln!(self.index, "{},{},{name}", snap.step, fmt_f64(snap.t))?;
        let t = fmt_f64(snap.t);
        let columns = self.grid.x_values().iter().zip(&snap.density);
        for ((x, n), i) in columns.zip(self.intensity.of(snap)) {
            let x = fmt_f64(*x);
            writeln!(self.density, "{t} {x} {}", fmt_f64(*n))?;
            writeln!(self.raster, "{t} {x} {}", fmt_f64(*i))?;
        }
        writeln!(self.density)?;
        writeln!(self.raster)
    }
}

/// Time series of one trajectory record.
pub fn write_record(path: &Path, record: &TrajectoryRecord) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# positions from {:?}", record.source)?;
    writeln!(w, "t_bar,position,width,norm")?;
    for i in 0..record.len() {
        writeln!(
            w,
            "{}",
            row(&[
                record.times[i],
                record.peak_positions[i],
                record.widths[i],
                record.norms[i],
            ])
        )?;
    }
    w.flush()
}

/// (t̄², x̄_max/Λ̄_c) pairs with the fitted curve, displacements measured from
/// the first tracked position.
pub fn write_trajectory_plot(
    path: &Path,
    record: &TrajectoryRecord,
    estimate: &AccelEstimate,
) -> io::Result<()> {
    let lambda = 2.0 * std::f64::consts::PI;
    let mut w = create(path)?;
    writeln!(w, "# gradient = {}", fmt_f64(estimate.gradient))?;
    writeln!(w, "# a_bar_hat = {}", fmt_f64(estimate.a_bar_hat))?;
    writeln!(w, "# columns: t_bar^2, x_max/Lambda_c, fitted x/Lambda_c")?;
    let x0 = record.peak_positions.first().copied().unwrap_or(0.0);
    let c = estimate.coefficients;
    for (t, x) in record.times.iter().zip(&record.peak_positions) {
        let fit = c[1] * t + c[2] * t * t;
        writeln!(
            w,
            "{} {} {}",
            fmt_f64(t * t),
            fmt_f64((x - x0) / lambda),
            fmt_f64(fit / lambda)
        )?;
    }
    w.flush()
}

/// Writes `key = value` lines with an optional trailing comment each.
pub fn write_keyed(
    path: &Path,
    header: &str,
    entries: &[(String, String, String)],
) -> io::Result<()> {
    let mut w = create(path)?;
    write!(w, "{header}")?;
    for (k, v, note) in entries {
        if note.is_empty() {
            writeln!(w, "{k} = {v}")?;
        } else {
            writeln!(w, "{k} = {v}  # {note}")?;
        }
    }
    w.flush()
}

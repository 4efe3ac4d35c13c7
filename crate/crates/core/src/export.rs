//! Text exports: grid snapshots as CSV, images as ASCII PPM and PGM.

use std::io::{self, Write};

use crate::dst::{FrameOfDiscernment, MassFunction};
use crate::grid::{EvidentialGrid, GridSpec, PerceptionGrid};
use crate::render::{GrayImage, RgbImage};

/// Netpbm asks for lines of at most 70 characters.
const MAX_LINE: usize = 70;

fn csv_header(frame: &FrameOfDiscernment) -> Vec<String> {
    let mut header: Vec<String> = ["i", "j", "x_center", "y_center"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(frame.subsets().map(|s| frame.column_name(s)));
    header.push("zeta".into());
    header
}

fn write_cells<'a, W: Write>(
    w: W,
    spec: &GridSpec,
    frame: &FrameOfDiscernment,
    cells: impl Iterator<Item = (&'a MassFunction, f64)>,
) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(csv_header(frame))?;
    for (cell, (m, zeta)) in spec.cells().zip(cells) {
        let (x, y) = spec.center_unchecked(cell);
        let mut row = vec![
            cell.i.to_string(),
            cell.j.to_string(),
            x.to_string(),
            y.to_string(),
        ];
        row.extend(m.masses().iter().map(f64::to_string));
        row.push(zeta.to_string());
        out.write_record(&row)?;
    }
    out.flush()
}

/// One row per cell, row-major from the south-west corner. Masses are
/// written with round-trip precision.
pub fn write_perception_csv<W: Write>(w: W, pg: &PerceptionGrid) -> io::Result<()> {
    let frame = crate::fusion::omega_pg();
    write_cells(
        w,
        pg.spec(),
        frame,
        pg.cells().iter().map(|c| (&c.mass, c.zeta)),
    )
}

/// Like [`write_perception_csv`]; grids without an accumulator get `zeta = 0`.
pub fn write_evidential_csv<W: Write>(w: W, grid: &EvidentialGrid) -> io::Result<()> {
    write_cells(
        w,
        grid.spec(),
        grid.frame(),
        grid.cells().iter().map(|m| (m, 0.0)),
    )
}

fn write_wrapped<W: Write>(w: &mut W, values: impl Iterator<Item = u8>) -> io::Result<()> {
    let mut line = String::new();
    for v in values {
        let token = v.to_string();
        if !line.is_empty() && line.len() + 1 + token.len() > MAX_LINE {
            writeln!(w, "{line}")?;
            line.clear();
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(&token);
    }
    if !line.is_empty() {
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_ppm<W: Write>(mut w: W, img: &RgbImage) -> io::Result<()> {
    writeln!(w, "P3\n{} {}\n255", img.width(), img.height())?;
    write_wrapped(&mut w, img.pixels().iter().flatten().copied())
}

pub fn write_pgm<W: Write>(mut w: W, img: &GrayImage) -> io::Result<()> {
    writeln!(w, "P2\n{} {}\n255", img.width(), img.height())?;
    write_wrapped(&mut w, img.pixels().iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::omega_sg;

    #[test]
    fn csv_has_one_column_per_subset() {
        let spec = GridSpec::new(0.0, 0.0, 0.5, 3, 2).unwrap();
        let mut buf = Vec::new();
        write_perception_csv(&mut buf, &PerceptionGrid::new(spec)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 4 + 32 + 1);
        assert_eq!(header[4], "m_empty");
        assert_eq!(header[5], "m_F");
        assert_eq!(header[35], "m_F_I_U_S_M");
        assert_eq!(header[36], "zeta");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 6);
        assert!(rows[0].starts_with("0,0,0.25,0.25,0,"));
        assert!(rows[0].ends_with(",1,0"));
    }

    #[test]
    fn sensor_grid_csv() {
        let spec = GridSpec::new(0.0, 0.0, 1.0, 1, 1).unwrap();
        let mut buf = Vec::new();
        write_evidential_csv(&mut buf, &EvidentialGrid::new(spec, omega_sg().clone())).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "i,j,x_center,y_center,m_empty,m_F,m_O,m_F_O,zeta\n0,0,0.5,0.5,0,0,0,1,0\n"
        );
    }

    #[test]
    fn ppm_layout() {
        let mut img = RgbImage::new(2, 1);
        img.put(1, 0, [255, 0, 7]);
        let mut buf = Vec::new();
        write_ppm(&mut buf, &img).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "P3\n2 1\n255\n0 0 0 255 0 7\n"
        );
    }

    #[test]
    fn long_rows_wrap() {
        let img = GrayImage::new(40, 3);
        let mut buf = Vec::new();
        write_pgm(&mut buf, &img).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().all(|l| l.len() <= MAX_LINE));
        let values: usize = text.lines().skip(3).map(|l| l.split(' ').count()).sum();
        assert_eq!(values, 120);
    }
}

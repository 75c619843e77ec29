//! Text and image artifact helpers shared by the analysis modules and the CLI.

use std::io::Write;

use crate::error::Result;

/// Formats a double with 17 significant digits so it round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a two-column CSV preceded by a `# header` comment line.
pub fn write_columns<W, A, B>(
    mut w: W,
    header: &str,
    names: (&str, &str),
    rows: impl IntoIterator<Item = (A, B)>,
) -> Result<()>
where
    W: Write,
    A: CsvField,
    B: CsvField,
{
    writeln!(w, "# {header}")?;
    writeln!(w, "{},{}", names.0, names.1)?;
    for (a, b) in rows {
        writeln!(w, "{},{}", a.field(), b.field())?;
    }
    Ok(())
}

pub trait CsvField {
    fn field(&self) -> String;
}

impl CsvField for f64 {
    fn field(&self) -> String {
        fmt_f64(*self)
    }
}

impl CsvField for usize {
    fn field(&self) -> String {
        self.to_string()
    }
}

/// Binary greyscale PGM (`P5`, maxval 255).
///
/// Header layout, each item terminated by a single `\n`:
/// `P5`, one `# comment` line, `width height`, `255`; then `width * height`
/// bytes in row-major order.
pub fn write_pgm<W: Write>(
    mut w: W,
    comment: &str,
    width: usize,
    height: usize,
    pixels: &[u8],
) -> Result<()> {
    assert_eq!(pixels.len(), width * height, "pixel buffer size mismatch");
    write!(
        w,
        "P5\n# {}\n{} {}\n255\n",
        comment.replace('\n', " "),
        width,
        height
    )?;
    w.write_all(pixels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn pgm_header() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, "l=1", 2, 1, &[0, 255]).unwrap();
        assert_eq!(&buf[..], b"P5\n# l=1\n2 1\n255\n\x00\xff");
    }
}

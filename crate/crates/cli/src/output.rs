use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// `key: value` lines.
#[derive(Debug, Default)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn push_num(&mut self, key: &str, value: f64) {
        self.push(key, num(value));
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }
}

/// Gnuplot script drawing the trajectory projection (when there is one),
/// the energy and the constraint residuals into PNG files.
pub fn plot_script(labels: &[String], projection: Option<(usize, usize)>, m: usize) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    if let Some((a, b)) = projection {
        s += &format!(
            "set output 'trajectory.png'\nset size ratio -1\nset xlabel '{}'\nset ylabel '{}'\nplot 'trajectory.csv' using {}:{} with lines\nset size noratio\n",
            labels[a],
            labels[b],
            a + 3,
            b + 3
        );
    }
    s += "set output 'energy.png'\nset xlabel 't'\nset ylabel 'E'\nplot 'energy.csv' using 2:3 with lines\n";
    s += "set output 'constraints.png'\nset ylabel 'residual'\nplot ";
    let curves: Vec<String> = (0..m).map(|a| format!("'constraints.csv' using 2:{} with lines", a + 3)).collect();
    s += &curves.join(", ");
    s += "\n";
    s
}

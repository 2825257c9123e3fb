//! Output directory handling and optional gnuplot scripts.

use std::fs;
use std::path::{Path, PathBuf};

use kuramoto_signed::io::write_atomic;

use crate::failure::{CliResult, Context};

/// How a CSV should be plotted when `--gnuplot` is set.
#[derive(Debug, Clone)]
pub enum Plot {
    /// Columns against column 1; each entry is `(column, title)`.
    Lines {
        xlabel: String,
        ylabel: String,
        series: Vec<(usize, String)>,
        logx: bool,
    },
    /// A `(x, y, z)` surface in columns 1..3 of a row-major grid.
    Surface {
        x: usize,
        y: usize,
        z: usize,
        xlabel: String,
        ylabel: String,
        logx: bool,
    },
}

impl Plot {
    pub fn lines(xlabel: &str, ylabel: &str, series: &[(usize, &str)]) -> Self {
        Plot::Lines {
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            series: series.iter().map(|&(c, t)| (c, t.to_string())).collect(),
            logx: false,
        }
    }

    fn script(&self, csv: &str) -> String {
        let stem = csv.trim_end_matches(".csv");
        let mut s = format!(
            "set datafile separator ','\nset terminal pngcairo size 900,600\nset output '{stem}.png'\nset key autotitle columnhead\n"
        );
        match self {
            Plot::Lines {
                xlabel,
                ylabel,
                series,
                logx,
            } => {
                if *logx {
                    s.push_str("set logscale x\n");
                }
                s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"));
                let parts: Vec<String> = series
                    .iter()
                    .map(|(c, t)| format!("'{csv}' using 1:{c} with lines title '{t}'"))
                    .collect();
                s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
            }
            Plot::Surface {
                x,
                y,
                z,
                xlabel,
                ylabel,
                logx,
            } => {
                if *logx {
                    s.push_str("set logscale x\n");
                }
                s.push_str(&format!(
                    "set xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset view map\nset dgrid3d\n\
                     splot '{csv}' using {x}:{y}:{z} with pm3d notitle\n"
                ));
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
    gnuplot: bool,
}

impl Output {
    pub fn new(dir: &Path, gnuplot: bool) -> CliResult<Self> {
        fs::create_dir_all(dir).context(format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            gnuplot,
        })
    }

    pub fn sub(&self, name: &Path) -> CliResult<Self> {
        Self::new(&self.dir.join(name), self.gnuplot)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes()).context(format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Writes a CSV and, with `--gnuplot`, a `.gp` script next to it.
    pub fn write_csv(&self, name: &str, contents: &str, plot: &Plot) -> CliResult<PathBuf> {
        let path = self.write(name, contents)?;
        if self.gnuplot {
            let script = name.trim_end_matches(".csv").to_string() + ".gp";
            self.write(&script, &plot.script(name))?;
        }
        Ok(path)
    }
}

//! Text dump of trained detectors.
//!
//! ```text
//! propprobe-model 1
//! type logistic
//! dim 3
//! h 0
//! config l2_penalty=1 tolerance=0.0001 max_iterations=100
//! seed -
//! status converged=true iterations=7
//! bias 0.25
//! weights 0.5 -1.25 3
//! ```
//!
//! Floats are written in shortest round-trip form, so a dump reloads to the
//! identical `f64` values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use propprobe_core::embedding::{Pool, WordVector};
use propprobe_core::probes::{
    CentroidModel, LogisticConfig, LogisticModel, MlpConfig, MlpModel, MlpOptimizer, ProbeModel, TrainStatus,
};

use crate::error::{Error, FormatError, Result};

const MAGIC: &str = "propprobe-model 1";

fn floats(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v:?}");
    }
    s
}

fn status_line(s: &TrainStatus) -> String {
    format!("status converged={} iterations={}", s.converged, s.iterations)
}

fn optimizer_str(o: MlpOptimizer) -> String {
    match o {
        MlpOptimizer::Lbfgs => "lbfgs".into(),
        MlpOptimizer::GradientDescent { learning_rate } => format!("gd:{learning_rate:?}"),
    }
}

fn pool_str(p: &Pool) -> String {
    match p {
        Pool::FullVocab => "full-vocab".into(),
        Pool::Prefix(k) => format!("prefix:{k}"),
        Pool::Subset(rows) => {
            let rows: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
            format!("subset:{}", rows.join(","))
        }
    }
}

pub fn dump_model(model: &ProbeModel) -> String {
    let mut out = format!("{MAGIC}\ntype {}\n", model.kind());
    match model {
        ProbeModel::Logistic(m) => {
            let c = &m.config;
            let _ = writeln!(out, "dim {}\nh 0", m.weights.len());
            let _ = writeln!(
                out,
                "config l2_penalty={:?} tolerance={:?} max_iterations={}",
                c.l2_penalty, c.tolerance, c.max_iterations
            );
            let _ = writeln!(out, "seed -\n{}", status_line(&m.status));
            let _ = writeln!(out, "bias {:?}\nweights {}", m.bias, floats(&m.weights));
        }
        ProbeModel::Mlp(m) => {
            let c = &m.config;
            let _ = writeln!(out, "dim {}\nh {}", m.dim, m.hidden_size);
            let _ = writeln!(
                out,
                "config l2_penalty={:?} tolerance={:?} max_iterations={} optimizer={}",
                c.l2_penalty,
                c.tolerance,
                c.max_iterations,
                optimizer_str(c.optimizer)
            );
            let _ = writeln!(out, "seed {}\n{}", m.seed, status_line(&m.status));
            let _ = writeln!(out, "hidden_weights {}", floats(&m.hidden_weights));
            let _ = writeln!(out, "hidden_bias {}", floats(&m.hidden_bias));
            let _ = writeln!(out, "output_weights {}", floats(&m.output_weights));
            let _ = writeln!(out, "output_bias {:?}", m.output_bias);
        }
        ProbeModel::Centroid(m) => {
            let _ = writeln!(out, "dim {}\nh 0", m.centroid.dim());
            let _ = writeln!(out, "config n={} pool={}", m.n, pool_str(&m.pool));
            let _ = writeln!(out, "seed -");
            let _ = writeln!(out, "centroid {}", floats(m.centroid.as_slice()));
        }
    }
    out
}

struct Fields<'a> {
    name: &'a str,
    lines: BTreeMap<String, (usize, String)>,
}

impl Fields<'_> {
    fn get(&self, key: &str) -> Result<(usize, &str)> {
        self.lines
            .get(key)
            .map(|(no, v)| (*no, v.as_str()))
            .ok_or_else(|| FormatError::at_line(self.name, self.lines.len() + 1, format!("missing `{key}` line")).into())
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        FormatError::at_line(self.name, line, msg).into()
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let (no, v) = self.get(key)?;
        v.parse().map_err(|_| self.err(no, format!("bad {key} {v:?}")))
    }

    fn float(&self, key: &str) -> Result<f64> {
        let (no, v) = self.get(key)?;
        v.parse().map_err(|_| self.err(no, format!("bad {key} {v:?}")))
    }

    fn floats(&self, key: &str, len: usize) -> Result<Vec<f64>> {
        let (no, v) = self.get(key)?;
        let vals = v
            .split_ascii_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| self.err(no, format!("bad float {t:?} in {key}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != len {
            return Err(self.err(no, format!("{key}: expected {len} values, got {}", vals.len())));
        }
        Ok(vals)
    }

    /// `key=value` pairs of a line such as `config` or `status`.
    fn pairs(&self, key: &str) -> Result<(usize, BTreeMap<String, String>)> {
        let (no, v) = self.get(key)?;
        let mut map = BTreeMap::new();
        for tok in v.split_ascii_whitespace() {
            let (k, val) = tok
                .split_once('=')
                .ok_or_else(|| self.err(no, format!("expected key=value, got {tok:?}")))?;
            map.insert(k.to_owned(), val.to_owned());
        }
        Ok((no, map))
    }

    fn status(&self) -> Result<TrainStatus> {
        let (no, p) = self.pairs("status")?;
        let converged = p.get("converged").and_then(|v| v.parse().ok());
        let iterations = p.get("iterations").and_then(|v| v.parse().ok());
        match (converged, iterations) {
            (Some(converged), Some(iterations)) => Ok(TrainStatus { converged, iterations }),
            _ => Err(self.err(no, "status needs converged= and iterations=")),
        }
    }
}

fn pick<T: std::str::FromStr>(f: &Fields<'_>, no: usize, map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    map.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| f.err(no, format!("config needs a valid {key}=")))
}

pub fn load_model<R: BufRead>(reader: R, name: &str) -> Result<ProbeModel> {
    let mut lines = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        let line = line.trim();
        if i == 0 {
            if line != MAGIC {
                return Err(FormatError::at_line(name, 1, format!("expected `{MAGIC}`")).into());
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        if lines.insert(key.to_owned(), (i + 1, rest.trim().to_owned())).is_some() {
            return Err(FormatError::at_line(name, i + 1, format!("repeated `{key}` line")).into());
        }
    }
    if lines.is_empty() {
        return Err(FormatError::at_line(name, 1, format!("expected `{MAGIC}`")).into());
    }
    let f = Fields { name, lines };
    let dim = f.usize("dim")?;
    let (tno, kind) = f.get("type")?;
    match kind {
        "logistic" => {
            let (no, c) = f.pairs("config")?;
            let config = LogisticConfig {
                l2_penalty: pick(&f, no, &c, "l2_penalty")?,
                tolerance: pick(&f, no, &c, "tolerance")?,
                max_iterations: pick(&f, no, &c, "max_iterations")?,
            };
            Ok(ProbeModel::Logistic(LogisticModel {
                weights: f.floats("weights", dim)?,
                bias: f.float("bias")?,
                config,
                status: f.status()?,
            }))
        }
        "mlp" => {
            let h = f.usize("h")?;
            let (no, c) = f.pairs("config")?;
            let optimizer = match c.get("optimizer").map(String::as_str) {
                Some("lbfgs") => MlpOptimizer::Lbfgs,
                Some(o) if o.starts_with("gd:") => MlpOptimizer::GradientDescent {
                    learning_rate: o[3..].parse().map_err(|_| f.err(no, format!("bad optimizer {o:?}")))?,
                },
                _ => return Err(f.err(no, "config needs optimizer=lbfgs|gd:<rate>")),
            };
            let (sno, seed) = f.get("seed")?;
            Ok(ProbeModel::Mlp(MlpModel {
                dim,
                hidden_size: h,
                hidden_weights: f.floats("hidden_weights", h * dim)?,
                hidden_bias: f.floats("hidden_bias", h)?,
                output_weights: f.floats("output_weights", h)?,
                output_bias: f.float("output_bias")?,
                seed: seed.parse().map_err(|_| f.err(sno, format!("bad seed {seed:?}")))?,
                config: MlpConfig {
                    l2_penalty: pick(&f, no, &c, "l2_penalty")?,
                    tolerance: pick(&f, no, &c, "tolerance")?,
                    max_iterations: pick(&f, no, &c, "max_iterations")?,
                    optimizer,
                    hidden_size: Some(h),
                },
                status: f.status()?,
            }))
        }
        "centroid" => {
            let (no, c) = f.pairs("config")?;
            let pool = match c.get("pool").map(String::as_str) {
                Some("full-vocab") => Pool::FullVocab,
                Some(p) if p.starts_with("prefix:") => {
                    Pool::Prefix(p[7..].parse().map_err(|_| f.err(no, format!("bad pool {p:?}")))?)
                }
                Some(p) if p.starts_with("subset:") => Pool::Subset(
                    p[7..]
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(|r| r.parse().map_err(|_| f.err(no, format!("bad pool row {r:?}"))))
                        .collect::<Result<Vec<usize>>>()?,
                ),
                _ => return Err(f.err(no, "config needs pool=full-vocab|prefix:<k>|subset:<rows>")),
            };
            let (cno, _) = f.get("centroid")?;
            let centroid = WordVector::new(f.floats("centroid", dim)?).map_err(|e| f.err(cno, e.to_string()))?;
            Ok(ProbeModel::Centroid(CentroidModel {
                centroid,
                n: pick(&f, no, &c, "n")?,
                pool,
            }))
        }
        other => Err(f.err(tno, format!("unknown model type {other:?}"))),
    }
}

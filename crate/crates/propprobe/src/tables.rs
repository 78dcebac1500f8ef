//! Plain-text dataset inputs and outputs.
//!
//! * norms TSV: `concept<TAB>property`
//! * rules TSV: `source<TAB>implies|excludes<TAB>target`
//! * crowd CSV: `word,property,answer`, answer one of yes/mostly/possibly/no
//! * dataset TSV: `# property: <label>` header, then `word<TAB>1|0<TAB>provenance`
//! * hypotheses TSV: `property<TAB>yes|possibly|no`
//! * scenario TSV: header row naming the spec fields, one scenario per row
//!
//! Blank lines and lines starting with `#` are skipped in the line-oriented
//! formats (the dataset header aside).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use propprobe_core::dataset::{
    Answer, CrowdJudgment, ImplicationRule, Label, PropertyDataset, PropertyNormTable, Provenance, RuleKind,
};
use propprobe_core::evaluation::{Expectation, HypothesisEntry};
use propprobe_core::synthbench::{ScenarioKind, ScenarioSpec};

use crate::error::{Error, FormatError, Result};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(contents)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn data_lines<R: BufRead>(reader: R, name: &str) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        out.push((i + 1, trimmed.to_owned()));
    }
    Ok(out)
}

fn fields<'a>(line: &'a str, n: usize, name: &str, line_no: usize, what: &str) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = line.split('\t').map(str::trim).collect();
    if parts.len() != n || parts.iter().any(|p| p.is_empty()) {
        return Err(FormatError::at_line(name, line_no, format!("expected {what}, got {line:?}")).into());
    }
    Ok(parts)
}

pub fn read_norms<R: BufRead>(reader: R, name: &str) -> Result<PropertyNormTable> {
    let mut table = PropertyNormTable::new();
    for (no, line) in data_lines(reader, name)? {
        let f = fields(&line, 2, name, no, "concept<TAB>property")?;
        table
            .insert(f[0], f[1])
            .map_err(|e| FormatError::at_line(name, no, e.to_string()))?;
    }
    Ok(table)
}

pub fn load_norms(path: &Path) -> Result<PropertyNormTable> {
    read_norms(open(path)?, &path.display().to_string())
}

pub fn read_rules<R: BufRead>(reader: R, name: &str) -> Result<Vec<ImplicationRule>> {
    let mut rules = Vec::new();
    for (no, line) in data_lines(reader, name)? {
        let f = fields(&line, 3, name, no, "source<TAB>implies|excludes<TAB>target")?;
        let kind = match f[1] {
            "implies" => RuleKind::Implies,
            "excludes" => RuleKind::Excludes,
            other => {
                return Err(FormatError::at_line(name, no, format!("unknown rule kind {other:?}")).into())
            }
        };
        let rule =
            ImplicationRule::new(f[0], kind, f[2]).map_err(|e| FormatError::at_line(name, no, e.to_string()))?;
        rules.push(rule);
    }
    Ok(rules)
}

pub fn load_rules(path: &Path) -> Result<Vec<ImplicationRule>> {
    read_rules(open(path)?, &path.display().to_string())
}

pub fn write_rules<W: Write>(w: &mut W, rules: &[ImplicationRule]) -> std::io::Result<()> {
    for r in rules {
        let kind = match r.kind {
            RuleKind::Implies => "implies",
            RuleKind::Excludes => "excludes",
        };
        writeln!(w, "{}\t{kind}\t{}", r.source, r.target)?;
    }
    Ok(())
}

/// Crowd judgments. A first row equal to `word,property,answer` is taken as
/// a header.
pub fn read_crowd<R: Read>(reader: R, name: &str) -> Result<Vec<CrowdJudgment>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(i + 1, |p| p.line() as usize);
            FormatError::at_line(name, line, e.to_string())
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && record.iter().eq(["word", "property", "answer"]) {
            continue;
        }
        if record.len() != 3 || record.iter().any(str::is_empty) {
            return Err(FormatError::at_line(name, line, "expected word,property,answer").into());
        }
        let answer = Answer::parse(&record[2])
            .ok_or_else(|| FormatError::at_line(name, line, format!("unknown answer {:?}", &record[2])))?;
        out.push(CrowdJudgment::new(&record[0], &record[1], answer));
    }
    Ok(out)
}

pub fn load_crowd(path: &Path) -> Result<Vec<CrowdJudgment>> {
    read_crowd(open(path)?, &path.display().to_string())
}

pub fn write_crowd<W: Write>(w: &mut W, judgments: &[CrowdJudgment]) -> std::io::Result<()> {
    for j in judgments {
        writeln!(w, "{},{},{}", j.word, j.property, j.answer.as_str())?;
    }
    Ok(())
}

pub fn write_dataset<W: Write>(w: &mut W, dataset: &PropertyDataset) -> std::io::Result<()> {
    writeln!(w, "# property: {}", dataset.property())?;
    for (word, label, prov) in dataset.items() {
        let l = if label.is_positive() { 1 } else { 0 };
        writeln!(w, "{word}\t{l}\t{}", prov.as_str())?;
    }
    Ok(())
}

pub fn save_dataset(path: &Path, dataset: &PropertyDataset) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset(&mut buf, dataset).expect("writing to memory");
    write_file(path, &buf)
}

pub fn read_dataset<R: BufRead>(reader: R, name: &str) -> Result<PropertyDataset> {
    let mut dataset: Option<PropertyDataset> = None;
    for (i, line) in reader.lines().enumerate() {
        let no = i + 1;
        let line = line.map_err(|e| Error::io(name, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(label) = rest.trim().strip_prefix("property:") {
                if dataset.is_some() {
                    return Err(FormatError::at_line(name, no, "second property header").into());
                }
                let label = label.trim();
                if label.is_empty() {
                    return Err(FormatError::at_line(name, no, "empty property label").into());
                }
                dataset = Some(PropertyDataset::new(label));
            }
            continue;
        }
        let Some(ds) = dataset.as_mut() else {
            return Err(FormatError::at_line(name, no, "data before `# property:` header").into());
        };
        let f = fields(line, 3, name, no, "word<TAB>1|0<TAB>provenance")?;
        let label = match f[1] {
            "1" => Label::Positive,
            "0" => Label::Negative,
            other => return Err(FormatError::at_line(name, no, format!("label must be 1 or 0, got {other:?}")).into()),
        };
        let prov = Provenance::parse(f[2])
            .ok_or_else(|| FormatError::at_line(name, no, format!("unknown provenance {:?}", f[2])))?;
        if ds.contains(f[0]) {
            return Err(FormatError::at_line(name, no, format!("word {:?} listed twice", f[0])).into());
        }
        ds.set(f[0], label, prov);
    }
    dataset.ok_or_else(|| FormatError::at_line(name, 1, "missing `# property:` header").into())
}

pub fn load_dataset(path: &Path) -> Result<PropertyDataset> {
    read_dataset(open(path)?, &path.display().to_string())
}

pub fn read_hypotheses<R: BufRead>(reader: R, name: &str) -> Result<Vec<HypothesisEntry>> {
    let mut out = Vec::new();
    for (no, line) in data_lines(reader, name)? {
        let f = fields(&line, 2, name, no, "property<TAB>expected")?;
        let expected = Expectation::parse(f[1])
            .ok_or_else(|| FormatError::at_line(name, no, format!("expected yes|possibly|no, got {:?}", f[1])))?;
        out.push(HypothesisEntry::new(f[0], expected));
    }
    Ok(out)
}

pub fn load_hypotheses(path: &Path) -> Result<Vec<HypothesisEntry>> {
    read_hypotheses(open(path)?, &path.display().to_string())
}

pub fn write_hypotheses<W: Write>(w: &mut W, entries: &[HypothesisEntry]) -> std::io::Result<()> {
    for e in entries {
        writeln!(w, "{}\t{}", e.property, e.expected.as_str())?;
    }
    Ok(())
}

pub const SCENARIO_COLUMNS: [&str; 9] = [
    "kind",
    "dim",
    "n_pos",
    "n_neg",
    "cluster_count",
    "cluster_spread",
    "signal_dims",
    "signal_strength",
    "seed",
];

pub fn write_scenarios<W: Write>(w: &mut W, specs: &[ScenarioSpec]) -> std::io::Result<()> {
    writeln!(w, "{}", SCENARIO_COLUMNS.join("\t"))?;
    for s in specs {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.kind.as_str(),
            s.dim,
            s.n_pos,
            s.n_neg,
            s.cluster_count,
            s.cluster_spread,
            s.signal_dims,
            s.signal_strength,
            s.seed
        )?;
    }
    Ok(())
}

pub fn read_scenarios<R: BufRead>(reader: R, name: &str) -> Result<Vec<ScenarioSpec>> {
    let lines = data_lines(reader, name)?;
    let Some(((hno, header), rows)) = lines.split_first() else {
        return Err(FormatError::at_line(name, 1, "empty scenario file").into());
    };
    let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
    if cols != SCENARIO_COLUMNS {
        return Err(FormatError::at_line(name, *hno, format!("header must be {}", SCENARIO_COLUMNS.join(" "))).into());
    }
    let mut out = Vec::new();
    for (no, line) in rows {
        let f = fields(line, SCENARIO_COLUMNS.len(), name, *no, "one value per scenario column")?;
        let bad = |col: &str| FormatError::at_line(name, *no, format!("bad {col} {:?}", f[SCENARIO_COLUMNS.iter().position(|c| *c == col).unwrap()]));
        let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad(SCENARIO_COLUMNS[i]));
        let real = |i: usize| f[i].parse::<f64>().map_err(|_| bad(SCENARIO_COLUMNS[i]));
        let spec = ScenarioSpec {
            kind: ScenarioKind::parse(f[0]).ok_or_else(|| bad("kind"))?,
            dim: int(1)?,
            n_pos: int(2)?,
            n_neg: int(3)?,
            cluster_count: int(4)?,
            cluster_spread: real(5)?,
            signal_dims: int(6)?,
            signal_strength: real(7)?,
            seed: f[8].parse::<u64>().map_err(|_| bad("seed"))?,
        };
        spec.validate()
            .map_err(|e| FormatError::at_line(name, *no, e.to_string()))?;
        out.push(spec);
    }
    Ok(out)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<ScenarioSpec>> {
    read_scenarios(open(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_collapse_duplicates() {
        let t = read_norms(&b"falcon\tis_a_bird\nfalcon\thas_a_beak\n\nfalcon\tis_a_bird\n"[..], "n").unwrap();
        let props: Vec<&str> = t.properties_of("falcon").unwrap().iter().map(String::as_str).collect();
        assert_eq!(props, ["has_a_beak", "is_a_bird"]);
    }

    #[test]
    fn malformed_norm_line_has_line_number() {
        let Err(Error::Format(e)) = read_norms(&b"a\tb\n# note\nbroken line\n"[..], "n") else { panic!() };
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn rules_parse() {
        let r = read_rules(&b"is_a_bird\timplies\tis_an_animal\nis_food\texcludes\thas_wheels\n"[..], "r").unwrap();
        assert_eq!(r, propprobe_core::dataset::default_rules());
        let Err(Error::Format(e)) = read_rules(&b"a\tsuggests\tb\n"[..], "r") else { panic!() };
        assert_eq!(e.line, Some(1));
        assert!(read_rules(&b"a\timplies\ta\n"[..], "r").is_err());
    }

    #[test]
    fn crowd_csv_with_optional_header() {
        let j = read_crowd(&b"word,property,answer\nbikini,is_pink,possibly\ntiger,is_dangerous,yes\n"[..], "c").unwrap();
        assert_eq!(j.len(), 2);
        assert_eq!(j[0].answer, Answer::Possibly);
        let Err(Error::Format(e)) = read_crowd(&b"a,b,yes\nc,d,sometimes\n"[..], "c") else { panic!() };
        assert_eq!(e.line, Some(2));
        assert!(read_crowd(&b""[..], "c").unwrap().is_empty());
    }

    #[test]
    fn dataset_round_trip() {
        let mut d = PropertyDataset::new("has_wheels");
        d.set("car", Label::Positive, Provenance::Norm);
        d.set("banana", Label::Negative, Provenance::Implied);
        d.set("sledge", Label::Positive, Provenance::SeedExpansion);
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "# property: has_wheels\nbanana\t0\timplied\ncar\t1\tnorm\nsledge\t1\tseed-expansion\n"
        );
        assert_eq!(read_dataset(&buf[..], "d").unwrap(), d);
        assert!(read_dataset(&b"car\t1\tnorm\n"[..], "d").is_err());
        let Err(Error::Format(e)) = read_dataset(&b"# property: p\ncar\t2\tnorm\n"[..], "d") else { panic!() };
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn hypotheses_round_trip() {
        let h = propprobe_core::evaluation::default_hypotheses();
        let mut buf = Vec::new();
        write_hypotheses(&mut buf, &h).unwrap();
        assert_eq!(read_hypotheses(&buf[..], "h").unwrap(), h);
        assert!(read_hypotheses(&b"is_red\tmaybe\n"[..], "h").is_err());
    }

    #[test]
    fn scenarios_round_trip() {
        let specs = propprobe_core::synthbench::standard_battery();
        let mut buf = Vec::new();
        write_scenarios(&mut buf, &specs).unwrap();
        assert_eq!(read_scenarios(&buf[..], "s").unwrap(), specs);
        let bad = b"kind\tdim\tn_pos\tn_neg\tcluster_count\tcluster_spread\tsignal_dims\tsignal_strength\tseed\nabsent\t5\t3\t20\t2\t0.1\t1\t0\t1\n";
        let Err(Error::Format(e)) = read_scenarios(&bad[..], "s") else { panic!() };
        assert_eq!(e.line, Some(2));
    }
}

//! word2vec binary and text embedding files.
//!
//! Both start with an ASCII header `<vocab_size> <dim>\n`. Binary entries are
//! `token 0x20 <dim × f32 little-endian>` with an optional `\n` after each
//! vector; text entries are `token v1 … vdim` lines.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use propprobe_core::EmbeddingMatrix;

use crate::error::{Error, FormatError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Binary,
    Text,
}

impl EmbeddingFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingFormat::Binary => "word2vec-binary",
            EmbeddingFormat::Text => "word2vec-text",
        }
    }
}

impl FromStr for EmbeddingFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "word2vec-binary" | "binary" | "bin" => Ok(EmbeddingFormat::Binary),
            "word2vec-text" | "text" | "txt" => Ok(EmbeddingFormat::Text),
            other => Err(format!("unknown embedding format {other:?}")),
        }
    }
}

/// Loads an embedding file. `max_vocab` keeps only the first entries, which
/// word2vec files order by corpus frequency.
pub fn load_embeddings(path: &Path, format: EmbeddingFormat, max_vocab: Option<usize>) -> Result<EmbeddingMatrix> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(Error::MissingEmbeddings(path.to_owned()))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    let name = path.display().to_string();
    let reader = BufReader::with_capacity(1 << 20, file);
    match format {
        EmbeddingFormat::Binary => read_binary(reader, &name, max_vocab),
        EmbeddingFormat::Text => read_text(reader, &name, max_vocab),
    }
}

pub fn save_embeddings(path: &Path, format: EmbeddingFormat, matrix: &EmbeddingMatrix) -> Result<()> {
    let mut w = crate::tables::create(path)?;
    let res = match format {
        EmbeddingFormat::Binary => write_binary(&mut w, matrix),
        EmbeddingFormat::Text => write_text(&mut w, matrix),
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn parse_header(line: &str, name: &str, line_no: usize) -> std::result::Result<(usize, usize), FormatError> {
    let bad = |msg: &str| FormatError::at_line(name, line_no, format!("malformed header {line:?}: {msg}"));
    let mut parts = line.split_ascii_whitespace();
    let (Some(v), Some(d), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(bad("expected `<vocab_size> <dim>`"));
    };
    let vocab: usize = v.parse().map_err(|_| bad("vocab size is not an integer"))?;
    let dim: usize = d.parse().map_err(|_| bad("dim is not an integer"))?;
    if dim == 0 {
        return Err(bad("dim must be positive"));
    }
    Ok((vocab, dim))
}

/// Byte reader that tracks its absolute offset for error messages.
struct Tracked<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> Tracked<R> {
    fn fill(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, n: usize) {
        self.inner.consume(n);
        self.offset += n as u64;
    }

    /// Reads up to (not including) `delim`, consuming the delimiter.
    /// Returns `None` at clean end of input.
    fn read_until(&mut self, delim: u8, out: &mut Vec<u8>) -> io::Result<Option<()>> {
        out.clear();
        loop {
            let buf = self.fill()?;
            if buf.is_empty() {
                return Ok(if out.is_empty() { None } else { Some(()) });
            }
            match buf.iter().position(|&b| b == delim) {
                Some(i) => {
                    out.extend_from_slice(&buf[..i]);
                    self.consume(i + 1);
                    return Ok(Some(()));
                }
                None => {
                    let n = buf.len();
                    out.extend_from_slice(buf);
                    self.consume(n);
                }
            }
        }
    }

    /// Fills `out` completely; returns how many bytes were available.
    fn read_full(&mut self, out: &mut [u8]) -> io::Result<usize> {
        let mut got = 0;
        while got < out.len() {
            let n = self.inner.read(&mut out[got..])?;
            if n == 0 {
                break;
            }
            got += n;
            self.offset += n as u64;
        }
        Ok(got)
    }

    fn skip_newlines(&mut self) -> io::Result<()> {
        loop {
            let buf = self.fill()?;
            let n = buf.iter().take_while(|&&b| b == b'\n' || b == b'\r').count();
            if n == 0 {
                return Ok(());
            }
            let whole = n == buf.len();
            self.consume(n);
            if !whole {
                return Ok(());
            }
        }
    }
}

pub fn read_binary<R: BufRead>(reader: R, name: &str, max_vocab: Option<usize>) -> Result<EmbeddingMatrix> {
    let mut r = Tracked {
        inner: reader,
        offset: 0,
    };
    let io_err = |e: io::Error| Error::io(name, e);
    let mut line = Vec::new();
    if r.read_until(b'\n', &mut line).map_err(io_err)?.is_none() {
        return Err(FormatError::at_line(name, 1, "empty file").into());
    }
    let header = std::str::from_utf8(&line).map_err(|_| FormatError::at_line(name, 1, "header is not ASCII"))?;
    let (declared, dim) = parse_header(header, name, 1)?;
    let count = max_vocab.map_or(declared, |k| k.min(declared));

    let mut vocab = Vec::with_capacity(count);
    let mut data = Vec::with_capacity(count * dim);
    let mut payload = vec![0u8; dim * 4];
    let mut token = Vec::new();
    for entry in 0..count {
        r.skip_newlines().map_err(io_err)?;
        let start = r.offset;
        if r.read_until(b' ', &mut token).map_err(io_err)?.is_none() {
            return Err(FormatError::at_offset(
                name,
                start,
                format!("file ends after {entry} of {declared} declared entries"),
            )
            .into());
        }
        if token.is_empty() {
            return Err(FormatError::at_offset(name, start, "empty token").into());
        }
        let word = String::from_utf8(std::mem::take(&mut token))
            .map_err(|_| FormatError::at_offset(name, start, "token is not valid UTF-8"))?;
        let vec_start = r.offset;
        let got = r.read_full(&mut payload).map_err(io_err)?;
        if got < payload.len() {
            return Err(FormatError::at_offset(
                name,
                vec_start + got as u64,
                format!("truncated vector for {word:?}: {got} of {} bytes", payload.len()),
            )
            .into());
        }
        data.extend(
            payload
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        );
        vocab.push(word);
    }
    Ok(EmbeddingMatrix::from_rows(vocab, dim, data)?)
}

pub fn read_text<R: BufRead>(reader: R, name: &str, max_vocab: Option<usize>) -> Result<EmbeddingMatrix> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l.map_err(|e| Error::io(name, e))?,
        None => return Err(FormatError::at_line(name, 1, "empty file").into()),
    };
    let (declared, dim) = parse_header(&header, name, 1)?;
    let count = max_vocab.map_or(declared, |k| k.min(declared));

    let mut vocab = Vec::with_capacity(count);
    let mut data = Vec::with_capacity(count * dim);
    let mut last_line = 1;
    while vocab.len() < count {
        let Some((i, l)) = lines.next() else {
            return Err(FormatError::at_line(
                name,
                last_line + 1,
                format!("file ends after {} of {declared} declared entries", vocab.len()),
            )
            .into());
        };
        let line_no = i + 1;
        last_line = line_no;
        let l = l.map_err(|e| Error::io(name, e))?;
        if l.trim().is_empty() {
            continue;
        }
        let mut fields = l.split_ascii_whitespace();
        let token = fields.next().expect("non-blank line has a field");
        let before = data.len();
        for f in fields {
            let v: f32 = f
                .parse()
                .map_err(|_| FormatError::at_line(name, line_no, format!("bad float {f:?}")))?;
            data.push(v);
        }
        if data.len() - before != dim {
            return Err(FormatError::at_line(
                name,
                line_no,
                format!("{token:?} has {} values, expected {dim}", data.len() - before),
            )
            .into());
        }
        vocab.push(token.to_owned());
    }
    if max_vocab.map_or(true, |k| k >= declared) {
        for (i, l) in lines {
            let l = l.map_err(|e| Error::io(name, e))?;
            if !l.trim().is_empty() {
                return Err(FormatError::at_line(name, i + 1, format!("more entries than the declared {declared}")).into());
            }
        }
    }
    Ok(EmbeddingMatrix::from_rows(vocab, dim, data)?)
}

pub fn write_binary<W: Write>(w: &mut W, matrix: &EmbeddingMatrix) -> io::Result<()> {
    writeln!(w, "{} {}", matrix.len(), matrix.dim())?;
    for i in 0..matrix.len() {
        w.write_all(matrix.token(i).as_bytes())?;
        w.write_all(b" ")?;
        for v in matrix.row(i) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Floats are written in their shortest round-tripping decimal form, so a
/// text file reloads to bitwise-identical `f32` values.
pub fn write_text<W: Write>(w: &mut W, matrix: &EmbeddingMatrix) -> io::Result<()> {
    writeln!(w, "{} {}", matrix.len(), matrix.dim())?;
    for i in 0..matrix.len() {
        w.write_all(matrix.token(i).as_bytes())?;
        for v in matrix.row(i) {
            write!(w, " {v}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(header: &str, entries: &[(&str, &[f32])], newline: bool) -> Vec<u8> {
        let mut out = header.as_bytes().to_vec();
        for (t, v) in entries {
            out.extend_from_slice(t.as_bytes());
            out.push(b' ');
            for x in *v {
                out.extend_from_slice(&x.to_le_bytes());
            }
            if newline {
                out.push(b'\n');
            }
        }
        out
    }

    #[test]
    fn binary_header_forces_shape() {
        for newline in [true, false] {
            let b = bin("2 3\n", &[("cat", &[1.0, 2.0, 3.0]), ("dog", &[4.0, 5.0, 6.0])], newline);
            let m = read_binary(&b[..], "t", None).unwrap();
            assert_eq!(m.vocab(), ["cat", "dog"]);
            assert_eq!(m.dim(), 3);
            assert_eq!(m.row(1), [4.0, 5.0, 6.0]);
        }
    }

    #[test]
    fn text_literal_parse() {
        let m = read_text(&b"1 2\nking 0.5 -0.5\n"[..], "t", None).unwrap();
        assert_eq!(m.vocab(), ["king"]);
        assert_eq!(m.row(0), [0.5, -0.5]);
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let mut b = bin("2 3\n", &[("cat", &[1.0, 2.0, 3.0]), ("dog", &[4.0, 5.0, 6.0])], true);
        b.truncate(b.len() - 6);
        let Err(Error::Format(e)) = read_binary(&b[..], "t", None) else { panic!() };
        // header 4 + cat entry 4+12+1 + "dog " 4, then 7 of 12 payload bytes
        assert_eq!(e.offset, Some(4 + 17 + 4 + 7));
    }

    #[test]
    fn malformed_headers() {
        for h in ["", "2\n", "a b\n", "2 0\n", "1 2 3\n"] {
            assert!(matches!(read_binary(h.as_bytes(), "t", None), Err(Error::Format(_))), "{h:?}");
            assert!(matches!(read_text(h.as_bytes(), "t", None), Err(Error::Format(_))), "{h:?}");
        }
    }

    #[test]
    fn duplicate_token_is_named() {
        let b = bin("2 1\n", &[("cat", &[1.0]), ("cat", &[2.0])], true);
        assert!(matches!(
            read_binary(&b[..], "t", None),
            Err(Error::Core(propprobe_core::Error::DuplicateToken(t))) if t == "cat"
        ));
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let Err(Error::Format(e)) = read_text(&b"2 2\na 1 2\nb 1\n"[..], "t", None) else { panic!() };
        assert_eq!(e.line, Some(3));
        let Err(Error::Format(e)) = read_text(&b"2 2\na 1 x\n"[..], "t", None) else { panic!() };
        assert_eq!(e.line, Some(2));
        let Err(Error::Format(e)) = read_text(&b"1 2\na 1 2\nb 3 4\n"[..], "t", None) else { panic!() };
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn max_vocab_truncates() {
        let b = bin("3 1\n", &[("a", &[1.0]), ("b", &[2.0]), ("c", &[3.0])], true);
        let m = read_binary(&b[..], "t", Some(2)).unwrap();
        assert_eq!(m.vocab(), ["a", "b"]);
        let m = read_text(&b"3 1\na 1\nb 2\nc 3\n"[..], "t", Some(1)).unwrap();
        assert_eq!(m.vocab(), ["a"]);
    }
}

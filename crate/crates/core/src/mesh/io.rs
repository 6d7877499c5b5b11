//! ASCII OFF, PLY and OBJ readers and writers.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Ply,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let ext = path
            .as_ref()
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        ext.parse()
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(Self::Off),
            "ply" => Ok(Self::Ply),
            "obj" => Ok(Self::Obj),
            other => Err(Error::Unsupported(format!(
                "mesh format '{other}' (expected off, ply or obj)"
            ))),
        }
    }
}

impl fmt::Display for MeshFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Off => "off",
            Self::Ply => "ply",
            Self::Obj => "obj",
        })
    }
}

pub fn load_mesh<T: Real>(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_mesh(BufReader::new(file), format)
}

pub fn save_mesh<T: Real>(
    mesh: &TriangleMesh<T>,
    path: impl AsRef<Path>,
    format: MeshFormat,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_mesh(mesh, &mut w, format)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_mesh<T: Real, R: Read>(reader: R, format: MeshFormat) -> Result<TriangleMesh<T>> {
    let mut lines = Lines::new(BufReader::new(reader));
    let (vertices, faces) = match format {
        MeshFormat::Off => read_off(&mut lines)?,
        MeshFormat::Ply => read_ply(&mut lines)?,
        MeshFormat::Obj => read_obj(&mut lines)?,
    };
    TriangleMesh::new(vertices, faces)
}

pub fn write_mesh<T: Real, W: Write>(
    mesh: &TriangleMesh<T>,
    w: &mut W,
    format: MeshFormat,
) -> std::io::Result<()> {
    let (nv, nf) = (mesh.vertex_count(), mesh.face_count());
    match format {
        MeshFormat::Off => {
            writeln!(w, "OFF")?;
            writeln!(w, "{nv} {nf} 0")?;
            for v in mesh.vertices() {
                writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
            }
            for f in mesh.faces() {
                writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
        MeshFormat::Ply => {
            writeln!(w, "ply")?;
            writeln!(w, "format ascii 1.0")?;
            writeln!(w, "element vertex {nv}")?;
            for axis in ["x", "y", "z"] {
                writeln!(w, "property double {axis}")?;
            }
            writeln!(w, "element face {nf}")?;
            writeln!(w, "property list uchar int vertex_indices")?;
            writeln!(w, "end_header")?;
            for v in mesh.vertices() {
                writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
            }
            for f in mesh.faces() {
                writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
        MeshFormat::Obj => {
            for v in mesh.vertices() {
                writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
            }
            for f in mesh.faces() {
                writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
        }
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R> Lines<R> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Self {
            inner: r.lines(),
            line: 0,
        }
    }

    /// Next line with comments stripped; `None` at end of input.
    fn next_raw(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(Err(e)) => Err(self.err(format!("read failure: {e}"))),
            Some(Ok(l)) => {
                self.line += 1;
                let l = match l.find('#') {
                    Some(i) => l[..i].to_string(),
                    None => l,
                };
                Ok(Some(l.trim().to_string()))
            }
        }
    }

    fn next_content(&mut self) -> Result<String> {
        loop {
            match self.next_raw()? {
                None => return Err(self.err("unexpected end of file")),
                Some(l) if l.is_empty() => continue,
                Some(l) => return Ok(l),
            }
        }
    }
}

fn parse_num<N: FromStr, R>(lines: &Lines<R>, tok: Option<&str>, what: &str) -> Result<N> {
    let tok = tok.ok_or_else(|| lines.err(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| lines.err(format!("cannot parse {what} from '{tok}'")))
}

fn parse_point<T: Real, R>(lines: &Lines<R>, toks: &mut std::str::SplitWhitespace) -> Result<Vec3<T>> {
    let x: f64 = parse_num(lines, toks.next(), "x coordinate")?;
    let y: f64 = parse_num(lines, toks.next(), "y coordinate")?;
    let z: f64 = parse_num(lines, toks.next(), "z coordinate")?;
    Ok(Vec3::new(T::lit(x), T::lit(y), T::lit(z)))
}

fn triangle<R>(lines: &Lines<R>, idx: &[usize]) -> Result<[usize; 3]> {
    match idx {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(lines.err(format!(
            "only triangles are supported, found a {}-gon",
            idx.len()
        ))),
    }
}

type Raw<T> = (Vec<Vec3<T>>, Vec<[usize; 3]>);

fn read_off<T: Real, R: BufRead>(lines: &mut Lines<R>) -> Result<Raw<T>> {
    let header = lines.next_content()?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| lines.err("missing OFF header"))?
        .trim()
        .to_string();
    let counts = if rest.is_empty() { lines.next_content()? } else { rest };
    let mut toks = counts.split_whitespace();
    let nv: usize = parse_num(lines, toks.next(), "vertex count")?;
    let nf: usize = parse_num(lines, toks.next(), "face count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = lines.next_content()?;
        vertices.push(parse_point(lines, &mut l.split_whitespace())?);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let l = lines.next_content()?;
        let mut toks = l.split_whitespace();
        let n: usize = parse_num(lines, toks.next(), "polygon size")?;
        let idx = (0..n)
            .map(|_| parse_num(lines, toks.next(), "vertex index"))
            .collect::<Result<Vec<usize>>>()?;
        faces.push(triangle(lines, &idx)?);
    }
    Ok((vertices, faces))
}

struct PlyElement {
    name: String,
    count: usize,
    props: Vec<String>,
    list_prop: Option<String>,
}

fn read_ply<T: Real, R: BufRead>(lines: &mut Lines<R>) -> Result<Raw<T>> {
    if lines.next_content()? != "ply" {
        return Err(lines.err("missing 'ply' magic"));
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    loop {
        let l = lines.next_content()?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", _] => {}
            ["format", fmt, ..] => {
                return Err(Error::Unsupported(format!(
                    "PLY format '{fmt}': only ascii PLY is supported"
                )))
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => elements.push(PlyElement {
                name: name.to_string(),
                count: parse_num(lines, Some(count), "element count")?,
                props: Vec::new(),
                list_prop: None,
            }),
            ["property", "list", _, _, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| lines.err("property before element"))?;
                el.list_prop = Some(name.to_string());
            }
            ["property", _, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| lines.err("property before element"))?;
                el.props.push(name.to_string());
            }
            ["end_header"] => break,
            _ => return Err(lines.err(format!("unrecognised PLY header line '{l}'"))),
        }
    }
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for el in &elements {
        match el.name.as_str() {
            "vertex" => {
                let pos = |axis: &str| {
                    el.props
                        .iter()
                        .position(|p| p == axis)
                        .ok_or_else(|| lines.err(format!("vertex element lacks '{axis}'")))
                };
                let (ix, iy, iz) = (pos("x")?, pos("y")?, pos("z")?);
                for _ in 0..el.count {
                    let l = lines.next_content()?;
                    let toks: Vec<&str> = l.split_whitespace().collect();
                    let get = |i: usize| -> Result<T> {
                        let v: f64 = parse_num(lines, toks.get(i).copied(), "vertex property")?;
                        Ok(T::lit(v))
                    };
                    vertices.push(Vec3::new(get(ix)?, get(iy)?, get(iz)?));
                }
            }
            "face" => {
                for _ in 0..el.count {
                    let l = lines.next_content()?;
                    let mut toks = l.split_whitespace();
                    let n: usize = parse_num(lines, toks.next(), "polygon size")?;
                    let idx = (0..n)
                        .map(|_| parse_num(lines, toks.next(), "vertex index"))
                        .collect::<Result<Vec<usize>>>()?;
                    faces.push(triangle(lines, &idx)?);
                }
            }
            _ => {
                for _ in 0..el.count {
                    lines.next_content()?;
                }
            }
        }
    }
    Ok((vertices, faces))
}

fn read_obj<T: Real, R: BufRead>(lines: &mut Lines<R>) -> Result<Raw<T>> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    while let Some(l) = lines.next_raw()? {
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("v") => vertices.push(parse_point(lines, &mut toks)?),
            Some("f") => {
                let idx = toks
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: usize = parse_num(lines, Some(head), "vertex index")?;
                        if i == 0 {
                            return Err(lines.err("OBJ indices are 1-based; found 0"));
                        }
                        Ok(i - 1)
                    })
                    .collect::<Result<Vec<usize>>>()?;
                faces.push(triangle(lines, &idx)?);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::icosphere;

    const TETRA_OFF: &str = "OFF\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n\
                             3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn tetra_off() {
        let m: TriangleMesh<f64> = read_mesh(TETRA_OFF.as_bytes(), MeshFormat::Off).unwrap();
        assert_eq!(m.report().euler_characteristic, 2);
    }

    #[test]
    fn out_of_range_index() {
        let bad = TETRA_OFF.replace("3 1 3 2", "3 1 3 4");
        let err = read_mesh::<f64, _>(bad.as_bytes(), MeshFormat::Off).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)), "{err}");
    }

    #[test]
    fn malformed_is_parse_error() {
        let bad = TETRA_OFF.replace("-1 1 -1", "-1 one -1");
        let err = read_mesh::<f64, _>(bad.as_bytes(), MeshFormat::Off).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
    }

    #[test]
    fn binary_ply_rejected() {
        let ply = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        let err = read_mesh::<f64, _>(ply.as_bytes(), MeshFormat::Ply).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn quads_rejected() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(read_mesh::<f64, _>(obj.as_bytes(), MeshFormat::Obj).is_err());
    }

    #[test]
    fn obj_with_slashes_and_comments() {
        let obj = "# comment\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nf 1/1/1 2/2/1 3/3/1\n";
        let m: TriangleMesh<f64> = read_mesh(obj.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn icosphere_ply_has_no_boundary() {
        let m = icosphere(1.0f64, 4);
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf, MeshFormat::Ply).unwrap();
        let back: TriangleMesh<f64> = read_mesh(buf.as_slice(), MeshFormat::Ply).unwrap();
        assert_eq!(back.vertex_count(), 2562);
        assert_eq!(back.report().boundary_edges, 0);
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(MeshFormat::from_path("a/b.OBJ").unwrap(), MeshFormat::Obj);
        assert!(MeshFormat::from_path("a.stl").is_err());
    }
}

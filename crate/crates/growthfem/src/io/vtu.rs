//! XML VTK unstructured grids with base64 inline binary arrays (UInt64 headers, little endian).
//! Cells are quadratic tetrahedra (VTK type 24), whose edge-node order matches the mesh.

use std::collections::BTreeMap;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use growthfem_core::element::{ElementEnergy, MixedElementState};
use growthfem_core::mesh::Mesh;
use growthfem_core::Vec3;
use quick_xml::events::Event;
use quick_xml::Reader;

use crate::error::IoError;

pub const VTK_QUADRATIC_TETRA: u8 = 24;

/// Solution fields attached to a mesh.
pub struct FieldData<'a> {
    pub displacement: &'a [Vec3],
    pub mixed: &'a [MixedElementState],
    pub energies: &'a [ElementEnergy],
}

enum Values<'a> {
    F64(&'a [f64]),
    I64(&'a [i64]),
    U8(&'a [u8]),
}

fn data_array(out: &mut String, name: &str, components: usize, values: Values<'_>) {
    let (ty, bytes): (&str, Vec<u8>) = match values {
        Values::F64(v) => ("Float64", v.iter().flat_map(|x| x.to_le_bytes()).collect()),
        Values::I64(v) => ("Int64", v.iter().flat_map(|x| x.to_le_bytes()).collect()),
        Values::U8(v) => ("UInt8", v.to_vec()),
    };
    let mut block = (bytes.len() as u64).to_le_bytes().to_vec();
    block.extend_from_slice(&bytes);
    out.push_str(&format!(
        "        <DataArray type=\"{ty}\" Name=\"{name}\" NumberOfComponents=\"{components}\" format=\"binary\">\n          {}\n        </DataArray>\n",
        STANDARD.encode(&block)
    ));
}

/// Serializes `mesh` (and fields, when given) to VTU text.
pub fn vtu_string(mesh: &Mesh, fields: Option<&FieldData<'_>>) -> String {
    let n_cells = mesh.num_cells();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n");
    out.push_str(
        "<VTKFile type=\"UnstructuredGrid\" version=\"1.0\" byte_order=\"LittleEndian\" header_type=\"UInt64\">\n",
    );
    out.push_str("  <UnstructuredGrid>\n");
    out.push_str(&format!("    <Piece NumberOfPoints=\"{}\" NumberOfCells=\"{n_cells}\">\n", mesh.num_nodes()));

    if let Some(f) = fields {
        out.push_str("      <PointData Vectors=\"displacement\">\n");
        let u: Vec<f64> = f.displacement.iter().flat_map(|v| v.0).collect();
        data_array(&mut out, "displacement", 3, Values::F64(&u));
        out.push_str("      </PointData>\n");
    }
    out.push_str("      <CellData Scalars=\"region\">\n");
    let regions: Vec<u8> = mesh.regions.iter().map(|r| r.tag()).collect();
    data_array(&mut out, "region", 1, Values::U8(&regions));
    if let Some(f) = fields {
        let per_cell = |get: &dyn Fn(usize) -> f64| (0..n_cells).map(get).collect::<Vec<f64>>();
        let scalars: [(&str, Vec<f64>); 7] = [
            ("pressure", per_cell(&|c| f.mixed[c].p)),
            ("theta", per_cell(&|c| f.mixed[c].theta)),
            ("fiber_stress", per_cell(&|c| f.mixed[c].s)),
            ("fiber_stretch", per_cell(&|c| f.mixed[c].lambda_bar)),
            ("psi_iso_density", per_cell(&|c| f.energies[c].iso / mesh.cell_volume(c))),
            ("psi_vol_density", per_cell(&|c| f.energies[c].vol / mesh.cell_volume(c))),
            ("psi_ani_density", per_cell(&|c| f.energies[c].ani / mesh.cell_volume(c))),
        ];
        for (name, values) in &scalars {
            data_array(&mut out, name, 1, Values::F64(values));
        }
    }
    out.push_str("      </CellData>\n");

    out.push_str("      <Points>\n");
    let points: Vec<f64> = mesh.nodes.iter().flat_map(|v| v.0).collect();
    data_array(&mut out, "Points", 3, Values::F64(&points));
    out.push_str("      </Points>\n");

    out.push_str("      <Cells>\n");
    let connectivity: Vec<i64> = mesh.cells.iter().flatten().map(|&n| n as i64).collect();
    let offsets: Vec<i64> = (1..=n_cells).map(|c| 10 * c as i64).collect();
    data_array(&mut out, "connectivity", 1, Values::I64(&connectivity));
    data_array(&mut out, "offsets", 1, Values::I64(&offsets));
    data_array(&mut out, "types", 1, Values::U8(&vec![VTK_QUADRATIC_TETRA; n_cells]));
    out.push_str("      </Cells>\n");
    out.push_str("    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n");
    out
}

pub fn write_vtu(path: &Path, mesh: &Mesh, fields: Option<&FieldData<'_>>) -> Result<(), IoError> {
    std::fs::write(path, vtu_string(mesh, fields)).map_err(|e| IoError::io(path, e))
}

pub fn write_vtu_mesh(path: &Path, mesh: &Mesh) -> Result<(), IoError> {
    write_vtu(path, mesh, None)
}

/// ParaView collection indexing a VTU sequence by growth level; `frames` holds `(g, relative path)`.
pub fn write_pvd(path: &Path, frames: &[(f64, String)]) -> Result<(), IoError> {
    let mut out = String::from("<?xml version=\"1.0\"?>\n<VTKFile type=\"Collection\" version=\"1.0\">\n  <Collection>\n");
    for (g, file) in frames {
        out.push_str(&format!("    <DataSet timestep=\"{g:.16e}\" part=\"0\" file=\"{file}\"/>\n"));
    }
    out.push_str("  </Collection>\n</VTKFile>\n");
    std::fs::write(path, out).map_err(|e| IoError::io(path, e))
}

/// One decoded `DataArray`, converted to `f64` (integer arrays are exact below 2⁵³).
#[derive(Clone, Debug, PartialEq)]
pub struct Array {
    pub components: usize,
    pub values: Vec<f64>,
}

/// Contents of a VTU file as written by [`write_vtu`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtuFile {
    pub num_points: usize,
    pub num_cells: usize,
    pub points: Vec<[f64; 3]>,
    pub connectivity: Vec<usize>,
    pub offsets: Vec<usize>,
    pub types: Vec<u8>,
    pub point_data: BTreeMap<String, Array>,
    pub cell_data: BTreeMap<String, Array>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    PointData,
    CellData,
    Points,
    Cells,
}

struct PendingArray {
    name: String,
    ty: String,
    components: usize,
    section: Section,
}

fn decode(ty: &str, text: &str) -> Result<Vec<f64>, String> {
    let raw = STANDARD.decode(text.trim()).map_err(|e| format!("base64: {e}"))?;
    if raw.len() < 8 {
        return Err("data block shorter than its header".into());
    }
    let declared = u64::from_le_bytes(raw[..8].try_into().expect("8 bytes")) as usize;
    let body = &raw[8..];
    if declared != body.len() {
        return Err(format!("header declares {declared} bytes, block holds {}", body.len()));
    }
    let words = |w: usize| -> Result<std::slice::ChunksExact<'_, u8>, String> {
        if body.len() % w != 0 {
            return Err(format!("{} bytes is not a whole number of {ty} values", body.len()));
        }
        Ok(body.chunks_exact(w))
    };
    Ok(match ty {
        "Float64" => words(8)?.map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect(),
        "Int64" => words(8)?.map(|c| i64::from_le_bytes(c.try_into().expect("8 bytes")) as f64).collect(),
        "UInt8" => body.iter().map(|&b| b as f64).collect(),
        other => return Err(format!("unsupported DataArray type {other}")),
    })
}

/// Parses a VTU document and checks its structure: root and piece elements, array lengths
/// against the declared point/cell counts, offsets and cell types.
pub fn parse_vtu(text: &str) -> Result<VtuFile, String> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut file = VtuFile::default();
    let mut section = Section::None;
    let mut pending: Option<PendingArray> = None;
    let mut saw_root = false;
    let mut saw_piece = false;
    loop {
        let event = reader.read_event().map_err(|e| format!("XML error at {}: {e}", reader.error_position()))?;
        match event {
            Event::Start(e) | Event::Empty(e) => {
                let mut attrs = BTreeMap::new();
                for a in e.attributes() {
                    let a = a.map_err(|e| format!("attribute: {e}"))?;
                    let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
                    let value = a.unescape_value().map_err(|e| format!("attribute: {e}"))?.into_owned();
                    attrs.insert(key, value);
                }
                let attr = |k: &str| attrs.get(k).cloned().ok_or_else(|| format!("missing attribute {k}"));
                match e.name().as_ref() {
                    b"VTKFile" => {
                        if attr("type")? != "UnstructuredGrid" {
                            return Err("VTKFile type is not UnstructuredGrid".into());
                        }
                        if attr("byte_order")? != "LittleEndian" || attr("header_type")? != "UInt64" {
                            return Err("only little-endian files with UInt64 headers are supported".into());
                        }
                        saw_root = true;
                    }
                    b"Piece" => {
                        let count = |k: &str| attr(k)?.parse::<usize>().map_err(|e| format!("{k}: {e}"));
                        file.num_points = count("NumberOfPoints")?;
                        file.num_cells = count("NumberOfCells")?;
                        saw_piece = true;
                    }
                    b"PointData" => section = Section::PointData,
                    b"CellData" => section = Section::CellData,
                    b"Points" => section = Section::Points,
                    b"Cells" => section = Section::Cells,
                    b"DataArray" => {
                        if attrs.get("format").map(String::as_str) != Some("binary") {
                            return Err("only binary DataArrays are supported".into());
                        }
                        pending = Some(PendingArray {
                            name: attr("Name")?,
                            ty: attr("type")?,
                            components: attrs.get("NumberOfComponents").map_or(Ok(1), |c| c.parse().map_err(|e| format!("components: {e}")))?,
                            section,
                        });
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                let Some(p) = pending.take() else { continue };
                let text = t.unescape().map_err(|e| format!("text: {e}"))?;
                let values = decode(&p.ty, &text).map_err(|e| format!("array {}: {e}", p.name))?;
                let expected = match p.section {
                    Section::PointData | Section::Points => file.num_points * p.components,
                    Section::CellData => file.num_cells * p.components,
                    Section::Cells | Section::None => values.len(),
                };
                if values.len() != expected {
                    return Err(format!("array {} has {} values, expected {expected}", p.name, values.len()));
                }
                let array = Array { components: p.components, values };
                match p.section {
                    Section::PointData => {
                        file.point_data.insert(p.name, array);
                    }
                    Section::CellData => {
                        file.cell_data.insert(p.name, array);
                    }
                    Section::Points => {
                        if array.components != 3 {
                            return Err("Points must have three components".into());
                        }
                        file.points = array.values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
                    }
                    Section::Cells => {
                        let ints = || array.values.iter().map(|&v| v as usize).collect::<Vec<_>>();
                        match p.name.as_str() {
                            "connectivity" => file.connectivity = ints(),
                            "offsets" => file.offsets = ints(),
                            "types" => file.types = array.values.iter().map(|&v| v as u8).collect(),
                            other => return Err(format!("unexpected cell array {other}")),
                        }
                    }
                    Section::None => return Err(format!("array {} outside any section", p.name)),
                }
            }
            Event::End(e) => {
                if matches!(e.name().as_ref(), b"PointData" | b"CellData" | b"Points" | b"Cells") {
                    section = Section::None;
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !saw_root || !saw_piece {
        return Err("missing VTKFile or Piece element".into());
    }
    if file.points.len() != file.num_points {
        return Err("missing Points array".into());
    }
    if file.offsets.len() != file.num_cells || file.types.len() != file.num_cells {
        return Err("offsets/types do not match NumberOfCells".into());
    }
    let mut start = 0;
    for (c, (&end, &ty)) in file.offsets.iter().zip(&file.types).enumerate() {
        if ty != VTK_QUADRATIC_TETRA || end != start + 10 {
            return Err(format!("cell {c} is not a 10-node quadratic tetrahedron"));
        }
        start = end;
    }
    if file.connectivity.len() != start || file.connectivity.iter().any(|&n| n >= file.num_points) {
        return Err("connectivity does not match offsets or references missing points".into());
    }
    Ok(file)
}

pub fn read_vtu(path: &Path) -> Result<VtuFile, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_vtu(&text).map_err(|m| IoError::format(path, m))
}

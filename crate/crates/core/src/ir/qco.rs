//! `.qco` binary layout (little-endian).
//!
//! ```text
//! header   magic "QCO1" | version u16 | flags u16 | data_qubits u32
//!          | total_qubits u32 | granularity u8 | 7 reserved bytes
//! node     kind u8 | tombstone u8 | child_count u32
//!          | producer u8 | ordinal u32 | notes_len u16 | notes utf-8
//!          | payload
//! unitary  dimension u32 | core_count u32 | indices u32[] | (re f64, im f64)[]
//! gate     qubit_count u8 | (id u32, qtype u8)[] | core | phase f64
//! core     0..=7 named | 16..=18 rotation x/y/z + angle f64
//!          | 32 generic + target_count u8 + (re f64, im f64)[]
//! trailer  CRC32 of everything before it, u32
//! ```
//!
//! Nodes are written in preorder.

use thiserror::Error;

use super::{ByteCode, Compiled, Lineage, Payload, Producer};
use crate::gates::{Axis, CoreOp, CtrlGate, GateGrain, NamedGate};
use crate::numerics::{Matrix, UnitaryM, C64};
use crate::qspace::{QType, Qubit};

pub const QCO_MAGIC: &[u8; 4] = b"QCO1";
pub const QCO_VERSION: u16 = 1;
/// Leaves include Solovay-Kitaev approximations.
pub const FLAG_SK: u16 = 1;
/// An optimization pass has run over the tree.
pub const FLAG_OPTIMIZED: u16 = 2;

const HEADER_LEN: usize = 24;
const KIND_UNITARY: u8 = 0;
const KIND_GATE: u8 = 1;
const CORE_ROTATION: u8 = 16;
const CORE_GENERIC: u8 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QcoError {
    #[error("not a .qco file (bad magic)")]
    BadMagic,
    #[error("unsupported .qco version {0}")]
    UnsupportedVersion(u16),
    #[error("file is truncated")]
    Truncated,
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("malformed .qco: {0}")]
    Malformed(String),
}

type Result<T> = std::result::Result<T, QcoError>;

pub fn serialize(c: &Compiled) -> Vec<u8> {
    let mut w = Vec::new();
    w.extend_from_slice(QCO_MAGIC);
    w.extend_from_slice(&QCO_VERSION.to_le_bytes());
    w.extend_from_slice(&c.flags.to_le_bytes());
    w.extend_from_slice(&(c.data_qubits as u32).to_le_bytes());
    w.extend_from_slice(&(c.total_qubits as u32).to_le_bytes());
    w.push(c.granularity.to_u8());
    w.extend_from_slice(&[0u8; 7]);
    for (node, _) in c.tree.preorder() {
        write_node(&mut w, node);
    }
    let crc = crc32fast::hash(&w);
    w.extend_from_slice(&crc.to_le_bytes());
    w
}

fn put_u32(w: &mut Vec<u8>, v: usize) {
    w.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f64(w: &mut Vec<u8>, v: f64) {
    w.extend_from_slice(&v.to_le_bytes());
}

fn put_matrix(w: &mut Vec<u8>, m: &Matrix) {
    for z in m.data() {
        put_f64(w, z.re);
        put_f64(w, z.im);
    }
}

fn write_node(w: &mut Vec<u8>, n: &ByteCode) {
    w.push(match n.payload {
        Payload::Unitary(_) => KIND_UNITARY,
        Payload::Gate(_) => KIND_GATE,
    });
    w.push(n.tombstone as u8);
    put_u32(w, n.children.len());
    w.push(n.lineage.producer.to_u8());
    w.extend_from_slice(&n.lineage.ordinal.to_le_bytes());
    let notes = n.lineage.notes.as_bytes();
    let len = notes.len().min(u16::MAX as usize);
    // Cut at a char boundary if the notes overflow the length prefix.
    let len = (0..=len)
        .rev()
        .find(|&i| n.lineage.notes.is_char_boundary(i))
        .unwrap_or(0);
    w.extend_from_slice(&(len as u16).to_le_bytes());
    w.extend_from_slice(&notes[..len]);
    match &n.payload {
        Payload::Unitary(u) => {
            put_u32(w, u.dimension());
            put_u32(w, u.core_indices().len());
            for &i in u.core_indices() {
                put_u32(w, i);
            }
            put_matrix(w, u.core());
        }
        Payload::Gate(g) => {
            w.push(g.qubits().len() as u8);
            for (q, t) in g.qubits().iter().zip(g.qtypes()) {
                w.extend_from_slice(&q.id.to_le_bytes());
                w.push(t.to_u8());
            }
            match g.core() {
                CoreOp::Named(ng) => w.push(ng.to_u8()),
                CoreOp::Rotation { axis, angle } => {
                    w.push(CORE_ROTATION + axis_code(*axis));
                    put_f64(w, *angle);
                }
                CoreOp::Generic(m) => {
                    w.push(CORE_GENERIC);
                    w.push(m.rows().trailing_zeros() as u8);
                    put_matrix(w, m);
                }
            }
            put_f64(w, g.phase());
        }
    }
}

fn axis_code(a: Axis) -> u8 {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(QcoError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(QcoError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn matrix(&mut self, n: usize) -> Result<Matrix> {
        let count = n
            .checked_mul(n)
            .ok_or_else(|| malformed("matrix too large"))?;
        // Bounds-check before allocating.
        if count.saturating_mul(16) > self.buf.len() - self.pos {
            return Err(QcoError::Truncated);
        }
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let re = self.f64()?;
            let im = self.f64()?;
            data.push(C64::new(re, im));
        }
        Matrix::from_vec(n, n, data).map_err(|e| malformed(e.to_string()))
    }
}

fn malformed(msg: impl Into<String>) -> QcoError {
    QcoError::Malformed(msg.into())
}

/// Parses a `.qco` image. Checks run in order: magic, version, checksum.
pub fn deserialize(bytes: &[u8]) -> Result<Compiled> {
    if bytes.len() < 4 || &bytes[..4] != QCO_MAGIC {
        return Err(QcoError::BadMagic);
    }
    let version = bytes
        .get(4..6)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or(QcoError::Truncated)?;
    if version != QCO_VERSION {
        return Err(QcoError::UnsupportedVersion(version));
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(QcoError::Truncated);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().unwrap());
    let computed = crc32fast::hash(body);
    let parsed = parse(body);
    if stored != computed {
        // A body that parses short was cut off; anything else is corruption.
        return Err(match parsed {
            Err(QcoError::Truncated) => QcoError::Truncated,
            _ => QcoError::ChecksumMismatch { stored, computed },
        });
    }
    parsed
}

fn parse(body: &[u8]) -> Result<Compiled> {
    let mut r = Reader { buf: body, pos: 6 };
    let flags = r.u16()?;
    let data_qubits = r.u32()? as usize;
    let total_qubits = r.u32()? as usize;
    let g = r.u8()?;
    let granularity =
        GateGrain::from_u8(g).ok_or_else(|| malformed(format!("granularity code {g}")))?;
    r.take(7)?;
    if total_qubits < data_qubits {
        return Err(malformed("total_qubits below data_qubits"));
    }

    // Preorder reconstruction with an explicit stack of (node, children left).
    let mut stack: Vec<(ByteCode, usize)> = Vec::new();
    let tree = loop {
        let (node, pending) = read_node(&mut r, data_qubits)?;
        if pending > 0 {
            stack.push((node, pending));
            continue;
        }
        let mut done = node;
        let finished = loop {
            let Some((parent, left)) = stack.last_mut() else {
                break Some(done);
            };
            parent.children.push(done);
            *left -= 1;
            if *left > 0 {
                break None;
            }
            done = stack.pop().unwrap().0;
        };
        if let Some(root) = finished {
            break root;
        }
    };
    if r.pos != body.len() {
        return Err(malformed(format!("{} trailing bytes", body.len() - r.pos)));
    }
    Ok(Compiled {
        tree,
        data_qubits,
        total_qubits,
        granularity,
        flags,
    })
}

fn read_node(r: &mut Reader, data_qubits: usize) -> Result<(ByteCode, usize)> {
    let kind = r.u8()?;
    let tombstone = match r.u8()? {
        0 => false,
        1 => true,
        t => return Err(malformed(format!("tombstone byte {t}"))),
    };
    let child_count = r.u32()? as usize;
    let p = r.u8()?;
    let producer = Producer::from_u8(p).ok_or_else(|| malformed(format!("producer code {p}")))?;
    let ordinal = r.u32()?;
    let len = r.u16()? as usize;
    let notes = std::str::from_utf8(r.take(len)?)
        .map_err(|_| malformed("notes are not utf-8"))?
        .to_string();
    let payload = match kind {
        KIND_UNITARY => {
            let dimension = r.u32()? as usize;
            let count = r.u32()? as usize;
            if count > dimension {
                return Err(malformed("core larger than dimension"));
            }
            let indices = (0..count)
                .map(|_| r.u32().map(|v| v as usize))
                .collect::<Result<Vec<_>>>()?;
            let core = r.matrix(count)?;
            if indices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(malformed("core indices not increasing"));
            }
            Payload::Unitary(
                UnitaryM::new(dimension, indices, core).map_err(|e| malformed(e.to_string()))?,
            )
        }
        KIND_GATE => {
            let n = r.u8()? as usize;
            let mut qubits = Vec::with_capacity(n);
            let mut qtypes = Vec::with_capacity(n);
            for _ in 0..n {
                let id = r.u32()?;
                qubits.push(if (id as usize) < data_qubits {
                    Qubit::data(id)
                } else {
                    Qubit::ancilla(id)
                });
                let t = r.u8()?;
                qtypes.push(QType::from_u8(t).ok_or_else(|| malformed(format!("qtype code {t}")))?);
            }
            let code = r.u8()?;
            let core = match code {
                0..=7 => CoreOp::Named(NamedGate::from_u8(code).unwrap()),
                16..=18 => {
                    let axis = [Axis::X, Axis::Y, Axis::Z][(code - CORE_ROTATION) as usize];
                    CoreOp::Rotation {
                        axis,
                        angle: r.f64()?,
                    }
                }
                CORE_GENERIC => {
                    let t = r.u8()? as u32;
                    if t == 0 || t > 16 {
                        return Err(malformed(format!("generic core on {t} targets")));
                    }
                    CoreOp::Generic(r.matrix(1 << t)?)
                }
                c => return Err(malformed(format!("core kind {c}"))),
            };
            let phase = r.f64()?;
            let g = CtrlGate::new(qubits, qtypes, core).map_err(|e| malformed(e.to_string()))?;
            Payload::Gate(g.with_phase(phase))
        }
        k => return Err(malformed(format!("node kind {k}"))),
    };
    let node = ByteCode {
        payload,
        children: Vec::with_capacity(child_count.min(1024)),
        lineage: Lineage {
            producer,
            ordinal,
            notes,
        },
        tombstone,
    };
    Ok((node, child_count))
}

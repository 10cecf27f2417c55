//! Interpreter for the emitted OpenQASM subset, written against the
//! OpenQASM gate definitions rather than the compiler's own gate tables so
//! it can serve as an independent check of the emitter.

use std::collections::HashMap;

use thiserror::Error;

use crate::numerics::{Matrix, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing OPENQASM 3.0 header")]
    Header,
    #[error("ancilla qubit {0} does not return to |0⟩")]
    Dirty(usize),
}

type Result<T> = std::result::Result<T, InterpError>;

/// A 2x2 core, its `(qubit, active_value)` controls and its target.
type Op = ([C64; 4], Vec<(usize, bool)>, usize);

/// A simulated program: the unitary over every declared qubit, in
/// declaration order with the first qubit most significant.
#[derive(Debug, Clone)]
pub struct Program {
    pub data: usize,
    pub ancilla: usize,
    pub matrix: Matrix,
    /// From the trailing `// global phase:` comment, when present.
    pub global_phase: Option<f64>,
}

impl Program {
    /// The block with every ancilla in |0⟩, after checking no amplitude
    /// leaves that subspace.
    pub fn data_block(&self) -> Result<Matrix> {
        let n = self.data + self.ancilla;
        let amask = (1usize << self.ancilla) - 1;
        let keep: Vec<usize> = (0..1usize << n).filter(|i| i & amask == 0).collect();
        for &c in &keep {
            for r in 0..1usize << n {
                if r & amask != 0 && self.matrix[(r, c)].norm() > 1e-9 {
                    let bit = (0..self.ancilla)
                        .find(|b| r >> (self.ancilla - 1 - b) & 1 == 1)
                        .unwrap();
                    return Err(InterpError::Dirty(bit));
                }
            }
        }
        let mut out = Matrix::zeros(keep.len(), keep.len());
        for (a, &r) in keep.iter().enumerate() {
            for (b, &c) in keep.iter().enumerate() {
                out[(a, b)] = self.matrix[(r, c)];
            }
        }
        Ok(out)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// 2x2 matrix of a stdgates single-qubit gate, row-major.
fn base_gate(name: &str, param: Option<f64>) -> Option<[C64; 4]> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let needs_param = matches!(name, "rx" | "ry" | "rz");
    if needs_param != param.is_some() {
        return None;
    }
    let th = param.unwrap_or(0.0) / 2.0;
    Some(match name {
        "x" => [z, one, one, z],
        "y" => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        "z" => [one, z, z, c(-1.0, 0.0)],
        "h" => [c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)],
        "s" => [one, z, z, c(0.0, 1.0)],
        "sdg" => [one, z, z, c(0.0, -1.0)],
        "t" => [one, z, z, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
        "tdg" => [
            one,
            z,
            z,
            C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
        ],
        "rx" => [
            c(th.cos(), 0.0),
            c(0.0, -th.sin()),
            c(0.0, -th.sin()),
            c(th.cos(), 0.0),
        ],
        "ry" => [
            c(th.cos(), 0.0),
            c(-th.sin(), 0.0),
            c(th.sin(), 0.0),
            c(th.cos(), 0.0),
        ],
        "rz" => [C64::from_polar(1.0, -th), z, z, C64::from_polar(1.0, th)],
        _ => return None,
    })
}

struct Registers {
    offsets: HashMap<String, (usize, usize)>,
    total: usize,
}

impl Registers {
    fn resolve(&self, operand: &str) -> Option<usize> {
        let (name, rest) = operand.split_once('[')?;
        let idx: usize = rest.strip_suffix(']')?.trim().parse().ok()?;
        let &(start, len) = self.offsets.get(name.trim())?;
        (idx < len).then_some(start + idx)
    }
}

/// Applies `u` to `target` on every column of `m`, where each control
/// `(qubit, active_value)` matches.
fn apply(m: &mut Matrix, n: usize, u: &[C64; 4], controls: &[(usize, bool)], target: usize) {
    let bit = |q: usize| 1usize << (n - 1 - q);
    let tm = bit(target);
    let dim = 1usize << n;
    let mut col = vec![c(0.0, 0.0); dim];
    for j in 0..dim {
        for (i, v) in col.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
        for i in 0..dim {
            if i & tm != 0 || !controls.iter().all(|&(q, on)| (i & bit(q) != 0) == on) {
                continue;
            }
            let (a, b) = (col[i], col[i | tm]);
            m[(i, j)] = u[0] * a + u[1] * b;
            m[(i | tm, j)] = u[2] * a + u[3] * b;
        }
    }
}

/// Parses and simulates a program.
pub fn run(src: &str) -> Result<Program> {
    let mut regs = Registers {
        offsets: HashMap::new(),
        total: 0,
    };
    let mut ops: Vec<Op> = Vec::new();
    let mut global_phase = None;
    let mut header = false;
    for (ln, raw) in src.lines().enumerate() {
        let ln = ln + 1;
        let err = |msg: &str| InterpError::Syntax {
            line: ln,
            msg: msg.to_string(),
        };
        if let Some(p) = raw.trim().strip_prefix("// global phase:") {
            global_phase = Some(p.trim().parse().map_err(|_| err("bad global phase"))?);
            continue;
        }
        let stmt = raw.split("//").next().unwrap().trim();
        if stmt.is_empty() {
            continue;
        }
        let stmt = stmt
            .strip_suffix(';')
            .ok_or_else(|| err("missing `;`"))?
            .trim();
        if !header {
            if stmt != "OPENQASM 3.0" {
                return Err(InterpError::Header);
            }
            header = true;
            continue;
        }
        if stmt.starts_with("include ") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qubit[") {
            let (size, name) = rest.split_once(']').ok_or_else(|| err("bad declaration"))?;
            let size: usize = size.parse().map_err(|_| err("bad register size"))?;
            if regs
                .offsets
                .insert(name.trim().to_string(), (regs.total, size))
                .is_some()
            {
                return Err(err("register declared twice"));
            }
            regs.total += size;
            continue;
        }
        // Modifiers, then `name[(param)] operands`.
        let mut rest = stmt;
        let mut actives = Vec::new();
        loop {
            if let Some(r) = rest.strip_prefix("ctrl @") {
                actives.push(true);
                rest = r.trim_start();
            } else if let Some(r) = rest.strip_prefix("negctrl @") {
                actives.push(false);
                rest = r.trim_start();
            } else {
                break;
            }
        }
        let split = rest
            .find([' ', '('])
            .ok_or_else(|| err("missing operands"))?;
        let (mut name, mut tail) = rest.split_at(split);
        let mut param = None;
        if let Some(t) = tail.strip_prefix('(') {
            let (p, after) = t.split_once(')').ok_or_else(|| err("unclosed parameter"))?;
            param = Some(p.trim().parse::<f64>().map_err(|_| err("bad parameter"))?);
            tail = after;
        }
        if name == "cx" {
            name = "x";
            actives.insert(0, true);
        }
        let u = base_gate(name, param).ok_or_else(|| err(&format!("unsupported gate `{name}`")))?;
        let qubits = tail
            .split(',')
            .map(|o| regs.resolve(o.trim()))
            .collect::<Option<Vec<usize>>>()
            .ok_or_else(|| err("bad operand"))?;
        if qubits.len() != actives.len() + 1 {
            return Err(err("operand count does not match modifiers"));
        }
        let mut seen = qubits.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != qubits.len() {
            return Err(err("repeated operand"));
        }
        let target = *qubits.last().unwrap();
        let controls = qubits[..actives.len()]
            .iter()
            .copied()
            .zip(actives)
            .collect();
        ops.push((u, controls, target));
    }
    if !header {
        return Err(InterpError::Header);
    }
    let n = regs.total;
    let mut m = Matrix::identity(1 << n);
    for (u, controls, target) in &ops {
        apply(&mut m, n, u, controls, *target);
    }
    let size = |name: &str| regs.offsets.get(name).map_or(0, |r| r.1);
    Ok(Program {
        data: size("q"),
        ancilla: n - size("q"),
        matrix: m,
        global_phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::distance;

    const HEAD: &str = "OPENQASM 3.0;\ninclude \"stdgates.inc\";\n";

    #[test]
    fn bell_preparation() {
        let p = run(&format!("{HEAD}qubit[2] q;\nh q[0];\ncx q[0], q[1];\n")).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // First column: (|00⟩ + |11⟩)/√2.
        assert!((p.matrix[(0, 0)].re - r).abs() < 1e-15);
        assert!((p.matrix[(3, 0)].re - r).abs() < 1e-15);
        assert_eq!(p.global_phase, None);
    }

    #[test]
    fn negctrl_and_ordering() {
        let p = run(&format!("{HEAD}qubit[2] q;\nnegctrl @ x q[1], q[0];\n")).unwrap();
        // Flips q0 (the high bit) when q1 = 0: swaps |00⟩ and |10⟩.
        assert_eq!(p.matrix[(2, 0)], c(1.0, 0.0));
        assert_eq!(p.matrix[(1, 1)], c(1.0, 0.0));
    }

    #[test]
    fn rotations_match_definitions() {
        let p = run(&format!(
            "{HEAD}qubit[1] q;\nrz(0.5) q[0];\nrz(-0.5) q[0];\nrx(1) q[0]; // note\n"
        ))
        .unwrap();
        let want = run(&format!("{HEAD}qubit[1] q;\nrx(1) q[0];\n")).unwrap();
        assert!(distance(&p.matrix, &want.matrix).unwrap() < 1e-15);
        let tt = run(&format!("{HEAD}qubit[1] q;\nt q[0];\nt q[0];\n")).unwrap();
        let s = run(&format!("{HEAD}qubit[1] q;\ns q[0];\n")).unwrap();
        assert!(tt.matrix.max_abs_diff(&s.matrix).unwrap() < 1e-15);
    }

    #[test]
    fn dirty_ancilla_is_detected() {
        let p = run(&format!(
            "{HEAD}qubit[1] q;\nqubit[1] anc;\ncx q[0], anc[0];\n"
        ))
        .unwrap();
        assert_eq!(p.data_block(), Err(InterpError::Dirty(0)));
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(run("qubit[1] q;\n").unwrap_err(), InterpError::Header);
        for body in [
            "u3 q[0];",
            "h q[0]",
            "h q[3];",
            "rz q[0];",
            "ctrl @ h q[0];",
            "cx q[0], q[0];",
        ] {
            assert!(
                run(&format!("{HEAD}qubit[2] q;\n{body}\n")).is_err(),
                "{body}"
            );
        }
    }
}

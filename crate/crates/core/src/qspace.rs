//! Qubit identities, per-gate roles and data/ancilla allocation.
//!
//! Basis-state convention: within an ordered qubit list, the first qubit is
//! the most significant bit of the basis index.

use std::fmt;

use thiserror::Error;

/// Role of a qubit within one gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QType {
    Target,
    /// Active when the qubit is |0⟩.
    Control0,
    /// Active when the qubit is |1⟩.
    Control1,
    Idler,
}

impl QType {
    pub fn is_control(self) -> bool {
        matches!(self, QType::Control0 | QType::Control1)
    }

    pub fn to_u8(self) -> u8 {
        match self {
            QType::Target => 0,
            QType::Control0 => 1,
            QType::Control1 => 2,
            QType::Idler => 3,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => QType::Target,
            1 => QType::Control0,
            2 => QType::Control1,
            3 => QType::Idler,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitKind {
    Data,
    Ancilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Qubit {
    pub id: u32,
    pub kind: QubitKind,
}

impl Qubit {
    pub const fn data(id: u32) -> Self {
        Qubit {
            id,
            kind: QubitKind::Data,
        }
    }

    pub const fn ancilla(id: u32) -> Self {
        Qubit {
            id,
            kind: QubitKind::Ancilla,
        }
    }

    pub fn is_ancilla(&self) -> bool {
        self.kind == QubitKind::Ancilla
    }
}

impl PartialOrd for Qubit {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Qubit {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id).then(self.kind.cmp(&other.kind))
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            QubitKind::Data => write!(f, "q{}", self.id),
            QubitKind::Ancilla => write!(f, "a{}", self.id),
        }
    }
}

/// Data qubits `0..n` for an `n`-qubit register.
pub fn data_register(n: usize) -> Vec<Qubit> {
    (0..n as u32).map(Qubit::data).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QSpaceError {
    #[error("data qubits already allocated ({0})")]
    DataAlreadyAllocated(usize),
    #[error("ancilla budget exhausted: requested {requested}, {available} available (budget {budget}, short by {shortfall})")]
    AncillaBudget {
        requested: usize,
        available: usize,
        budget: usize,
        shortfall: usize,
    },
    #[error("qubit {0} is not a borrowed ancilla")]
    NotBorrowed(Qubit),
}

/// Virtual qubit space of one compilation.
///
/// Ancillas are pooled: [`QDevice::borrow_ancilla`] hands out released
/// ancillas before allocating new ones, so the device width is the high
/// watermark of simultaneous ancilla use.
#[derive(Debug, Clone)]
pub struct QDevice {
    data_count: usize,
    data_allocated: bool,
    ancilla_allocated: usize,
    ancilla_budget: Option<usize>,
    free: Vec<Qubit>,
}

impl QDevice {
    /// `ancilla_budget = None` means unbounded.
    pub fn new(ancilla_budget: Option<usize>) -> Self {
        QDevice {
            data_count: 0,
            data_allocated: false,
            ancilla_allocated: 0,
            ancilla_budget,
            free: Vec::new(),
        }
    }

    pub fn allocate_data(&mut self, n: usize) -> Result<Vec<Qubit>, QSpaceError> {
        if self.data_allocated {
            return Err(QSpaceError::DataAlreadyAllocated(self.data_count));
        }
        self.data_allocated = true;
        self.data_count = n;
        Ok(data_register(n))
    }

    /// Allocates `n` fresh ancillas with ids following every existing id.
    pub fn allocate_ancilla(&mut self, n: usize) -> Result<Vec<Qubit>, QSpaceError> {
        if let Some(budget) = self.ancilla_budget {
            let available = budget.saturating_sub(self.ancilla_allocated);
            if n > available {
                return Err(QSpaceError::AncillaBudget {
                    requested: n,
                    available,
                    budget,
                    shortfall: n - available,
                });
            }
        }
        let start = (self.data_count + self.ancilla_allocated) as u32;
        self.ancilla_allocated += n;
        Ok((start..start + n as u32).map(Qubit::ancilla).collect())
    }

    /// Takes `n` ancillas from the pool, allocating only the deficit.
    pub fn borrow_ancilla(&mut self, n: usize) -> Result<Vec<Qubit>, QSpaceError> {
        let reuse = n.min(self.free.len());
        let fresh = self.allocate_ancilla(n - reuse)?;
        // Lowest ids first keeps allocation deterministic.
        self.free.sort_unstable_by(|a, b| b.cmp(a));
        let mut out: Vec<Qubit> = (0..reuse).filter_map(|_| self.free.pop()).collect();
        out.extend(fresh);
        Ok(out)
    }

    /// Returns ancillas to the pool; they must be back in |0⟩.
    pub fn release_ancilla(&mut self, qubits: &[Qubit]) -> Result<(), QSpaceError> {
        let first_ancilla = self.data_count as u32;
        let end = first_ancilla + self.ancilla_allocated as u32;
        for &q in qubits {
            if !q.is_ancilla() || q.id < first_ancilla || q.id >= end || self.free.contains(&q) {
                return Err(QSpaceError::NotBorrowed(q));
            }
        }
        self.free.extend_from_slice(qubits);
        Ok(())
    }

    pub fn data_count(&self) -> usize {
        self.data_count
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancilla_allocated
    }

    pub fn total_qubits(&self) -> usize {
        self.data_count + self.ancilla_allocated
    }

    pub fn ancilla_budget(&self) -> Option<usize> {
        self.ancilla_budget
    }

    /// Every qubit of the device in id order.
    pub fn qubits(&self) -> Vec<Qubit> {
        let mut qs = data_register(self.data_count);
        let start = self.data_count as u32;
        qs.extend((start..start + self.ancilla_allocated as u32).map(Qubit::ancilla));
        qs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_allocation_once() {
        let mut d = QDevice::new(None);
        assert_eq!(
            d.allocate_data(3).unwrap(),
            vec![Qubit::data(0), Qubit::data(1), Qubit::data(2)]
        );
        assert_eq!(
            d.allocate_data(2),
            Err(QSpaceError::DataAlreadyAllocated(3))
        );
        let mut d = QDevice::new(None);
        assert_eq!(d.allocate_data(1).unwrap(), vec![Qubit::data(0)]);
    }

    #[test]
    fn ancilla_ids_follow_data() {
        let mut d = QDevice::new(None);
        d.allocate_data(3).unwrap();
        assert_eq!(
            d.allocate_ancilla(2).unwrap(),
            vec![Qubit::ancilla(3), Qubit::ancilla(4)]
        );
        let mut d = QDevice::new(None);
        d.allocate_data(3).unwrap();
        assert_eq!(d.allocate_ancilla(1).unwrap(), vec![Qubit::ancilla(3)]);
        assert_eq!(d.allocate_ancilla(1).unwrap(), vec![Qubit::ancilla(4)]);
        assert_eq!(d.total_qubits(), 5);
    }

    #[test]
    fn budget_is_enforced() {
        let mut d = QDevice::new(Some(0));
        d.allocate_data(2).unwrap();
        let err = d.allocate_ancilla(1).unwrap_err();
        assert_eq!(
            err,
            QSpaceError::AncillaBudget {
                requested: 1,
                available: 0,
                budget: 0,
                shortfall: 1
            }
        );
        let mut d = QDevice::new(Some(3));
        d.allocate_data(2).unwrap();
        d.allocate_ancilla(2).unwrap();
        assert!(matches!(
            d.allocate_ancilla(3),
            Err(QSpaceError::AncillaBudget { shortfall: 2, .. })
        ));
    }

    #[test]
    fn pool_reuses_released_ancillas() {
        let mut d = QDevice::new(Some(2));
        d.allocate_data(4).unwrap();
        let a = d.borrow_ancilla(2).unwrap();
        d.release_ancilla(&a).unwrap();
        let b = d.borrow_ancilla(2).unwrap();
        assert_eq!(a, b);
        assert_eq!(d.ancilla_count(), 2);
        d.release_ancilla(&b).unwrap();
        assert!(d.release_ancilla(&b[..1]).is_err());
        assert!(d.release_ancilla(&[Qubit::data(0)]).is_err());
        // Budget counts the watermark, not borrows.
        let c = d.borrow_ancilla(1).unwrap();
        assert_eq!(c, vec![Qubit::ancilla(4)]);
    }

    #[test]
    fn ids_are_dense() {
        let mut d = QDevice::new(None);
        d.allocate_data(2).unwrap();
        d.borrow_ancilla(1).unwrap();
        d.allocate_ancilla(2).unwrap();
        let ids: Vec<u32> = d.qubits().iter().map(|q| q.id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
    }
}

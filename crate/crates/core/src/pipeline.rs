//! A compiler pipeline wired from one configuration: decomposition,
//! optimizer passes, emission and verification.

use std::sync::OnceLock;

use thiserror::Error;

use crate::config::{EmitFormat, QConfig};
use crate::decomp::{compile, verify, CompileError, VerifyReport};
use crate::emit::{to_qasm, EmitError};
use crate::gates::GateGrain;
use crate::ir::{serialize, Compiled};
use crate::numerics::UnitaryM;
use crate::optimize::{optimizers_for_level, run_passes, PassReport, WindowOperator};
use crate::sknet::{cache_dir, load_or_build, SU2Net, SkError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("net: {0}")]
    Net(#[from] SkError),
}

/// A compiled tree with the reports of the passes run over it.
#[derive(Debug, Clone)]
pub struct Output {
    pub compiled: Compiled,
    pub passes: Vec<PassReport>,
}

pub struct Pipeline {
    config: QConfig,
    optimizers: Vec<Box<dyn WindowOperator + Send + Sync>>,
    net: OnceLock<SU2Net>,
}

/// Builds an independent pipeline for `c`.
pub fn build_pipeline(c: &QConfig) -> Pipeline {
    Pipeline {
        config: c.clone(),
        optimizers: optimizers_for_level(c.optimization_level, c.granularity),
        net: OnceLock::new(),
    }
}

impl Pipeline {
    pub fn config(&self) -> &QConfig {
        &self.config
    }

    pub fn optimizer_names(&self) -> Vec<&'static str> {
        self.optimizers.iter().map(|o| o.name()).collect()
    }

    /// Supplies the net instead of loading it from the cache.
    pub fn with_net(self, net: SU2Net) -> Self {
        let _ = self.net.set(net);
        self
    }

    /// The net, loaded from the cache directory on first use.
    pub fn net(&self) -> Result<&SU2Net, SkError> {
        if let Some(n) = self.net.get() {
            return Ok(n);
        }
        let net = load_or_build(
            &cache_dir(),
            &self.config.sk_alphabet,
            self.config.sk_net_length,
        )?;
        Ok(self.net.get_or_init(|| net))
    }

    pub fn compile(&self, u: &UnitaryM) -> Result<Output, PipelineError> {
        let net = if self.config.granularity >= GateGrain::UnivGate && !u.is_identity() {
            Some(self.net()?)
        } else {
            None
        };
        let mut compiled = compile(u, &self.config, net)?;
        let passes = run_passes(&mut compiled, &self.optimizers, self.config.window_size);
        Ok(Output { compiled, passes })
    }

    /// The artifact in the configured emit format.
    pub fn render(&self, c: &Compiled, annotate: bool) -> Result<Vec<u8>, EmitError> {
        match self.config.emit_format {
            EmitFormat::Qasm3 => to_qasm(c, annotate).map(String::into_bytes),
            EmitFormat::Qco => Ok(serialize(c)),
        }
    }

    pub fn verify(&self, c: &Compiled, u: &UnitaryM) -> VerifyReport {
        verify(c, u, self.config.tol_verify, self.config.sk_epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    fn cfg(level: u8) -> QConfig {
        QConfig {
            optimization_level: level,
            ..QConfig::default()
        }
    }

    #[test]
    fn optimizer_lists_follow_level() {
        assert!(build_pipeline(&cfg(0)).optimizer_names().is_empty());
        assert_eq!(build_pipeline(&cfg(1)).optimizer_names(), ["annihilation"]);
        assert_eq!(
            build_pipeline(&cfg(2)).optimizer_names(),
            ["annihilation", "consolidation"]
        );
    }

    #[test]
    fn pipelines_are_independent() {
        let mut m = Matrix::zeros(4, 4);
        for (r, c) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            m[(r, c)] = 1.0.into();
        }
        let u = UnitaryM::deflate(&m).unwrap();
        let (a, b) = (build_pipeline(&cfg(2)), build_pipeline(&cfg(2)));
        let (oa, ob) = (a.compile(&u).unwrap(), b.compile(&u).unwrap());
        assert_eq!(serialize(&oa.compiled), serialize(&ob.compiled));
        assert_eq!(
            a.render(&oa.compiled, true).unwrap(),
            b.render(&ob.compiled, true).unwrap()
        );
        assert!(a.verify(&oa.compiled, &u).passed());
    }

    #[test]
    fn qco_format_serializes() {
        let c = QConfig {
            emit_format: EmitFormat::Qco,
            ..QConfig::default()
        };
        let p = build_pipeline(&c);
        let out = p.compile(&UnitaryM::identity(2)).unwrap();
        assert_eq!(
            p.render(&out.compiled, false).unwrap(),
            serialize(&out.compiled)
        );
    }
}

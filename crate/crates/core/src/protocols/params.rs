use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::ecc::RepetitionCode;
use crate::fuzzyext::{check_matching, FeParams, FuzzyExtractor, HelperData};
use crate::pufmodel::{default_d_min, PufParams};

/// A PUF family together with the fuzzy extractor built for it.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    pub puf: PufParams,
    pub fe: FuzzyExtractor,
}

impl Bundle {
    /// Rejects extractors that do not match the family.
    pub fn new(puf: PufParams, fe: FeParams) -> Result<Self, ProtocolError> {
        puf.validate().map_err(|e| ProtocolError::Params(e.to_string()))?;
        if !check_matching(&fe, &puf) {
            return Err(ProtocolError::Params(format!("fuzzy extractor {fe:?} does not match PUF family {puf:?}")));
        }
        let fe = FuzzyExtractor::new(fe).map_err(|e| ProtocolError::Params(e.to_string()))?;
        Ok(Self { puf, fe })
    }

    /// Family with challenge length `n` whose extractor yields `out_len` bits.
    pub fn sized(n: usize, out_len: usize, d_noise: usize, d_min: usize, margin: usize) -> Result<Self, ProtocolError> {
        let fe = FeParams::sized(out_len, d_noise, margin);
        let puf = PufParams { n, rg: fe.source_len, d_noise, d_min, m: fe.m_req };
        Self::new(puf, fe)
    }

    pub fn out_len(&self) -> usize {
        self.fe.params().out_len
    }

    pub fn helper_len(&self) -> usize {
        HelperData::bit_len(self.fe.params())
    }
}

/// Human-editable knobs from which all protocol parameter bundles are derived.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeskConfig {
    /// Security parameter: challenge length of the committer's PUF.
    pub n: usize,
    /// Bits per committed string.
    pub k: usize,
    pub d_noise: usize,
    /// Spare message bits of every fuzzy extractor beyond its output length.
    pub margin: usize,
    /// Unpredictability radius of the extraction PUF; defaults to `max(2, n/8)`.
    pub d_min_e: Option<usize>,
    /// Output length of the extraction PUF's fuzzy extractor; defaults to `n`.
    pub ext_out_len: Option<usize>,
}

impl Default for DeskConfig {
    fn default() -> Self {
        Self { n: 32, k: 4, d_noise: 3, margin: 16, d_min_e: None, ext_out_len: None }
    }
}

impl DeskConfig {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k, ..Self::default() }
    }

    pub fn d_min_e(&self) -> usize {
        self.d_min_e.unwrap_or_else(|| default_d_min(self.n))
    }
}

/// Parameters of the modified and collective extractable commitments.
///
/// `main` is the committer's family `P` (extracting `k*n` bits), `ext` the
/// receiver's family `P_E`, queried on `Enc(st)` with `code` of distance
/// `2*d_min_E - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtParams {
    pub n: usize,
    pub k: usize,
    pub main: Bundle,
    pub ext: Bundle,
    pub code: RepetitionCode,
}

impl ExtParams {
    pub fn desk(cfg: &DeskConfig) -> Result<Self, ProtocolError> {
        let (n, k) = (cfg.n, cfg.k);
        if n == 0 || k == 0 {
            return Err(ProtocolError::Params("n and k must be positive".into()));
        }
        let d_min_e = cfg.d_min_e();
        let code = RepetitionCode::with_min_distance_radius(k * n, d_min_e).map_err(|e| ProtocolError::Params(e.to_string()))?;
        let main = Bundle::sized(n, k * n, cfg.d_noise, default_d_min(n), cfg.margin)?;
        let ext_len = code.params().code_len;
        let ext = Bundle::sized(ext_len, cfg.ext_out_len.unwrap_or(n), cfg.d_noise, d_min_e, cfg.margin)?;
        let p = Self { n, k, main, ext, code };
        p.validate()?;
        Ok(p)
    }

    pub fn st_len(&self) -> usize {
        self.k * self.n
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let cp = self.code.params();
        let bad = |m: &str| Err(ProtocolError::Params(m.into()));
        if self.main.puf.n != self.n {
            return bad("committer PUF challenge length must be n");
        }
        if self.main.out_len() != self.st_len() || cp.msg_len != self.st_len() {
            return bad("extracted string and code message length must be k*n");
        }
        if cp.code_len != self.ext.puf.n {
            return bad("extraction PUF challenge length must equal the code length");
        }
        if cp.distance != 2 * self.ext.puf.d_min - 1 {
            return bad("code distance must be 2*d_min_E - 1");
        }
        Ok(())
    }
}

/// Parameters of the commitment over a single PUF (no extraction PUF).
#[derive(Clone, Debug, PartialEq)]
pub struct CpufParams {
    pub n: usize,
    pub k: usize,
    /// Repetitions per committed bit, `3n`.
    pub l: usize,
    pub main: Bundle,
}

impl CpufParams {
    pub fn desk(cfg: &DeskConfig) -> Result<Self, ProtocolError> {
        let (n, k) = (cfg.n, cfg.k);
        if n == 0 || k == 0 {
            return Err(ProtocolError::Params("n and k must be positive".into()));
        }
        let l = 3 * n;
        let main = Bundle::sized(n, k * l, cfg.d_noise, default_d_min(n), cfg.margin)?;
        Ok(Self { n, k, l, main })
    }

    pub fn st_len(&self) -> usize {
        self.k * self.l
    }
}

/// Parameters of the original two-PUF extractable commitment.
#[derive(Clone, Debug, PartialEq)]
pub struct OriginalParams {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    /// `P_1`, for `PUF_CS`.
    pub cs: Bundle,
    /// `P_2`, for `PUF_CR`; extracts `m*l` bits with `m = |st_E || p_E|`.
    pub cr: Bundle,
    pub ext: Bundle,
    pub code: RepetitionCode,
    /// Verify `st_2` with `PUF_CS` exactly as the protocol figure is printed.
    /// The default evaluates `PUF_CR`, the PUF `st_2` was generated from;
    /// the literal reading rejects honest decommitments.
    pub literal_figure: bool,
}

impl OriginalParams {
    /// Desk-scale bundle. The second PUF carries `m*l` extracted bits, so the
    /// extraction PUF is kept small and `PUF_CR` is noise-free to keep it cheap.
    pub fn desk(cfg: &DeskConfig) -> Result<Self, ProtocolError> {
        let (n, k) = (cfg.n, cfg.k);
        if n == 0 || k == 0 {
            return Err(ProtocolError::Params("n and k must be positive".into()));
        }
        let l = 3 * n;
        let d_min_e = cfg.d_min_e();
        let code = RepetitionCode::with_min_distance_radius(k * l, d_min_e).map_err(|e| ProtocolError::Params(e.to_string()))?;
        let ext = Bundle::sized(code.params().code_len, cfg.ext_out_len.unwrap_or(8), cfg.d_noise, d_min_e, 8)?;
        let m = ext.out_len() + ext.helper_len();
        let cs = Bundle::sized(n, k * l, cfg.d_noise, default_d_min(n), cfg.margin)?;
        let cr = Bundle::sized(n, m * l, 1, default_d_min(n), cfg.margin)?;
        Ok(Self { n, k, l, cs, cr, ext, code, literal_figure: false })
    }

    pub fn st1_len(&self) -> usize {
        self.k * self.l
    }

    /// `m = |st_E || p_E|`.
    pub fn m(&self) -> usize {
        self.ext.out_len() + self.ext.helper_len()
    }
}

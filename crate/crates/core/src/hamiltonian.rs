//! Ground- and excited-manifold spin Hamiltonians of the V_B⁻ defect with
//! its three nearest ¹⁴N nuclei:
//!
//! ```text
//! H/h = D·[S_z² − 2/3] + Σ_j S·A_j·I_j + γ_e·B₀·S_z − γ_n·B₀·Σ_j I_zj
//!       + Σ_j Q_j·[I_zj² − 2/3]
//! ```
//!
//! The static field points along z, perpendicular to the hBN sheet; there is
//! no way to express an off-axis field in [`SpinSystemParams`].

use alloc::format;

use crate::constants;
use crate::error::{Error, Result};
use crate::linalg::Operator;
use crate::spinops::{embed, embed_product, spin1_operators, SiteLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manifold {
    /// Ground-state triplet.
    Ground,
    /// Excited-state triplet.
    Excited,
}

impl Manifold {
    pub fn short_name(self) -> &'static str {
        match self {
            Manifold::Ground => "GS",
            Manifold::Excited => "ES",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Self> {
        match s {
            "GS" | "gs" | "ground" => Some(Manifold::Ground),
            "ES" | "es" | "excited" => Some(Manifold::Excited),
            _ => None,
        }
    }

    pub fn default_zfs(self) -> f64 {
        match self {
            Manifold::Ground => constants::D_GS_MHZ,
            Manifold::Excited => constants::D_ES_MHZ,
        }
    }
}

/// Hyperfine tensor in MHz, rows/columns ordered (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineTensor(pub [[f64; 3]; 3]);

impl HyperfineTensor {
    pub fn diagonal(a_xx: f64, a_yy: f64, a_zz: f64) -> Self {
        HyperfineTensor([[a_xx, 0.0, 0.0], [0.0, a_yy, 0.0], [0.0, 0.0, a_zz]])
    }

    /// Axially symmetric tensor diag(A_tran, A_tran, A_zz).
    pub fn axial(a_tran: f64, a_zz: f64) -> Self {
        Self::diagonal(a_tran, a_tran, a_zz)
    }

    pub fn zero() -> Self {
        Self::diagonal(0.0, 0.0, 0.0)
    }

    /// (A_xx + A_yy) / 2.
    pub fn transverse_mean(&self) -> f64 {
        0.5 * (self.0[0][0] + self.0[1][1])
    }

    pub fn a_zz(&self) -> f64 {
        self.0[2][2]
    }

    pub fn asymmetry(&self) -> f64 {
        let a = &self.0;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((a[i][j] - a[j][i]).abs());
            }
        }
        worst
    }

    /// `R·A·Rᵀ` for a rotation by `angle` (rad) about z.
    pub fn rotated_about_z(&self, angle: f64) -> Self {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let r = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let a = &self.0;
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += r[i][k] * a[k][l] * r[j][l];
                    }
                }
                *o = acc;
            }
        }
        HyperfineTensor(out)
    }
}

/// Every constant entering the Hamiltonian, plus field and manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystemParams {
    pub manifold: Manifold,
    /// Zero-field splitting D, MHz.
    pub d_zfs: f64,
    pub hyperfine: [HyperfineTensor; 3],
    /// MHz/mT.
    pub gamma_e: f64,
    /// MHz/mT.
    pub gamma_n: f64,
    /// Quadrupole constants Q_j, MHz.
    pub quadrupole: [f64; 3],
    /// Static field along z, mT.
    pub b0: f64,
}

pub fn default_params(manifold: Manifold) -> SpinSystemParams {
    let a = HyperfineTensor::axial(constants::A_TRAN_MHZ, constants::A_ZZ_MHZ);
    SpinSystemParams {
        manifold,
        d_zfs: manifold.default_zfs(),
        hyperfine: [a; 3],
        gamma_e: constants::GAMMA_E_MHZ_PER_MT,
        gamma_n: constants::GAMMA_N_MHZ_PER_MT,
        quadrupole: [constants::Q_DEFAULT_MHZ; 3],
        b0: 0.0,
    }
}

impl SpinSystemParams {
    pub fn with_field(mut self, b0: f64) -> Self {
        self.b0 = b0;
        self
    }

    pub fn without_hyperfine(mut self) -> Self {
        self.hyperfine = [HyperfineTensor::zero(); 3];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite, got {v}")))
            }
        };
        finite("d_zfs", self.d_zfs)?;
        finite("gamma_e", self.gamma_e)?;
        finite("gamma_n", self.gamma_n)?;
        finite("b0", self.b0)?;
        if self.d_zfs <= 0.0 {
            return Err(Error::param("d_zfs", format!("must be > 0, got {}", self.d_zfs)));
        }
        if self.gamma_e <= 0.0 {
            return Err(Error::param("gamma_e", "must be > 0"));
        }
        if self.gamma_n <= 0.0 {
            return Err(Error::param("gamma_n", "must be > 0"));
        }
        if self.b0 < 0.0 {
            return Err(Error::param("b0", format!("must be >= 0, got {}", self.b0)));
        }
        for q in &self.quadrupole {
            finite("quadrupole", *q)?;
        }
        for t in &self.hyperfine {
            if t.0.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::param("hyperfine", "entries must be finite"));
            }
            if t.asymmetry() > 1e-9 {
                return Err(Error::param(
                    "hyperfine",
                    format!("tensor not symmetric (defect {:e} MHz)", t.asymmetry()),
                ));
            }
        }
        Ok(())
    }
}

/// Field-independent part and the per-mT Zeeman part of the Hamiltonian,
/// so `H(B) = fixed + B·per_mt`. Sweeps reuse this instead of rebuilding.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    pub fixed: Operator,
    pub per_mt: Operator,
}

impl HamiltonianParts {
    pub fn new(p: &SpinSystemParams) -> Result<Self> {
        p.validate()?;
        let layout = SiteLayout::standard();
        let n = layout.total_dim();
        let (sx, sy, sz) = spin1_operators();
        let s = [&sx, &sy, &sz];
        let sz2 = sz.matmul(&sz);
        let two_thirds = Operator::identity(n).scale(2.0 / 3.0);

        let mut fixed = &embed(&sz2, SiteLayout::ELECTRON, &layout)? - &two_thirds;
        fixed = fixed.scale(p.d_zfs);

        for j in 0..3 {
            let site = j + 1;
            let a = &p.hyperfine[j].0;
            for (ai, s_op) in s.iter().enumerate() {
                for (bi, i_op) in s.iter().enumerate() {
                    if a[ai][bi] == 0.0 {
                        continue;
                    }
                    let term = embed_product(&[(SiteLayout::ELECTRON, *s_op), (site, *i_op)], &layout)?;
                    fixed.add_scaled(&term, a[ai][bi]);
                }
            }
            if p.quadrupole[j] != 0.0 {
                let q = &embed(&sz2, site, &layout)? - &two_thirds;
                fixed.add_scaled(&q, p.quadrupole[j]);
            }
        }

        let mut per_mt = embed(&sz, SiteLayout::ELECTRON, &layout)?.scale(p.gamma_e);
        for site in 1..=3 {
            per_mt.add_scaled(&embed(&sz, site, &layout)?, -p.gamma_n);
        }
        Ok(HamiltonianParts { fixed, per_mt })
    }

    pub fn at(&self, b0: f64) -> Operator {
        let mut h = self.fixed.clone();
        h.add_scaled(&self.per_mt, b0);
        h
    }
}

/// Full 81×81 Hamiltonian H/h in MHz at `p.b0`.
pub fn build_hamiltonian(p: &SpinSystemParams) -> Result<Operator> {
    Ok(HamiltonianParts::new(p)?.at(p.b0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveKind {
    /// In-plane RF field driving nuclear transitions.
    RfInPlane,
    /// Microwave driving electron transitions; same operator, different
    /// frequency window downstream.
    Microwave,
}

/// Coupling to a unit (1 mT) in-plane drive field along x:
/// `V = γ_e·S_x + γ_n·Σ_j I_xj`, MHz per mT.
pub fn drive_operator(p: &SpinSystemParams, kind: DriveKind) -> Operator {
    let _ = kind;
    let layout = SiteLayout::standard();
    let (sx, _, _) = spin1_operators();
    let mut v = embed(&sx, SiteLayout::ELECTRON, &layout)
        .expect("standard layout")
        .scale(p.gamma_e);
    for site in 1..=3 {
        v.add_scaled(&embed(&sx, site, &layout).expect("standard layout"), p.gamma_n);
    }
    v
}

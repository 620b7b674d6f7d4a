//! Spin ⊗ space composite bases for two identical spin-½ particles and the
//! two-qubit computational-basis encoding.
//!
//! Spin states live in the basis {↑↑, ↑↓, ↓↑, ↓↓}. The singlet
//! χ⁻ = (↑↓ − ↓↑)/√2 is the unique exchange-antisymmetric element; the
//! triplet {↑↑, χ⁺, ↓↓} is symmetric. Spatial parts are the symmetry-tagged
//! labels Ψ⁻, Ψ⁺, LL, RR. Fermionic composites pair (A-space, S-spin) or
//! (S-space, A-spin); bosonic ones pair equal symmetries. The computational
//! basis maps |00⟩ = Ψ⁻↑↑, |01⟩ = (Ψ⁻χ⁺ + Ψ⁺χ⁻)/√2,
//! |10⟩ = (Ψ⁻χ⁺ − Ψ⁺χ⁻)/√2 and |11⟩ = Ψ⁻↓↓ (left well = first qubit,
//! ↑ = 0).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Exchange symmetry under particle-label swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeSymmetry {
    Symmetric,
    Antisymmetric,
}

/// Two-spin state in the basis {↑↑, ↑↓, ↓↑, ↓↓}, normalized and with
/// definite exchange symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinWavefunction {
    pub amplitudes: [Complex64; 4],
    pub exchange_symmetry: ExchangeSymmetry,
}

impl SpinWavefunction {
    /// Build from amplitudes; fails unless normalized (1e−12) with definite
    /// exchange symmetry (1e−12).
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("spin state norm² = {norm2}, expected 1")));
        }
        let sym_err = (amplitudes[1] - amplitudes[2]).norm();
        let anti_err =
            (amplitudes[1] + amplitudes[2]).norm() + amplitudes[0].norm() + amplitudes[3].norm();
        let exchange_symmetry = if anti_err <= 1e-12 {
            ExchangeSymmetry::Antisymmetric
        } else if sym_err <= 1e-12 {
            ExchangeSymmetry::Symmetric
        } else {
            return Err(Error::Domain(
                "spin state has no definite exchange symmetry".into(),
            ));
        };
        Ok(SpinWavefunction { amplitudes, exchange_symmetry })
    }

    pub fn up_up() -> Self {
        SpinWavefunction {
            amplitudes: [c(1.0), c(0.0), c(0.0), c(0.0)],
            exchange_symmetry: ExchangeSymmetry::Symmetric,
        }
    }

    pub fn down_down() -> Self {
        SpinWavefunction {
            amplitudes: [c(0.0), c(0.0), c(0.0), c(1.0)],
            exchange_symmetry: ExchangeSymmetry::Symmetric,
        }
    }

    /// χ⁺ = (↑↓ + ↓↑)/√2.
    pub fn chi_plus() -> Self {
        SpinWavefunction {
            amplitudes: [c(0.0), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)],
            exchange_symmetry: ExchangeSymmetry::Symmetric,
        }
    }

    /// χ⁻ = (↑↓ − ↓↑)/√2, the singlet.
    pub fn chi_minus() -> Self {
        SpinWavefunction {
            amplitudes: [c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)],
            exchange_symmetry: ExchangeSymmetry::Antisymmetric,
        }
    }

    pub fn inner(&self, other: &SpinWavefunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Swap the particle labels: ↑↓ ↔ ↓↑.
    pub fn particle_swapped(&self) -> SpinWavefunction {
        let a = &self.amplitudes;
        SpinWavefunction {
            amplitudes: [a[0], a[2], a[1], a[3]],
            exchange_symmetry: self.exchange_symmetry,
        }
    }
}

impl std::fmt::Display for SpinWavefunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if *self == Self::up_up() {
            return write!(f, "↑↑");
        }
        if *self == Self::down_down() {
            return write!(f, "↓↓");
        }
        if *self == Self::chi_plus() {
            return write!(f, "χ(+)");
        }
        if *self == Self::chi_minus() {
            return write!(f, "χ(-)");
        }
        let labels = ["↑↑", "↑↓", "↓↑", "↓↓"];
        let mut first = true;
        for (a, l) in self.amplitudes.iter().zip(labels) {
            if a.norm() > 1e-14 {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "({a:.4})·{l}")?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Symmetry-tagged symbolic spatial parts for two particles in a double
/// well: Ψ∓ = (|LR⟩ ∓ |RL⟩)/√2 and the doubly-occupied |LL⟩, |RR⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialLabel {
    PsiMinus,
    PsiPlus,
    LeftLeft,
    RightRight,
}

impl SpatialLabel {
    pub fn exchange_symmetry(&self) -> ExchangeSymmetry {
        match self {
            SpatialLabel::PsiMinus => ExchangeSymmetry::Antisymmetric,
            _ => ExchangeSymmetry::Symmetric,
        }
    }
}

impl std::fmt::Display for SpatialLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpatialLabel::PsiMinus => write!(f, "Ψ(-)"),
            SpatialLabel::PsiPlus => write!(f, "Ψ(+)"),
            SpatialLabel::LeftLeft => write!(f, "|LL⟩"),
            SpatialLabel::RightRight => write!(f, "|RR⟩"),
        }
    }
}

/// One term of a composite: coefficient × spatial label × spin state.
#[derive(Debug, Clone)]
pub struct CompositeTerm {
    pub coeff: Complex64,
    pub spatial: SpatialLabel,
    pub spin: SpinWavefunction,
}

/// Linear combination of (spatial ⊗ spin) products with symmetry tags.
#[derive(Debug, Clone, Default)]
pub struct CompositeState {
    pub terms: Vec<CompositeTerm>,
}

impl CompositeState {
    pub fn new(terms: Vec<CompositeTerm>) -> Self {
        CompositeState { terms }
    }

    fn single(coeff: f64, spatial: SpatialLabel, spin: SpinWavefunction) -> Self {
        CompositeState { terms: vec![CompositeTerm { coeff: c(coeff), spatial, spin }] }
    }

    /// ⟨self|other⟩ using orthonormality of the spatial labels.
    pub fn inner(&self, other: &CompositeState) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                if a.spatial == b.spatial {
                    acc += a.coeff.conj() * b.coeff * a.spin.inner(&b.spin);
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// Swap the particle labels in every term: spatial labels pick up their
    /// symmetry sign, spin amplitudes permute.
    pub fn particle_swapped(&self) -> CompositeState {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let sign = match t.spatial.exchange_symmetry() {
                    ExchangeSymmetry::Symmetric => 1.0,
                    ExchangeSymmetry::Antisymmetric => -1.0,
                };
                CompositeTerm {
                    coeff: t.coeff * sign,
                    spatial: t.spatial,
                    spin: t.spin.particle_swapped(),
                }
            })
            .collect();
        CompositeState { terms }
    }

    /// Eigenvalue of the explicit label-swap operator if the state is an
    /// eigenstate (±1), measured as ⟨ψ|P|ψ⟩ for normalized ψ.
    pub fn swap_expectation(&self) -> f64 {
        let swapped = self.particle_swapped();
        let n2 = self.inner(self).re;
        if n2 == 0.0 {
            return 0.0;
        }
        self.inner(&swapped).re / n2
    }

    /// True if every term pairs symmetries the fermionic way:
    /// (A-space, S-spin) or (S-space, A-spin).
    pub fn is_fermionic(&self) -> bool {
        self.terms.iter().all(|t| {
            t.spatial.exchange_symmetry() != t.spin.exchange_symmetry
        })
    }

    /// True if every term pairs equal symmetries (bosonic).
    pub fn is_bosonic(&self) -> bool {
        self.terms.iter().all(|t| {
            t.spatial.exchange_symmetry() == t.spin.exchange_symmetry
        })
    }
}

impl std::fmt::Display for CompositeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if (t.coeff - c(1.0)).norm() > 1e-14 {
                if t.coeff.im.abs() < 1e-14 {
                    write!(f, "{:.4}·", t.coeff.re)?;
                } else {
                    write!(f, "({:.4})·", t.coeff)?;
                }
            }
            write!(f, "{}⊗{}", t.spatial, t.spin)?;
        }
        Ok(())
    }
}

/// The 6 two-particle wave functions for identical fermions:
/// Ψ⁻ ⊗ {↑↑, χ⁺, ↓↓} and {LL, Ψ⁺, RR} ⊗ χ⁻.
pub fn fermion_basis() -> Vec<CompositeState> {
    vec![
        CompositeState::single(1.0, SpatialLabel::PsiMinus, SpinWavefunction::up_up()),
        CompositeState::single(1.0, SpatialLabel::PsiMinus, SpinWavefunction::chi_plus()),
        CompositeState::single(1.0, SpatialLabel::PsiMinus, SpinWavefunction::down_down()),
        CompositeState::single(1.0, SpatialLabel::LeftLeft, SpinWavefunction::chi_minus()),
        CompositeState::single(1.0, SpatialLabel::PsiPlus, SpinWavefunction::chi_minus()),
        CompositeState::single(1.0, SpatialLabel::RightRight, SpinWavefunction::chi_minus()),
    ]
}

/// The 10 two-particle wave functions for identical bosons:
/// {LL, Ψ⁺, RR} ⊗ {↑↑, χ⁺, ↓↓} (9) plus Ψ⁻ ⊗ χ⁻ (1).
pub fn boson_basis() -> Vec<CompositeState> {
    let mut out = Vec::with_capacity(10);
    for spatial in [SpatialLabel::LeftLeft, SpatialLabel::PsiPlus, SpatialLabel::RightRight] {
        for spin in
            [SpinWavefunction::up_up(), SpinWavefunction::chi_plus(), SpinWavefunction::down_down()]
        {
            out.push(CompositeState::single(1.0, spatial, spin));
        }
    }
    out.push(CompositeState::single(1.0, SpatialLabel::PsiMinus, SpinWavefunction::chi_minus()));
    out
}

/// Two-qubit state over {|00⟩, |01⟩, |10⟩, |11⟩}, normalized to 1e−12.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    pub amplitudes: [Complex64; 4],
}

impl QubitState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("qubit state norm² = {norm2}, expected 1")));
        }
        Ok(QubitState { amplitudes })
    }

    pub fn basis(index: usize) -> Self {
        let mut amplitudes = [c(0.0); 4];
        amplitudes[index] = c(1.0);
        QubitState { amplitudes }
    }

    pub fn inner(&self, other: &QubitState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl Serialize for QubitState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            amplitudes: [[f64; 2]; 4],
        }
        let amplitudes =
            [0, 1, 2, 3].map(|i| [self.amplitudes[i].re, self.amplitudes[i].im]);
        Repr { amplitudes }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QubitState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            amplitudes: [[f64; 2]; 4],
        }
        let r = Repr::deserialize(d)?;
        QubitState::new(r.amplitudes.map(|p| Complex64::new(p[0], p[1])))
            .map_err(serde::de::Error::custom)
    }
}

/// Encode a two-qubit state as a fermionic composite:
/// a|00⟩ + b|01⟩ + c|10⟩ + d|11⟩ ↦
/// Ψ⁻ ⊗ (a↑↑ + (b+c)/√2 χ⁺ + d↓↓) + Ψ⁺ ⊗ ((b−c)/√2 χ⁻).
pub fn encode_computational(q: &QubitState) -> CompositeState {
    let [a, b, cc, d] = q.amplitudes;
    let sym = [
        a,
        (b + cc) * FRAC_1_SQRT_2 * FRAC_1_SQRT_2,
        (b + cc) * FRAC_1_SQRT_2 * FRAC_1_SQRT_2,
        d,
    ];
    let singlet_coeff = (b - cc) * FRAC_1_SQRT_2;
    let mut terms = Vec::new();
    let sym_norm = sym.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if sym_norm > 1e-15 {
        let spin = SpinWavefunction {
            amplitudes: sym.map(|x| x / sym_norm),
            exchange_symmetry: ExchangeSymmetry::Symmetric,
        };
        terms.push(CompositeTerm { coeff: c(sym_norm), spatial: SpatialLabel::PsiMinus, spin });
    }
    if singlet_coeff.norm() > 1e-15 {
        terms.push(CompositeTerm {
            coeff: singlet_coeff,
            spatial: SpatialLabel::PsiPlus,
            spin: SpinWavefunction::chi_minus(),
        });
    }
    CompositeState { terms }
}

/// Result of projecting a composite onto the computational subspace: raw
/// qubit amplitudes plus the norm left outside the subspace.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub amplitudes: [Complex64; 4],
    pub residual: f64,
}

impl Decoded {
    /// Normalize into a qubit state, if anything survived the projection.
    pub fn normalized(&self) -> Result<QubitState> {
        let norm: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::ZeroProjection { norm });
        }
        QubitState::new(self.amplitudes.map(|a| a / norm))
    }
}

/// Project a composite onto the four encoded computational basis states.
/// The residual is the norm of the component outside the computational
/// subspace (e.g. leakage into |LL⟩χ⁻, |RR⟩χ⁻).
pub fn decode_to_computational(state: &CompositeState) -> Decoded {
    let mut amplitudes = [c(0.0); 4];
    let mut inside = 0.0;
    for (i, amp) in amplitudes.iter_mut().enumerate() {
        let basis = encode_computational(&QubitState::basis(i));
        *amp = basis.inner(state);
        inside += amp.norm_sqr();
    }
    let total = state.inner(state).re;
    let residual = (total - inside).max(0.0).sqrt();
    Decoded { amplitudes, residual }
}
